// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "doctest.h"
#include "helpers.hpp"

using namespace gvm;
using namespace gvm::test;

namespace {

struct Fixture {
    MachineBuilder b;
    TypeId code_t;
    TypeId handler_t;

    Fixture() {
        code_t = b.add_type("svc_code", "--x", "---", "---");
        handler_t = b.add_type("u_handler", "---", "--x", "---", std::nullopt, true);
    }

    void bind_user_handler(const std::string& segment) {
        b.m.handlers[TrapKindId::UserTrap] =
            GuestHandler{b.m.names.lookup(segment), 0, Layer::Utilities};
    }
};

}  // namespace

TEST_CASE("resume policy per trap kind") {
    CHECK(resume_policy(TrapKindId::LinkFault) == ResumePolicy::Retry);
    CHECK(resume_policy(TrapKindId::UserTrap) == ResumePolicy::Next);
    for (TrapKindId k : {TrapKindId::Bounds, TrapKindId::Permission,
                         TrapKindId::IllegalOpcode, TrapKindId::DivideByZero,
                         TrapKindId::StackFault, TrapKindId::GateSequenceFault}) {
        CHECK(resume_policy(k) == ResumePolicy::AlarmAndHalt);
        CHECK(is_error_kind(k));
    }
    CHECK_FALSE(is_error_kind(TrapKindId::UserTrap));
    CHECK_FALSE(is_error_kind(TrapKindId::LinkFault));
}

TEST_CASE("error exit codes are 64 plus the kind ordinal") {
    CHECK(error_exit_code(TrapKindId::Bounds) == 64);
    CHECK(error_exit_code(TrapKindId::GateSequenceFault) == 69);
}

TEST_CASE("a guest UserTrap handler runs and RESUME continues after the trap") {
    Fixture f;
    f.b.add_code("main", f.code_t,
                 {imm(Opcode::LDA, 5), I(Opcode::TRAP, AddrMode::Immediate, 1),
                  imm(Opcode::ADD, 1), none(Opcode::HALT)});
    f.b.add_code("handler", f.handler_t,
                 {imm(Opcode::LDA, 99), none(Opcode::RESUME)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 0);
    // registers come back from the trap frame, so the handler's 99 is gone
    CHECK(m.acc() == 6);
    CHECK(m.layer() == Layer::Services);
    CHECK(m.trap_depth() == 0);
}

TEST_CASE("the guest handler observes its declared layer") {
    Fixture f;
    f.b.add_code("main", f.code_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 1), none(Opcode::HALT)});
    // scratch of a handler-layer type is writable there, so STA proves the
    // handler really runs in Utilities
    f.b.add_code("handler", f.handler_t,
                 {imm(Opcode::LDA, 0x77), slot(Opcode::STA, 0),
                  none(Opcode::RESUME)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 0);

    auto& inst = m.linkage_for(0, m.names.lookup("handler"));
    CHECK(m.store.bytes(inst.descriptor(0).suid)[0] == 0x77);
}

TEST_CASE("RESUME outside handler-flagged code is a GateSequenceFault") {
    Fixture f;
    f.b.add_code("main", f.code_t, {none(Opcode::RESUME)});
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 64 + 5);
}

TEST_CASE("a handler that traps recursively hits the nesting cap") {
    Fixture f;
    f.b.add_code("main", f.code_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 1), none(Opcode::HALT)});
    f.b.add_code("handler", f.handler_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 2), none(Opcode::RESUME)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == kExitFatalTrapNesting);

    auto alarms = events_of(m, EventKind::Alarm);
    REQUIRE(alarms.size() == 1);
    CHECK(*alarms[0].value("kind") == "FatalTrapNesting");
    CHECK(events_of(m, EventKind::Trap).size() == kMaxTrapNesting);
}

TEST_CASE("errors inside a guest handler still alarm and halt") {
    Fixture f;
    f.b.add_code("main", f.code_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 1), none(Opcode::HALT)});
    f.b.add_code("handler", f.handler_t,
                 {imm(Opcode::LDA, 1), imm(Opcode::DIV, 0)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 64 + 3);
}

TEST_CASE("trap frames restore stack depths on resume") {
    Fixture f;
    // main calls sub; sub traps; the handler calls helper and resumes while
    // still one call deep, which the frame restore unwinds
    f.b.add_code("main", f.code_t,
                 {slot(Opcode::CALL, 1), none(Opcode::HALT)}, {"sub"});
    f.b.add_code("sub", f.code_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 1), none(Opcode::RET)});
    f.b.add_code("handler", f.handler_t,
                 {slot(Opcode::CALL, 1), none(Opcode::RESUME)}, {"uhelper"});
    f.b.add_code("uhelper", f.handler_t, {none(Opcode::RET)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 0);
    CHECK(m.stack_depths() == std::array<std::size_t, 3>{0, 0, 0});
}

TEST_CASE("a second UserTrap while one is pending still works under the cap") {
    Fixture f;
    // handler resumes immediately; main traps twice in a row
    f.b.add_code("main", f.code_t,
                 {I(Opcode::TRAP, AddrMode::Immediate, 1),
                  I(Opcode::TRAP, AddrMode::Immediate, 2), none(Opcode::HALT)});
    f.b.add_code("handler", f.handler_t, {none(Opcode::RESUME)});
    f.bind_user_handler("handler");
    Machine m = f.b.start("main");
    CHECK(m.run(100).exit_code == 0);
    CHECK(events_of(m, EventKind::Trap).size() == 2);
}
