// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
//
// Acceptance suite: one line per criterion, PASS or FAIL, exit code equals
// the number of failures.
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "guardvm/harness/audit.hpp"
#include "guardvm/harness/fuzz.hpp"
#include "guardvm/harness/matrix.hpp"
#include "guardvm/assembler.hpp"
#include "guardvm/harness/scenarios.hpp"
#include "guardvm/image.hpp"
#include "helpers.hpp"

using namespace gvm;
using namespace gvm::test;
using namespace gvm::harness;

namespace {

using Check = std::function<std::optional<std::string>()>;

std::string cli(const std::string& args, int& code) {
    std::string cmd = std::string(GUARDVM_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) {
        code = -1;
        return "";
    }
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int status = pclose(p);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

// ---- criterion 1: permission matrix and boundary offsets -------------------

std::optional<std::string> check_matrix() {
    MatrixReport m = check_permission_matrix();
    if (m.cases != 72) return "expected 72 matrix cases, got " + std::to_string(m.cases);
    if (!m.ok()) return "matrix: " + m.failures.front();
    MatrixReport b = check_boundary_offsets();
    if (!b.ok()) return "bounds: " + b.failures.front();
    return std::nullopt;
}

// ---- criterion 2: 10,000-program differential fuzz -------------------------

std::optional<std::string> check_fuzz() {
    FuzzOptions opt;  // seed 42, count 10000, pinned
    FuzzReport r = run_fuzz(opt);
    if (r.programs != 10000) return "ran " + std::to_string(r.programs) + " programs";
    if (!r.ok())
        return std::to_string(r.mismatch_count) + " mismatches, first: " +
               r.samples.front().detail;
    return std::nullopt;
}

// ---- criterion 3: demand linking on the foo walkthrough --------------------

Machine foo_machine() {
    MachineBuilder b;
    TypeId code = b.add_type("svc_code", "--x", "---", "---");
    TypeId data = b.add_type("util_data", "r--", "rw-", "---");
    b.add_code("foo_user", code,
               {imm(Opcode::LDX, 7), slotx(Opcode::LDA, 1),
                imm(Opcode::LDX, 3), slotx(Opcode::ADD, 1), none(Opcode::HALT)},
               {"foo"});
    std::vector<std::uint8_t> bytes(16);
    for (int i = 0; i < 16; ++i) bytes[i] = static_cast<std::uint8_t>(i);
    b.add_data("foo", data, bytes);
    return b.start("foo_user");
}

std::optional<std::string> check_linking() {
    Machine m = foo_machine();
    RunResult r = m.run(100);
    if (r.exit_code != 0) return "exit " + std::to_string(r.exit_code);
    if (m.acc() != 10) return "acc " + std::to_string(m.acc()) + ", want 10";

    auto traps = events_of(m, EventKind::Trap);
    auto links = events_of(m, EventKind::Link);
    if (traps.size() != 1 || *traps[0].value("kind") != "LinkFault")
        return "expected exactly one LinkFault trap";
    if (links.size() != 1) return "expected exactly one LINK for two accesses";
    const Event& l = links[0];
    if (*l.value("sym") != "foo" || *l.value("len") != "0x10")
        return "LINK identity wrong";
    if (*l.value("sperm") != "r--" || *l.value("uperm") != "rw-" ||
        *l.value("kperm") != "---")
        return "LINK permissions wrong: " + *l.value("sperm") + "/" +
               *l.value("uperm") + "/" + *l.value("kperm");

    // order: the trap precedes the link, the link precedes the halt
    const auto& evs = m.log().events();
    std::size_t ti = 0, li = 0, hi = 0;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (evs[i].kind == EventKind::Trap) ti = i;
        if (evs[i].kind == EventKind::Link) li = i;
        if (evs[i].kind == EventKind::Halt) hi = i;
    }
    if (!(ti < li && li < hi)) return "TRAP/LINK/HALT out of order";
    AuditReport audit = audit_trace(evs);
    if (!audit.ok()) return "audit: " + audit.problems.front();
    return std::nullopt;
}

// ---- criterion 4: hot swap -------------------------------------------------

std::optional<std::string> check_hotswap() {
    MachineBuilder b;
    TypeId code = b.add_type("svc_code", "--x", "---", "---");
    TypeId data = b.add_type("util_data", "r--", "rw-", "---");
    Suid prog = b.add_code("main", code, {none(Opcode::HALT)}, {"filter"});
    Suid old_suid = b.add_data("filter", data, std::vector<std::uint8_t>(8, 0xAA));
    Machine m = b.start("main");

    auto& settled = m.linkage_for(1, prog);
    m.resolve_slot(settled, 1);

    m.names.rename("filter", "oldfilter");
    Suid new_suid{m.next_suid++};
    m.gst.add(GstEntry{new_suid, 8, data});
    m.store.bind(new_suid, std::vector<std::uint8_t>(8, 0xBB));
    m.names.bind("filter", new_suid);

    auto& fresh = m.linkage_for(2, prog);
    m.resolve_slot(fresh, 1);

    if (settled.descriptor(1).suid != old_suid)
        return "settled process lost its descriptor";
    auto r_old = m.store.read_byte(settled.descriptor(1), 0, Layer::Services);
    if (std::get<std::uint8_t>(r_old) != 0xAA)
        return "settled process no longer sees the old bytes";
    if (fresh.descriptor(1).suid != new_suid)
        return "new resolution did not pick up the new SUID";
    auto r_new = m.store.read_byte(fresh.descriptor(1), 0, Layer::Services);
    if (std::get<std::uint8_t>(r_new) != 0xBB)
        return "new resolution reads the wrong bytes";

    // the CLI path: rename + bind on an image file, then trace inspection
    std::filesystem::path tmp =
        std::filesystem::temp_directory_path() / "guardvm_accept_swap";
    std::filesystem::create_directories(tmp);
    std::filesystem::path img = tmp / "t.img";
    std::filesystem::path src_path = tmp / "foo2.gasm";
    std::filesystem::path obj_path = tmp / "foo2.gobj";
    auto cleanup = [&] { std::filesystem::remove_all(tmp); };
    int c = 0;
    std::string manifest =
        (std::filesystem::path(GUARDVM_DEMOS_DIR) / "tutorial.gim").string();
    cli("build " + manifest + " -o " + img.string(), c);
    if (c != 0) { cleanup(); return "CLI build failed"; }
    std::string before = cli("run " + img.string() + " --trace", c);
    if (before.find("sym=foo suid=0x1003") == std::string::npos) {
        cleanup();
        return "trace before the swap lacks the original binding";
    }
    std::ofstream(src_path) << ".segment foo2 util_data\n"
                            << ".byte 1, 2, 3, 4, 5, 6, 7, 8\n";
    cli("asm " + src_path.string() + " -o " + obj_path.string(), c);
    if (c != 0) { cleanup(); return "CLI asm failed"; }
    cli("rename " + img.string() + " foo oldfoo", c);
    if (c != 0) { cleanup(); return "CLI rename failed"; }
    cli("bind " + img.string() + " foo " + obj_path.string() + " util_data", c);
    if (c != 0) { cleanup(); return "CLI bind failed"; }
    std::string after = cli("run " + img.string() + " --trace", c);
    cleanup();
    if (c != 0) return "CLI run after the swap failed";
    if (after.find("sym=foo suid=0x1004") == std::string::npos)
        return "fresh machine did not resolve foo to the new SUID";
    return std::nullopt;
}

// ---- criterion 5: layer enforcement ----------------------------------------

struct LayerRig {
    MachineBuilder b;
    TypeId svc, u_code, u_gate_t, data;
    LayerRig() {
        svc = b.add_type("svc_code", "--x", "---", "---");
        u_code = b.add_type("u_code", "---", "--x", "---");
        u_gate_t = b.add_type("u_gate_t", "--x", "---", "---", Layer::Utilities);
        data = b.add_type("util_data", "r--", "rw-", "---");
    }
};

std::optional<std::string> check_layers() {
    // (a) every restricted instruction faults with Permission at S and at U
    struct Op {
        Instruction ins;
        const char* name;
    };
    const Op ops[] = {
        {none(Opcode::RESOLVE), "RESOLVE"},
        {slot(Opcode::SEGLEN, 0), "SEGLEN"},
        {imm(Opcode::ALARM, 1), "ALARM"},
        {imm(Opcode::LOGEV, 1), "LOGEV"},
    };
    for (const Op& op : ops) {
        {
            LayerRig r;
            r.b.add_code("main", r.svc, {op.ins});
            Machine m = r.b.start("main");
            if (m.run(100).exit_code != 65)
                return std::string("(a) ") + op.name + " ran at S";
            auto faults = events_of(m, EventKind::Fault);
            if (faults.size() != 1 || *faults[0].value("kind") != "Permission" ||
                *faults[0].value("layer") != "S")
                return std::string("(a) ") + op.name + " at S: wrong fault";
        }
        {
            LayerRig r;
            r.b.add_code("main", r.svc,
                         {slot(Opcode::CALL, 1), none(Opcode::HALT)}, {"u_gate"});
            r.b.add_code("u_gate", r.u_gate_t,
                         {imm(Opcode::ENTER, 1), op.ins, none(Opcode::EXIT),
                          none(Opcode::RET)});
            Machine m = r.b.start("main");
            if (m.run(200).exit_code != 65)
                return std::string("(a) ") + op.name + " ran at U";
            auto faults = events_of(m, EventKind::Fault);
            if (faults.empty() || *faults.back().value("kind") != "Permission" ||
                *faults.back().value("layer") != "U")
                return std::string("(a) ") + op.name + " at U: wrong fault";
            if (events_of(m, EventKind::Alarm).size() != 1)
                return std::string("(a) ") + op.name + " at U: no single alarm";
        }
    }
    {  // (b) ENTER in a non-gate segment, and EXIT with no gate open
        LayerRig r;
        r.b.add_code("main", r.svc, {imm(Opcode::ENTER, 1)});
        Machine m = r.b.start("main");
        if (m.run(100).exit_code != 69) return "(b) ENTER outside a gate allowed";

        LayerRig r2;
        r2.b.add_code("main", r2.svc, {none(Opcode::EXIT)});
        Machine m2 = r2.b.start("main");
        if (m2.run(100).exit_code != 69) return "(b) bare EXIT allowed";
    }
    {  // (c) gate round trip: S to U and back, stacks restored
        LayerRig r;
        r.b.add_code("main", r.svc,
                     {slot(Opcode::CALL, 1), none(Opcode::HALT)}, {"u_gate"});
        r.b.add_code("u_gate", r.u_gate_t,
                     {imm(Opcode::ENTER, 1), slot(Opcode::CALL, 1),
                      none(Opcode::EXIT), none(Opcode::RET)},
                     {"u_fn"});
        r.b.add_code("u_fn", r.u_code, {imm(Opcode::LDA, 9), none(Opcode::RET)});
        Machine m = r.b.start("main");
        if (m.run(200).exit_code != 0) return "(c) gate round trip failed";
        if (m.layer() != Layer::Services) return "(c) layer not restored";
        if (m.stack_depths() != std::array<std::size_t, 3>{0, 0, 0})
            return "(c) stacks not restored";
        std::vector<std::string> moves;  // real gates only, not link resolution
        for (const Event& e : events_of(m, EventKind::Gate))
            if (*e.value("via") != "0x0")
                moves.push_back(*e.value("dir") + ":" + *e.value("from") + "->" +
                                *e.value("to"));
        if (moves != std::vector<std::string>{"enter:S->U", "exit:U->S"})
            return "(c) trace does not show the S->U->S sequence";

        LayerRig r2;  // a gate may not skip a layer
        TypeId skip = r2.b.add_type("skip_gate", "--x", "---", "---", Layer::Kernel);
        r2.b.add_code("main", r2.svc,
                      {slot(Opcode::CALL, 1), none(Opcode::HALT)}, {"gate"});
        r2.b.add_code("gate", skip, {imm(Opcode::ENTER, 2), none(Opcode::RET)});
        Machine m2 = r2.b.start("main");
        if (m2.run(100).exit_code != 69) return "(c) layer-skipping gate allowed";
    }
    {  // (d) a gate running at U cannot call Services-only code
        LayerRig r;
        r.b.add_code("main", r.svc,
                     {slot(Opcode::CALL, 1), none(Opcode::HALT)}, {"u_gate"});
        r.b.add_code("u_gate", r.u_gate_t,
                     {imm(Opcode::ENTER, 1), slot(Opcode::CALL, 1),
                      none(Opcode::EXIT), none(Opcode::RET)},
                     {"svc_fn"});
        r.b.add_code("svc_fn", r.svc, {none(Opcode::RET)});
        Machine m = r.b.start("main");
        if (m.run(200).exit_code != 65) return "(d) U called Services code";
        auto faults = events_of(m, EventKind::Fault);
        if (faults.empty() || *faults.back().value("kind") != "Permission" ||
            *faults.back().value("access") != "X" ||
            *faults.back().value("layer") != "U")
            return "(d) wrong fault for the upward call";
    }
    return std::nullopt;
}

// ---- criterion 6: trap kinds and resume policies ---------------------------

std::optional<std::string> check_traps() {
    if (resume_policy(TrapKindId::LinkFault) != ResumePolicy::Retry ||
        resume_policy(TrapKindId::UserTrap) != ResumePolicy::Next)
        return "policy table wrong";

    struct Case {
        std::vector<Instruction> code;
        int want;
    };
    std::vector<Case> cases = {
        {{none(Opcode::NOP)}, 64},                                    // Bounds
        {{imm(Opcode::ALARM, 0)}, 65},                                // Permission
        {{I(Opcode::JMP, AddrMode::Immediate, 2)}, 66},               // IllegalOpcode
        {{imm(Opcode::LDA, 4), imm(Opcode::DIV, 0)}, 67},             // DivideByZero
        {{none(Opcode::RET)}, 68},                                    // StackFault
        {{none(Opcode::EXIT)}, 69},                                   // GateSequenceFault
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        MachineBuilder b;
        TypeId code = b.add_type("svc_code", "--x", "---", "---");
        b.add_code("main", code, cases[i].code);
        Machine m = b.start("main");
        RunResult r = m.run(100);
        if (r.exit_code != cases[i].want)
            return "error kind " + std::to_string(i) + " exited " +
                   std::to_string(r.exit_code) + ", want " +
                   std::to_string(cases[i].want);
        auto alarms = events_of(m, EventKind::Alarm);
        if (alarms.size() != 1) return "error kind did not alarm exactly once";
        AuditReport audit = audit_trace(m.log().events());
        if (!audit.ok()) return "audit: " + audit.problems.front();
    }

    {  // UserTrap resumes at the next instruction
        MachineBuilder b;
        TypeId code = b.add_type("svc_code", "--x", "---", "---");
        b.add_code("main", code,
                   {imm(Opcode::LDA, 1), I(Opcode::TRAP, AddrMode::Immediate, 9),
                    imm(Opcode::ADD, 1), none(Opcode::HALT)});
        Machine m = b.start("main");
        if (m.run(100).exit_code != 0 || m.acc() != 2)
            return "UserTrap did not resume at the next instruction";
    }
    {  // LinkFault retries the faulted instruction (acc comes from the retry)
        Machine m = foo_machine();
        m.run(100);
        if (m.acc() != 10) return "LinkFault retry produced the wrong value";
    }
    {  // runaway nesting is fatal with the documented code
        MachineBuilder b;
        TypeId code = b.add_type("svc_code", "--x", "---", "---");
        TypeId h = b.add_type("h", "---", "--x", "---", std::nullopt, true);
        b.add_code("main", code, {I(Opcode::TRAP, AddrMode::Immediate, 1),
                                  none(Opcode::HALT)});
        b.add_code("handler", h, {I(Opcode::TRAP, AddrMode::Immediate, 2),
                                  none(Opcode::RESUME)});
        b.m.handlers[TrapKindId::UserTrap] =
            GuestHandler{b.m.names.lookup("handler"), 0, Layer::Utilities};
        Machine m = b.start("main");
        if (m.run(100).exit_code != 71) return "nesting cap not enforced";
    }
    return std::nullopt;
}

// ---- criterion 7: toolchain determinism ------------------------------------

std::optional<std::string> check_determinism() {
    std::filesystem::path demos = GUARDVM_DEMOS_DIR;
    std::string manifest = (demos / "tutorial.gim").string();

    // assemble -> disassemble -> assemble over the whole demo corpus
    for (const auto& entry : std::filesystem::directory_iterator(demos)) {
        if (entry.path().extension() != ".gasm") continue;
        std::ifstream in(entry.path());
        std::ostringstream os;
        os << in.rdbuf();
        AsmResult first = assemble(os.str());
        if (!first.ok())
            return entry.path().filename().string() + " does not assemble";
        AsmResult second = assemble(disassemble(*first.unit));
        if (!second.ok() || second.unit->bytes != first.unit->bytes)
            return entry.path().filename().string() +
                   ": disassembly is not a byte-identical fixed point";
    }

    GuardImage a = build_image_from_file(manifest);
    GuardImage b = build_image_from_file(manifest);
    if (serialize_image(a) != serialize_image(b))
        return "in-process builds differ";
    if (serialize_image(parse_image(serialize_image(a))) != serialize_image(a))
        return "image round trip is not a fixed point";

    int c1 = 0, c2 = 0;
    std::string t1 = cli("build " + manifest, c1);
    std::string t2 = cli("build " + manifest, c2);
    if (c1 != 0 || c2 != 0) return "CLI build failed";
    if (t1 != t2) return "CLI builds differ";
    if (t1 != serialize_image(a)) return "CLI and library builds differ";

    std::filesystem::path img =
        std::filesystem::temp_directory_path() / "guardvm_accept.img";
    std::ofstream(img, std::ios::binary) << t1;
    std::string r1 = cli("run " + img.string() + " --trace-steps", c1);
    std::string r2 = cli("run " + img.string() + " --trace-steps", c2);
    std::filesystem::remove(img);
    if (c1 != 0 || c2 != 0) return "CLI run failed";
    if (r1 != r2) return "CLI run traces differ";
    if (r1.empty()) return "CLI produced no trace";
    return std::nullopt;
}

// ---- criterion 8: guest and native link handling agree ---------------------

std::optional<std::string> check_handler_equivalence() {
    auto foo_link = [](bool guest) -> std::vector<std::pair<std::string, std::string>> {
        MachineBuilder b;
        TypeId code = b.add_type("svc_code", "--x", "---", "---");
        TypeId data = b.add_type("util_data", "r--", "rw-", "---");
        b.add_code("main", code,
                   {imm(Opcode::LDX, 7), slotx(Opcode::LDA, 1), none(Opcode::HALT)},
                   {"foo"});
        std::vector<std::uint8_t> bytes(16);
        for (int i = 0; i < 16; ++i) bytes[i] = static_cast<std::uint8_t>(i * 2);
        b.add_data("foo", data, bytes);
        if (guest) {
            TypeId h = b.add_type("lf_handler_t", "---", "--x", "---",
                                  std::nullopt, true);
            TypeId g = b.add_type("k_gate_t", "---", "--x", "---", Layer::Kernel);
            b.add_code("lf_handler", h,
                       {slot(Opcode::CALL, 1), none(Opcode::RESUME)}, {"k_gate"});
            b.add_code("k_gate", g,
                       {imm(Opcode::ENTER, 2), none(Opcode::RESOLVE),
                        none(Opcode::EXIT), none(Opcode::RET)});
            b.m.handlers[TrapKindId::LinkFault] =
                GuestHandler{b.m.names.lookup("lf_handler"), 0, Layer::Utilities};
        }
        Machine m = b.start("main");
        if (m.run(400).exit_code != 0 || m.acc() != 14) return {};
        for (const Event& e : m.log().events())
            if (e.kind == EventKind::Link && *e.value("sym") == "foo")
                return e.payload;
        return {};
    };
    auto native = foo_link(false);
    auto guest = foo_link(true);
    if (native.empty() || guest.empty()) return "a variant failed to run";
    if (native != guest) return "LINK payloads differ between handlers";
    return std::nullopt;
}

// ---- criterion 9: the packet filter against the host reference -------------

std::optional<std::string> check_netfilter() {
    auto stream = demo_packets(50);
    auto want = reference_filter(stream);
    if (want.size() != 50) return "reference produced " + std::to_string(want.size()) + " verdicts";
    auto got = run_filter(stream);
    if (got != want) {
        for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i)
            if (got[i] != want[i])
                return "verdict " + std::to_string(i) + " differs";
        return "verdict counts differ: " + std::to_string(got.size());
    }
    return std::nullopt;
}

}  // namespace

int main() {
    const std::pair<const char*, Check> criteria[] = {
        {"permission matrix (72 cases + boundary offsets)", check_matrix},
        {"differential fuzz (10000 programs, seed 42)", check_fuzz},
        {"demand linking walkthrough (trap, link, retry, at most once)", check_linking},
        {"hot swap (old bytes for settled, new SUID for fresh)", check_hotswap},
        {"layer enforcement (data, calls, gates, restricted ops)", check_layers},
        {"trap kinds, exit codes and resume policies", check_traps},
        {"toolchain determinism (library and CLI)", check_determinism},
        {"guest and native link handlers are equivalent", check_handler_equivalence},
        {"packet filter matches the host reference (50 packets)", check_netfilter},
    };

    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        std::optional<std::string> err;
        try {
            err = fn();
        } catch (const std::exception& e) {
            err = std::string("exception: ") + e.what();
        }
        if (err) {
            ++failures;
            std::cout << "FAIL: " << name << " -- " << *err << "\n";
        } else {
            std::cout << "PASS: " << name << "\n";
        }
    }
    return failures;
}
