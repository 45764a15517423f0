// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "guardvm/core.hpp"
#include "guardvm/event.hpp"
#include "guardvm/isa.hpp"
#include "guardvm/linkage.hpp"
#include "guardvm/mmu.hpp"
#include "guardvm/names.hpp"

namespace gvm {

enum class TrapKindId : std::uint8_t {
    // error kinds; ordinal fixes the exit code 64+n
    Bounds = 0,
    Permission = 1,
    IllegalOpcode = 2,
    DivideByZero = 3,
    StackFault = 4,
    GateSequenceFault = 5,
    // non-error kinds
    UserTrap = 8,
    LinkFault = 9,
};

// halt reasons that are not trap kinds but share the exit-code band
constexpr int kExitLinkUnresolvable = 64 + 6;
constexpr int kExitFatalTrapNesting = 64 + 7;
constexpr int kExitBudgetExceeded = 63;

std::string trap_kind_name(TrapKindId k);
bool is_error_kind(TrapKindId k);
int error_exit_code(TrapKindId k);

enum class ResumePolicy : std::uint8_t { Retry, Next, AlarmAndHalt };
ResumePolicy resume_policy(TrapKindId k);

struct Trap {
    TrapKindId kind = TrapKindId::UserTrap;
    std::uint16_t code = 0;   // UserTrap
    std::uint16_t slot = 0;   // LinkFault
    std::string symbol;       // LinkFault
    MemFault mem;             // Bounds / Permission
};

struct Flags {
    bool zero = false;
    bool negative = false;
    friend bool operator==(const Flags&, const Flags&) = default;
};

struct CodePoint {
    Descriptor code;
    std::uint64_t offset = 0;
};

/// Saved on the Instruction-Layer-internal frame stack; never addressable
/// as a segment.
struct TrapFrame {
    std::uint64_t acc = 0;
    std::uint64_t x = 0;
    Flags flags;
    Layer layer = Layer::Services;
    CodePoint ip;
    std::array<std::size_t, 3> stack_depths{};
    std::size_t gate_depth = 0;
    std::uint64_t process_id = 0;
    Trap trap;
};

struct GateContext {
    Layer entered_from = Layer::Services;
    Layer target = Layer::Utilities;
    Suid via;
};

struct GuestHandler {
    Suid segment;
    std::uint64_t entry = 0;
    Layer layer = Layer::Utilities;
};
/// Native targets run inside the Instruction Layer; Guest targets transfer
/// control to handler-flagged guest code.
using HandlerTarget = std::variant<std::monostate, GuestHandler>;

struct Halted {
    int code = 0;
};
struct Continue {};
using StepOutcome = std::variant<Continue, Halted>;

enum class RunStatus : std::uint8_t { Halted, BudgetExceeded };
struct RunResult {
    RunStatus status = RunStatus::Halted;
    int exit_code = 0;
    std::uint64_t steps = 0;
};

constexpr std::size_t kMaxStackDepth = 1024;
constexpr std::size_t kMaxTrapNesting = 4;

/// One Guard virtual machine instance: tables, store, one process, trace.
/// Strictly single-threaded; instances never share state.
class Machine {
public:
    TypeTable tt;
    GlobalSegmentTable gst;
    NameTable names;
    SegmentStore store;
    std::map<Suid, LinkageTemplate> templates;
    std::map<TrapKindId, HandlerTarget> handlers;  // default: all native

    std::vector<std::uint8_t> input;
    std::vector<std::uint8_t> output;

    /// Places the process at (entry segment, offset), Layer Register at
    /// Services, with empty stacks and trap frames.
    void start(Suid entry_segment, std::uint64_t entry_offset);

    StepOutcome step();
    RunResult run(std::uint64_t max_steps);

    bool runnable() const { return started_ && !halted_; }
    int halt_code() const { return halt_code_; }

    // process state accessors (read side used by tests and the harness)
    std::uint64_t acc() const { return acc_; }
    std::uint64_t x() const { return x_; }
    Flags flags() const { return flags_; }
    Layer layer() const { return layer_; }
    const CodePoint& ip() const { return ip_; }
    std::array<std::size_t, 3> stack_depths() const;
    std::size_t trap_depth() const { return trap_frames_.size(); }

    const EventLog& log() const { return log_; }
    std::uint64_t steps_taken() const { return step_count_; }

    /// Next SUID handed to a runtime-created scratch segment.
    std::uint64_t next_suid = kFirstSuid;

    /// Creates (or returns) the linkage instance for (process, code segment),
    /// registering a fresh zero-filled scratch segment behind slot 0.
    LinkageInstance& linkage_for(std::uint64_t process_id, Suid code_suid);

    /// name -> SUID -> GST -> Type Table -> Descriptor, written into the slot.
    /// Emits the LINK event. Throws Unresolvable halt via internal path when
    /// called from execution; direct callers see CoreError.
    const Descriptor& resolve_slot(LinkageInstance& inst, std::size_t slot);

    /// Administrative segment removal (hot-swap cleanup): GST + store.
    void delete_segment(Suid suid);

private:
    // process registers
    std::uint64_t acc_ = 0;
    std::uint64_t x_ = 0;
    Flags flags_;
    Layer layer_ = Layer::Services;
    CodePoint ip_;
    std::uint64_t process_id_ = 0;

    std::array<std::vector<std::pair<Descriptor, std::uint64_t>>, 3> stacks_;
    std::vector<TrapFrame> trap_frames_;
    std::vector<GateContext> gate_stack_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, LinkageInstance> linkages_;

    EventLog log_;
    std::uint64_t step_count_ = 0;
    std::size_t input_pos_ = 0;
    bool started_ = false;
    bool halted_ = false;
    int halt_code_ = 0;

    // step machinery
    StepOutcome execute(const Instruction& ins);
    std::variant<std::uint64_t, StepOutcome> operand_value(const Instruction& ins);
    std::variant<Descriptor, StepOutcome> slot_descriptor(std::uint16_t slot);
    StepOutcome dispatch(Trap trap);
    StepOutcome apply_resume(ResumePolicy policy);
    StepOutcome halt_with(int code);
    StepOutcome alarm_halt(const Trap& trap);
    StepOutcome fatal(const std::string& kind_name, int exit_code);
    StepOutcome mem_fault(const MemFault& f);
    StepOutcome plain_fault(TrapKindId kind);
    void set_flags(std::uint64_t v);
    void emit(EventKind kind, std::vector<std::pair<std::string, std::string>> payload);
    void emit_step(const Instruction& ins);
    void emit_gate(const char* dir, Layer from, Layer to, Suid via);
    std::string segment_label(Suid suid) const;
    TypeId scratch_type_for(TypeId code_type);
    const Descriptor* native_link_resolution(TrapFrame& frame);
    TrapFrame* pending_link_fault();
};

}  // namespace gvm
