// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/machine.hpp"

namespace gvm {

std::string trap_kind_name(TrapKindId k) {
    switch (k) {
    case TrapKindId::Bounds: return "Bounds";
    case TrapKindId::Permission: return "Permission";
    case TrapKindId::IllegalOpcode: return "IllegalOpcode";
    case TrapKindId::DivideByZero: return "DivideByZero";
    case TrapKindId::StackFault: return "StackFault";
    case TrapKindId::GateSequenceFault: return "GateSequenceFault";
    case TrapKindId::UserTrap: return "UserTrap";
    case TrapKindId::LinkFault: return "LinkFault";
    }
    return "?";
}

bool is_error_kind(TrapKindId k) {
    return static_cast<int>(k) <= static_cast<int>(TrapKindId::GateSequenceFault);
}

int error_exit_code(TrapKindId k) { return 64 + static_cast<int>(k); }

ResumePolicy resume_policy(TrapKindId k) {
    switch (k) {
    case TrapKindId::LinkFault: return ResumePolicy::Retry;
    case TrapKindId::UserTrap: return ResumePolicy::Next;
    default: return ResumePolicy::AlarmAndHalt;
    }
}

void Machine::start(Suid entry_segment, std::uint64_t entry_offset) {
    ip_.code = build_descriptor(entry_segment, gst, tt);
    ip_.offset = entry_offset;
    layer_ = Layer::Services;
    acc_ = x_ = 0;
    flags_ = {};
    for (auto& s : stacks_) s.clear();
    trap_frames_.clear();
    gate_stack_.clear();
    started_ = true;
    halted_ = false;
}

std::array<std::size_t, 3> Machine::stack_depths() const {
    return {stacks_[0].size(), stacks_[1].size(), stacks_[2].size()};
}

std::string Machine::segment_label(Suid suid) const {
    if (auto n = names.name_of(suid)) return *n;
    return hex_u64(suid.value);
}

void Machine::emit(EventKind kind,
                   std::vector<std::pair<std::string, std::string>> payload) {
    Event e;
    e.step = step_count_;
    e.kind = kind;
    e.payload = std::move(payload);
    log_.append(std::move(e));
}

void Machine::emit_step(const Instruction& ins) {
    emit(EventKind::Step,
         {{"layer", std::string(1, layer_letter(layer_))},
          {"loc", segment_label(ip_.code.suid) + "+" + hex_u64(ip_.offset)},
          {"op", mnemonic(ins.opcode)},
          {"arg", operand_text(ins)}});
}

void Machine::emit_gate(const char* dir, Layer from, Layer to, Suid via) {
    emit(EventKind::Gate, {{"dir", dir},
                           {"from", std::string(1, layer_letter(from))},
                           {"to", std::string(1, layer_letter(to))},
                           {"via", hex_u64(via.value)}});
}

void Machine::set_flags(std::uint64_t v) {
    flags_.zero = v == 0;
    flags_.negative = (v >> 63) != 0;
}

StepOutcome Machine::halt_with(int code) {
    emit(EventKind::Halt, {{"code", std::to_string(code)}});
    halted_ = true;
    halt_code_ = code;
    return Halted{code};
}

namespace {

std::vector<std::pair<std::string, std::string>> fault_payload(const Trap& t) {
    bool mem = t.kind == TrapKindId::Bounds || t.kind == TrapKindId::Permission;
    std::string access =
        mem ? std::string(1, access_letter(t.mem.access)) : std::string("-");
    return {{"kind", trap_kind_name(t.kind)},
            {"suid", hex_u64(t.mem.suid.value)},
            {"off", hex_u64(t.mem.offset)},
            {"access", access},
            {"layer", std::string(1, layer_letter(t.mem.layer))}};
}

}  // namespace

StepOutcome Machine::alarm_halt(const Trap& trap) {
    emit(EventKind::Alarm, fault_payload(trap));
    return halt_with(error_exit_code(trap.kind));
}

StepOutcome Machine::fatal(const std::string& kind_name, int exit_code) {
    emit(EventKind::Alarm, {{"kind", kind_name},
                            {"suid", hex_u64(ip_.code.suid.value)},
                            {"off", hex_u64(ip_.offset)},
                            {"access", "-"},
                            {"layer", std::string(1, layer_letter(layer_))}});
    return halt_with(exit_code);
}

StepOutcome Machine::mem_fault(const MemFault& f) {
    Trap t;
    t.kind = f.kind == MemFault::Kind::Bounds ? TrapKindId::Bounds
                                              : TrapKindId::Permission;
    t.mem = f;
    return dispatch(std::move(t));
}

StepOutcome Machine::plain_fault(TrapKindId kind) {
    Trap t;
    t.kind = kind;
    t.mem.suid = ip_.code.suid;
    t.mem.offset = ip_.offset;
    t.mem.access = AccessKind::ExecuteFetch;
    t.mem.layer = layer_;
    return dispatch(std::move(t));
}

TrapFrame* Machine::pending_link_fault() {
    for (auto it = trap_frames_.rbegin(); it != trap_frames_.rend(); ++it)
        if (it->trap.kind == TrapKindId::LinkFault) return &*it;
    return nullptr;
}

StepOutcome Machine::dispatch(Trap trap) {
    if (is_error_kind(trap.kind)) emit(EventKind::Fault, fault_payload(trap));

    if (trap_frames_.size() >= kMaxTrapNesting)
        return fatal("FatalTrapNesting", kExitFatalTrapNesting);

    bool nested_link = trap.kind == TrapKindId::LinkFault && pending_link_fault();

    TrapFrame frame;
    frame.acc = acc_;
    frame.x = x_;
    frame.flags = flags_;
    frame.layer = layer_;
    frame.ip = ip_;
    frame.stack_depths = stack_depths();
    frame.gate_depth = gate_stack_.size();
    frame.process_id = process_id_;
    frame.trap = trap;
    trap_frames_.push_back(std::move(frame));

    switch (trap.kind) {
    case TrapKindId::UserTrap:
        emit(EventKind::Trap, {{"kind", "UserTrap"},
                               {"code", std::to_string(trap.code)}});
        break;
    case TrapKindId::LinkFault:
        emit(EventKind::Trap, {{"kind", "LinkFault"},
                               {"slot", std::to_string(trap.slot)},
                               {"sym", trap.symbol}});
        break;
    default:
        emit(EventKind::Trap, fault_payload(trap));
        break;
    }

    if (is_error_kind(trap.kind)) {
        // default error handler: alarm, then halt with the documented code
        return alarm_halt(trap);
    }

    auto it = handlers.find(trap.kind);
    // A LinkFault raised while a guest LinkFault handler is already pending
    // resolves natively; the guest handler's own externs would otherwise
    // recurse until the nesting cap.
    if (it != handlers.end() &&
        std::holds_alternative<GuestHandler>(it->second) && !nested_link) {
        const GuestHandler& h = std::get<GuestHandler>(it->second);
        Descriptor d = build_descriptor(h.segment, gst, tt);
        layer_ = h.layer;
        ip_.code = d;
        ip_.offset = h.entry;
        return Continue{};
    }

    if (trap.kind == TrapKindId::LinkFault) {
        TrapFrame& top = trap_frames_.back();
        if (native_link_resolution(top) == nullptr)
            return Halted{halt_code_};
        return apply_resume(ResumePolicy::Retry);
    }

    // UserTrap with no guest binding: built-in no-op handler
    return apply_resume(ResumePolicy::Next);
}

const Descriptor* Machine::native_link_resolution(TrapFrame& frame) {
    Layer from = frame.layer;
    // the resolution pipeline runs with Utilities (name lookup) then Kernel
    // (GST / Type Table) semantics; the transitions show up as GATE events
    if (from != Layer::Utilities)
        emit_gate("enter", from, Layer::Utilities, Suid{0});
    emit_gate("enter", Layer::Utilities, Layer::Kernel, Suid{0});
    const Descriptor* result = nullptr;
    LinkageInstance& inst = linkage_for(frame.process_id, frame.ip.code.suid);
    try {
        result = &resolve_slot(inst, frame.trap.slot);
    } catch (const CoreError&) {
        emit_gate("exit", Layer::Kernel, Layer::Utilities, Suid{0});
        if (from != Layer::Utilities)
            emit_gate("exit", Layer::Utilities, from, Suid{0});
        fatal("LinkUnresolvable", kExitLinkUnresolvable);
        return nullptr;
    }
    emit_gate("exit", Layer::Kernel, Layer::Utilities, Suid{0});
    if (from != Layer::Utilities)
        emit_gate("exit", Layer::Utilities, from, Suid{0});
    return result;
}

StepOutcome Machine::apply_resume(ResumePolicy policy) {
    TrapFrame frame = std::move(trap_frames_.back());
    trap_frames_.pop_back();
    acc_ = frame.acc;
    x_ = frame.x;
    flags_ = frame.flags;
    layer_ = frame.layer;
    process_id_ = frame.process_id;
    for (int i = 0; i < 3; ++i)
        if (stacks_[i].size() > frame.stack_depths[i])
            stacks_[i].resize(frame.stack_depths[i]);
    if (gate_stack_.size() > frame.gate_depth)
        gate_stack_.resize(frame.gate_depth);
    ip_ = frame.ip;
    if (policy == ResumePolicy::Next) ip_.offset += kInstructionSize;
    return Continue{};
}

TypeId Machine::scratch_type_for(TypeId code_type) {
    return ensure_scratch_type(tt, code_type);
}

LinkageInstance& Machine::linkage_for(std::uint64_t process_id, Suid code_suid) {
    auto key = std::make_pair(process_id, code_suid.value);
    auto it = linkages_.find(key);
    if (it != linkages_.end()) return it->second;

    LinkageTemplate tpl;  // segments without a template get scratch only
    if (auto t = templates.find(code_suid); t != templates.end()) tpl = t->second;

    LinkageInstance inst;
    inst.process_id = process_id;
    inst.code_suid = code_suid;

    // fresh scratch segment: new SUID, zero-filled, typed after the code type
    GstEntry code_entry = gst_lookup(gst, code_suid);
    Suid scratch{next_suid++};
    gst.add(GstEntry{scratch, tpl.scratch_size, scratch_type_for(code_entry.type_id)});
    store.bind(scratch, std::vector<std::uint8_t>(tpl.scratch_size, 0));

    inst.slots.push_back(build_descriptor(scratch, gst, tt));
    for (const std::string& sym : tpl.externs)
        inst.slots.push_back(SlotUnresolved{sym});

    return linkages_.emplace(key, std::move(inst)).first->second;
}

const Descriptor& Machine::resolve_slot(LinkageInstance& inst, std::size_t slot) {
    if (slot >= inst.slots.size())
        throw CoreError("slot index out of range");
    if (inst.resolved(slot)) return inst.descriptor(slot);
    std::string sym = inst.symbol(slot);
    Suid suid = names.lookup(sym);
    Descriptor d = build_descriptor(suid, gst, tt);
    inst.slots[slot] = d;
    emit(EventKind::Link, {{"slot", std::to_string(slot)},
                           {"sym", sym},
                           {"suid", hex_u64(d.suid.value)},
                           {"len", hex_u64(d.length)},
                           {"sperm", perm_string(d.perms.services)},
                           {"uperm", perm_string(d.perms.utilities)},
                           {"kperm", perm_string(d.perms.kernel)}});
    return inst.descriptor(slot);
}

void Machine::delete_segment(Suid suid) {
    gst.remove(suid);
    store.unbind(suid);
}

std::variant<Descriptor, StepOutcome> Machine::slot_descriptor(std::uint16_t slot) {
    LinkageInstance& inst = linkage_for(process_id_, ip_.code.suid);
    if (slot >= inst.slots.size()) return plain_fault(TrapKindId::IllegalOpcode);
    if (!inst.resolved(slot)) {
        Trap t;
        t.kind = TrapKindId::LinkFault;
        t.slot = slot;
        t.symbol = inst.symbol(slot);
        return dispatch(std::move(t));
    }
    return inst.descriptor(slot);
}

std::variant<std::uint64_t, StepOutcome> Machine::operand_value(
    const Instruction& ins) {
    if (ins.mode == AddrMode::Immediate)
        return static_cast<std::uint64_t>(ins.operand);
    auto sd = slot_descriptor(ins.operand);
    if (auto* out = std::get_if<StepOutcome>(&sd)) return *out;
    const Descriptor& d = std::get<Descriptor>(sd);
    std::uint64_t off = ins.mode == AddrMode::SlotIndexed ? x_ : 0;
    auto r = store.read_byte(d, off, layer_);
    if (auto* f = std::get_if<MemFault>(&r)) return mem_fault(*f);
    return static_cast<std::uint64_t>(std::get<std::uint8_t>(r));
}

StepOutcome Machine::step() {
    if (!runnable()) throw CoreError("machine is not runnable");
    ++step_count_;

    // fetch: execute permission at the current layer, bounds over the word
    if (ip_.offset % kInstructionSize != 0)
        return plain_fault(TrapKindId::IllegalOpcode);
    auto t = translate(ip_.code, ip_.offset, AccessKind::ExecuteFetch, layer_);
    if (auto* f = std::get_if<MemFault>(&t)) return mem_fault(*f);
    const auto& seg = store.bytes(ip_.code.suid);
    if (ip_.offset + 3 >= ip_.code.length || ip_.offset + 3 >= seg.size())
        return mem_fault(MemFault{MemFault::Kind::Bounds, ip_.code.suid,
                                  ip_.offset, AccessKind::ExecuteFetch, layer_});

    std::array<std::uint8_t, 4> word{seg[ip_.offset], seg[ip_.offset + 1],
                                     seg[ip_.offset + 2], seg[ip_.offset + 3]};
    auto ins = decode(word);
    if (!ins) {
        emit(EventKind::Step,
             {{"layer", std::string(1, layer_letter(layer_))},
              {"loc", segment_label(ip_.code.suid) + "+" + hex_u64(ip_.offset)},
              {"op", "?"},
              {"arg", ""}});
        return plain_fault(TrapKindId::IllegalOpcode);
    }
    emit_step(*ins);
    return execute(*ins);
}

StepOutcome Machine::execute(const Instruction& ins) {
    // restricted security instructions: Kernel only, checked before any
    // side effect
    if (is_restricted(ins.opcode) && layer_ != Layer::Kernel)
        return plain_fault(TrapKindId::Permission);

    auto advance = [&]() -> StepOutcome {
        ip_.offset += kInstructionSize;
        return Continue{};
    };

    switch (ins.opcode) {
    case Opcode::HALT:
        return halt_with(ins.operand);
    case Opcode::NOP:
        return advance();

    case Opcode::LDA: {
        if (ins.mode == AddrMode::None) {
            acc_ = x_;
        } else {
            auto v = operand_value(ins);
            if (auto* out = std::get_if<StepOutcome>(&v)) return *out;
            acc_ = std::get<std::uint64_t>(v);
        }
        set_flags(acc_);
        return advance();
    }
    case Opcode::STA: {
        auto sd = slot_descriptor(ins.operand);
        if (auto* out = std::get_if<StepOutcome>(&sd)) return *out;
        const Descriptor& d = std::get<Descriptor>(sd);
        std::uint64_t off = ins.mode == AddrMode::SlotIndexed ? x_ : 0;
        auto r = store.write_byte(d, off, static_cast<std::uint8_t>(acc_ & 0xFF),
                                  layer_);
        if (auto* f = std::get_if<MemFault>(&r)) return mem_fault(*f);
        return advance();
    }
    case Opcode::LDX:
        x_ = ins.mode == AddrMode::Immediate ? ins.operand : acc_;
        return advance();

    case Opcode::ADD:
    case Opcode::SUB:
    case Opcode::AND:
    case Opcode::OR:
    case Opcode::XOR:
    case Opcode::CMP:
    case Opcode::DIV: {
        auto v = operand_value(ins);
        if (auto* out = std::get_if<StepOutcome>(&v)) return *out;
        std::uint64_t value = std::get<std::uint64_t>(v);
        switch (ins.opcode) {
        case Opcode::ADD: acc_ += value; set_flags(acc_); break;
        case Opcode::SUB: acc_ -= value; set_flags(acc_); break;
        case Opcode::AND: acc_ &= value; set_flags(acc_); break;
        case Opcode::OR: acc_ |= value; set_flags(acc_); break;
        case Opcode::XOR: acc_ ^= value; set_flags(acc_); break;
        case Opcode::CMP: set_flags(acc_ - value); break;
        case Opcode::DIV:
            if (value == 0) return plain_fault(TrapKindId::DivideByZero);
            acc_ /= value;
            set_flags(acc_);
            break;
        default: break;
        }
        return advance();
    }

    case Opcode::JMP:
    case Opcode::BEQ:
    case Opcode::BNE:
    case Opcode::BLT:
    case Opcode::BGE: {
        if (ins.operand % kInstructionSize != 0)
            return plain_fault(TrapKindId::IllegalOpcode);
        bool taken = false;
        switch (ins.opcode) {
        case Opcode::JMP: taken = true; break;
        case Opcode::BEQ: taken = flags_.zero; break;
        case Opcode::BNE: taken = !flags_.zero; break;
        case Opcode::BLT: taken = flags_.negative; break;
        case Opcode::BGE: taken = !flags_.negative; break;
        default: break;
        }
        if (!taken) return advance();
        ip_.offset = ins.operand;
        return Continue{};
    }

    case Opcode::CALL: {
        auto sd = slot_descriptor(ins.operand);
        if (auto* out = std::get_if<StepOutcome>(&sd)) return *out;
        Descriptor d = std::get<Descriptor>(sd);
        std::uint64_t entry = ins.mode == AddrMode::SlotIndexed ? x_ : 0;
        auto t = translate(d, entry, AccessKind::ExecuteFetch, layer_);
        if (auto* f = std::get_if<MemFault>(&t)) return mem_fault(*f);
        auto& stack = stacks_[static_cast<int>(layer_)];
        if (stack.size() >= kMaxStackDepth)
            return plain_fault(TrapKindId::StackFault);
        stack.emplace_back(ip_.code, ip_.offset + kInstructionSize);
        ip_.code = d;
        ip_.offset = entry;
        return Continue{};
    }
    case Opcode::RET: {
        auto& stack = stacks_[static_cast<int>(layer_)];
        if (stack.empty()) return plain_fault(TrapKindId::StackFault);
        auto [code, off] = stack.back();
        stack.pop_back();
        ip_.code = code;
        ip_.offset = off;
        return Continue{};
    }

    case Opcode::ENTER: {
        if (ins.operand > 2) return plain_fault(TrapKindId::GateSequenceFault);
        Layer target = static_cast<Layer>(ins.operand);
        if (!ip_.code.gate_to.has_value() || *ip_.code.gate_to != target ||
            !directly_above(layer_, target))
            return plain_fault(TrapKindId::GateSequenceFault);
        gate_stack_.push_back(GateContext{layer_, target, ip_.code.suid});
        emit_gate("enter", layer_, target, ip_.code.suid);
        layer_ = target;
        return advance();
    }
    case Opcode::EXIT: {
        if (gate_stack_.empty() || gate_stack_.back().via != ip_.code.suid ||
            gate_stack_.back().target != layer_)
            return plain_fault(TrapKindId::GateSequenceFault);
        GateContext ctx = gate_stack_.back();
        gate_stack_.pop_back();
        emit_gate("exit", layer_, ctx.entered_from, ip_.code.suid);
        layer_ = ctx.entered_from;
        return advance();
    }

    case Opcode::TRAP: {
        Trap t;
        t.kind = TrapKindId::UserTrap;
        t.code = ins.operand;
        return dispatch(std::move(t));
    }
    case Opcode::RESUME: {
        if (!ip_.code.handler || trap_frames_.empty())
            return plain_fault(TrapKindId::GateSequenceFault);
        return apply_resume(resume_policy(trap_frames_.back().trap.kind));
    }

    case Opcode::IN: {
        if (input_pos_ < input.size()) {
            acc_ = input[input_pos_++];
            emit(EventKind::Io, {{"dir", "in"}, {"val", hex_u64(acc_)}});
        } else {
            acc_ = 0;
            emit(EventKind::Io, {{"dir", "in"}, {"eof", "1"}});
        }
        set_flags(acc_);
        return advance();
    }
    case Opcode::OUT: {
        std::uint8_t b = static_cast<std::uint8_t>(acc_ & 0xFF);
        output.push_back(b);
        emit(EventKind::Io, {{"dir", "out"}, {"val", hex_u64(b)}});
        return advance();
    }

    case Opcode::RESOLVE: {
        TrapFrame* frame = pending_link_fault();
        if (frame == nullptr) return plain_fault(TrapKindId::GateSequenceFault);
        LinkageInstance& inst =
            linkage_for(frame->process_id, frame->ip.code.suid);
        try {
            resolve_slot(inst, frame->trap.slot);
        } catch (const CoreError&) {
            return fatal("LinkUnresolvable", kExitLinkUnresolvable);
        }
        return advance();
    }
    case Opcode::SEGLEN: {
        auto sd = slot_descriptor(ins.operand);
        if (auto* out = std::get_if<StepOutcome>(&sd)) return *out;
        Descriptor d = std::get<Descriptor>(sd);
        if (ins.mode == AddrMode::SlotDirect) {
            acc_ = d.length;
        } else {
            // resize through the Kernel path; the slot gets a fresh
            // descriptor so its length stays current
            store.resize(gst, d.suid, x_, true);
            LinkageInstance& inst = linkage_for(process_id_, ip_.code.suid);
            inst.slots[ins.operand] = build_descriptor(d.suid, gst, tt);
            acc_ = x_;
        }
        set_flags(acc_);
        return advance();
    }
    case Opcode::ALARM:
        emit(EventKind::Alarm, {{"kind", "Operator"},
                                {"suid", hex_u64(ip_.code.suid.value)},
                                {"off", hex_u64(ip_.offset)},
                                {"access", "-"},
                                {"layer", std::string(1, layer_letter(layer_))},
                                {"code", std::to_string(ins.operand)}});
        return advance();
    case Opcode::LOGEV:
        emit(EventKind::Io, {{"dir", "log"}, {"val", hex_u64(ins.operand)}});
        return advance();
    }
    return plain_fault(TrapKindId::IllegalOpcode);
}

RunResult Machine::run(std::uint64_t max_steps) {
    if (max_steps == 0) throw CoreError("max_steps must be positive");
    RunResult r;
    while (r.steps < max_steps) {
        StepOutcome out = step();
        ++r.steps;
        if (auto* h = std::get_if<Halted>(&out)) {
            r.status = RunStatus::Halted;
            r.exit_code = h->code;
            return r;
        }
    }
    r.status = RunStatus::BudgetExceeded;
    r.exit_code = kExitBudgetExceeded;
    return r;
}

}  // namespace gvm
