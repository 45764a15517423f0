// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/isa.hpp"

namespace gvm {

namespace {

struct OpInfo {
    Opcode op;
    const char* name;
    // legal modes
    bool imm, slot_indexed, slot_direct, none;
};

// LDA/LDX in None mode are the register transfers acc=X / X=acc.
// SEGLEN reads a length in SlotDirect mode and resizes to X in SlotIndexed.
constexpr OpInfo kOps[] = {
    {Opcode::HALT, "HALT", false, false, false, true},
    {Opcode::NOP, "NOP", false, false, false, true},
    {Opcode::LDA, "LDA", true, true, true, true},
    {Opcode::STA, "STA", false, true, true, false},
    {Opcode::LDX, "LDX", true, false, false, true},
    {Opcode::ADD, "ADD", true, true, true, false},
    {Opcode::SUB, "SUB", true, true, true, false},
    {Opcode::AND, "AND", true, true, true, false},
    {Opcode::OR, "OR", true, true, true, false},
    {Opcode::XOR, "XOR", true, true, true, false},
    {Opcode::CMP, "CMP", true, true, true, false},
    {Opcode::DIV, "DIV", true, true, true, false},
    {Opcode::JMP, "JMP", true, false, false, false},
    {Opcode::BEQ, "BEQ", true, false, false, false},
    {Opcode::BNE, "BNE", true, false, false, false},
    {Opcode::BLT, "BLT", true, false, false, false},
    {Opcode::BGE, "BGE", true, false, false, false},
    {Opcode::CALL, "CALL", false, true, true, false},
    {Opcode::RET, "RET", false, false, false, true},
    {Opcode::ENTER, "ENTER", true, false, false, false},
    {Opcode::EXIT, "EXIT", false, false, false, true},
    {Opcode::TRAP, "TRAP", true, false, false, false},
    {Opcode::RESUME, "RESUME", false, false, false, true},
    {Opcode::IN, "IN", false, false, false, true},
    {Opcode::OUT, "OUT", false, false, false, true},
    {Opcode::RESOLVE, "RESOLVE", false, false, false, true},
    {Opcode::SEGLEN, "SEGLEN", false, true, true, false},
    {Opcode::ALARM, "ALARM", true, false, false, false},
    {Opcode::LOGEV, "LOGEV", true, false, false, false},
};

const OpInfo* info(Opcode op) {
    for (const OpInfo& i : kOps)
        if (i.op == op) return &i;
    return nullptr;
}

}  // namespace

const char* mnemonic(Opcode op) {
    const OpInfo* i = info(op);
    return i ? i->name : "?";
}

std::optional<Opcode> opcode_from_mnemonic(const std::string& m) {
    for (const OpInfo& i : kOps)
        if (m == i.name) return i.op;
    return std::nullopt;
}

bool mode_legal(Opcode op, AddrMode mode) {
    const OpInfo* i = info(op);
    if (i == nullptr) return false;
    switch (mode) {
    case AddrMode::Immediate: return i->imm;
    case AddrMode::SlotIndexed: return i->slot_indexed;
    case AddrMode::SlotDirect: return i->slot_direct;
    case AddrMode::None: return i->none;
    }
    return false;
}

std::array<std::uint8_t, 4> encode(const Instruction& ins) {
    return {static_cast<std::uint8_t>(ins.opcode),
            static_cast<std::uint8_t>(ins.mode),
            static_cast<std::uint8_t>(ins.operand & 0xFF),
            static_cast<std::uint8_t>(ins.operand >> 8)};
}

std::optional<Instruction> decode(const std::array<std::uint8_t, 4>& word) {
    if (word[1] > static_cast<std::uint8_t>(AddrMode::None)) return std::nullopt;
    Instruction ins;
    ins.opcode = static_cast<Opcode>(word[0]);
    ins.mode = static_cast<AddrMode>(word[1]);
    ins.operand = static_cast<std::uint16_t>(word[2] | (word[3] << 8));
    if (!mode_legal(ins.opcode, ins.mode)) return std::nullopt;
    // None-mode operands are dead except for HALT's exit code; reject nonzero
    // ones so encode/decode stays a bijection over legal words.
    if (ins.mode == AddrMode::None && ins.opcode != Opcode::HALT && ins.operand != 0)
        return std::nullopt;
    return ins;
}

std::string operand_text(const Instruction& ins) {
    switch (ins.mode) {
    case AddrMode::Immediate: return "#" + std::to_string(ins.operand);
    case AddrMode::SlotIndexed: return "slot" + std::to_string(ins.operand) + ",X";
    case AddrMode::SlotDirect: return "slot" + std::to_string(ins.operand);
    case AddrMode::None:
        return ins.opcode == Opcode::HALT ? "#" + std::to_string(ins.operand) : "";
    }
    return "";
}

}  // namespace gvm
