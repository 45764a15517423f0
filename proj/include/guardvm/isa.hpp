// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "guardvm/core.hpp"

namespace gvm {

enum class Opcode : std::uint8_t {
    HALT = 0x00,
    NOP = 0x01,
    LDA = 0x10,
    STA = 0x11,
    LDX = 0x12,
    ADD = 0x20,
    SUB = 0x21,
    AND = 0x22,
    OR = 0x23,
    XOR = 0x24,
    CMP = 0x25,
    DIV = 0x26,
    JMP = 0x30,
    BEQ = 0x31,
    BNE = 0x32,
    BLT = 0x33,
    BGE = 0x34,
    CALL = 0x40,
    RET = 0x41,
    ENTER = 0x42,
    EXIT = 0x43,
    TRAP = 0x50,
    RESUME = 0x51,
    IN = 0x60,
    OUT = 0x61,
    RESOLVE = 0x70,
    SEGLEN = 0x71,
    ALARM = 0x72,
    LOGEV = 0x73,
};

/// Opcodes 0x70-0x7F are the restricted security instructions; only the
/// Kernel may execute them.
inline bool is_restricted(Opcode op) {
    return (static_cast<std::uint8_t>(op) & 0xF0) == 0x70;
}

enum class AddrMode : std::uint8_t {
    Immediate = 0,    // operand is the value
    SlotIndexed = 1,  // effective address = (slot descriptor, offset X)
    SlotDirect = 2,   // effective address = (slot descriptor, offset 0)
    None = 3,
};

/// Fixed 4-byte encoding: opcode, mode, operand little-endian.
struct Instruction {
    Opcode opcode = Opcode::NOP;
    AddrMode mode = AddrMode::None;
    std::uint16_t operand = 0;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

constexpr std::size_t kInstructionSize = 4;

const char* mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(const std::string& m);

/// True iff (opcode, mode) is in the legal table. None-mode instructions
/// other than HALT also require operand == 0 to keep the encoding bijective.
bool mode_legal(Opcode op, AddrMode mode);

std::array<std::uint8_t, 4> encode(const Instruction& ins);

/// Decodes one word; nullopt means IllegalOpcode (unknown opcode, illegal
/// mode, or nonzero operand where the mode forbids one).
std::optional<Instruction> decode(const std::array<std::uint8_t, 4>& word);

/// Human-readable operand part for traces ("#7", "slot2,X", "slot2", "").
std::string operand_text(const Instruction& ins);

}  // namespace gvm
