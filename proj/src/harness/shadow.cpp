// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/harness/shadow.hpp"

namespace gvm::harness {

namespace {

// exit codes, restated from the architecture manual rather than shared
constexpr int kBounds = 64;
constexpr int kPermission = 65;
constexpr int kIllegal = 66;
constexpr int kDivZero = 67;
constexpr int kStack = 68;
constexpr int kGateSeq = 69;
constexpr int kBudget = 63;

enum Mode { kImm = 0, kSlotX = 1, kSlot = 2, kNone = 3 };

bool legal_mode(std::uint8_t op, std::uint8_t mode) {
    switch (op) {
    case 0x00: return mode == kNone;                     // HALT
    case 0x01: return mode == kNone;                     // NOP
    case 0x10: return true;                              // LDA
    case 0x11: return mode == kSlotX || mode == kSlot;   // STA
    case 0x12: return mode == kImm || mode == kNone;     // LDX
    case 0x20: case 0x21: case 0x22: case 0x23:
    case 0x24: case 0x25: case 0x26:                     // ADD..DIV
        return mode != kNone;
    case 0x30: case 0x31: case 0x32: case 0x33: case 0x34:  // JMP..BGE
        return mode == kImm;
    case 0x40: return mode == kSlotX || mode == kSlot;   // CALL
    case 0x41: return mode == kNone;                     // RET
    case 0x42: return mode == kImm;                      // ENTER
    case 0x43: return mode == kNone;                     // EXIT
    case 0x50: return mode == kImm;                      // TRAP
    case 0x51: return mode == kNone;                     // RESUME
    case 0x60: return mode == kNone;                     // IN
    case 0x61: return mode == kNone;                     // OUT
    case 0x70: return mode == kNone;                     // RESOLVE
    case 0x71: return mode == kSlotX || mode == kSlot;   // SEGLEN
    case 0x72: return mode == kImm;                      // ALARM
    case 0x73: return mode == kImm;                      // LOGEV
    default: return false;
    }
}

}  // namespace

ShadowResult shadow_run(const ShadowConfig& cfg) {
    ShadowResult r;
    r.data = cfg.data;
    r.scratch.assign(cfg.scratch_size, 0);

    std::uint64_t pc = 0;
    bool zf = false, nf = false;
    std::size_t inpos = 0;
    bool done = false;

    auto flags = [&](std::uint64_t v) {
        zf = v == 0;
        nf = (v >> 63) != 0;
    };
    auto halt = [&](int code) {
        r.exit_code = code;
        done = true;
    };
    // -1 = fault already signalled, otherwise the slot byte count
    auto slot_len = [&](std::uint16_t slot) -> std::int64_t {
        if (slot == 0) return static_cast<std::int64_t>(r.scratch.size());
        if (slot == 1) return static_cast<std::int64_t>(r.data.size());
        halt(kIllegal);
        return -1;
    };

    while (!done) {
        if (r.steps >= cfg.max_steps) {
            r.budget_exceeded = true;
            r.exit_code = kBudget;
            break;
        }
        ++r.steps;

        if (pc % 4 != 0) { halt(kIllegal); break; }
        if (pc + 3 >= cfg.code.size()) { halt(kBounds); break; }
        std::uint8_t op = cfg.code[pc];
        std::uint8_t mode = cfg.code[pc + 1];
        std::uint16_t opnd = static_cast<std::uint16_t>(cfg.code[pc + 2] |
                                                        (cfg.code[pc + 3] << 8));
        if (mode > 3 || !legal_mode(op, mode) ||
            (mode == kNone && op != 0x00 && opnd != 0)) {
            halt(kIllegal);
            break;
        }
        if ((op & 0xF0) == 0x70) { halt(kPermission); break; }

        // a slot operand read; returns false after signalling a fault
        std::uint64_t value = 0;
        auto read_operand = [&]() -> bool {
            if (mode == kImm) { value = opnd; return true; }
            std::int64_t len = slot_len(opnd);
            if (len < 0) return false;
            std::uint64_t off = mode == kSlotX ? r.x : 0;
            if (off >= static_cast<std::uint64_t>(len)) { halt(kBounds); return false; }
            value = opnd == 0 ? r.scratch[off] : r.data[off];
            return true;
        };

        switch (op) {
        case 0x00:
            halt(opnd);
            break;
        case 0x01:
            pc += 4;
            break;
        case 0x10:  // LDA
            if (mode == kNone) value = r.x;
            else if (!read_operand()) break;
            r.acc = value;
            flags(r.acc);
            pc += 4;
            break;
        case 0x11: {  // STA
            std::int64_t len = slot_len(opnd);
            if (len < 0) break;
            std::uint64_t off = mode == kSlotX ? r.x : 0;
            if (off >= static_cast<std::uint64_t>(len)) { halt(kBounds); break; }
            if (opnd != 0) { halt(kPermission); break; }  // data is read-only here
            r.scratch[off] = static_cast<std::uint8_t>(r.acc & 0xFF);
            pc += 4;
            break;
        }
        case 0x12:  // LDX
            r.x = mode == kImm ? opnd : r.acc;
            pc += 4;
            break;
        case 0x20: case 0x21: case 0x22: case 0x23:
        case 0x24: case 0x25: case 0x26: {
            if (!read_operand()) break;
            switch (op) {
            case 0x20: r.acc += value; flags(r.acc); break;
            case 0x21: r.acc -= value; flags(r.acc); break;
            case 0x22: r.acc &= value; flags(r.acc); break;
            case 0x23: r.acc |= value; flags(r.acc); break;
            case 0x24: r.acc ^= value; flags(r.acc); break;
            case 0x25: flags(r.acc - value); break;
            case 0x26:
                if (value == 0) { halt(kDivZero); break; }
                r.acc /= value;
                flags(r.acc);
                break;
            }
            if (!done) pc += 4;
            break;
        }
        case 0x30: case 0x31: case 0x32: case 0x33: case 0x34: {
            if (opnd % 4 != 0) { halt(kIllegal); break; }
            bool taken = op == 0x30 || (op == 0x31 && zf) || (op == 0x32 && !zf) ||
                         (op == 0x33 && nf) || (op == 0x34 && !nf);
            pc = taken ? opnd : pc + 4;
            break;
        }
        case 0x40: {  // CALL: neither scratch nor data is executable
            std::int64_t len = slot_len(opnd);
            if (len < 0) break;
            std::uint64_t entry = mode == kSlotX ? r.x : 0;
            halt(entry >= static_cast<std::uint64_t>(len) ? kBounds : kPermission);
            break;
        }
        case 0x41:
            halt(kStack);
            break;
        case 0x42: case 0x43: case 0x51:
            halt(kGateSeq);
            break;
        case 0x50:  // TRAP: built-in handler is a no-op, resume at next
            pc += 4;
            break;
        case 0x60:
            r.acc = inpos < cfg.input.size() ? cfg.input[inpos++] : 0;
            flags(r.acc);
            pc += 4;
            break;
        case 0x61:
            r.output.push_back(static_cast<std::uint8_t>(r.acc & 0xFF));
            pc += 4;
            break;
        default:
            halt(kIllegal);
            break;
        }
    }
    return r;
}

}  // namespace gvm::harness
