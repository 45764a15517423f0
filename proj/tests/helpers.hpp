// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <string>
#include <vector>

#include "guardvm/machine.hpp"

namespace gvm::test {

inline PermSet P(const char* s) { return *perms_from_string(s); }

/// Hand-assembles machines for unit tests without going through the image
/// toolchain, so each module can be exercised in isolation.
struct MachineBuilder {
    Machine m;
    std::uint64_t next = kFirstSuid;

    TypeId add_type(const std::string& name, const char* s, const char* u,
                    const char* k, std::optional<Layer> gate_to = std::nullopt,
                    bool handler = false) {
        TypeEntry e;
        e.name = name;
        e.perms = {P(s), P(u), P(k)};
        e.gate_to = gate_to;
        e.handler = handler;
        return m.tt.add(std::move(e));
    }

    Suid add_code(const std::string& name, TypeId type,
                  const std::vector<Instruction>& code,
                  const std::vector<std::string>& externs = {},
                  std::uint64_t scratch = 16) {
        std::vector<std::uint8_t> bytes;
        for (const Instruction& ins : code) {
            auto w = encode(ins);
            bytes.insert(bytes.end(), w.begin(), w.end());
        }
        return add_raw(name, type, std::move(bytes), true, externs, scratch);
    }

    Suid add_data(const std::string& name, TypeId type,
                  std::vector<std::uint8_t> bytes) {
        return add_raw(name, type, std::move(bytes), false, {}, 0);
    }

    Suid add_raw(const std::string& name, TypeId type,
                 std::vector<std::uint8_t> bytes, bool with_template,
                 const std::vector<std::string>& externs, std::uint64_t scratch) {
        Suid suid{next++};
        m.gst.add(GstEntry{suid, bytes.size(), type});
        m.names.bind(name, suid);
        m.store.bind(suid, std::move(bytes));
        if (with_template) {
            LinkageTemplate tpl;
            tpl.scratch_size = scratch;
            tpl.externs = externs;
            m.templates[suid] = tpl;
        }
        return suid;
    }

    Machine start(const std::string& entry, std::uint64_t offset = 0) {
        m.next_suid = next;
        m.start(m.names.lookup(entry), offset);
        return std::move(m);
    }
};

inline Instruction I(Opcode op, AddrMode mode, std::uint16_t operand = 0) {
    return Instruction{op, mode, operand};
}
inline Instruction imm(Opcode op, std::uint16_t v) {
    return I(op, AddrMode::Immediate, v);
}
inline Instruction slotx(Opcode op, std::uint16_t slot) {
    return I(op, AddrMode::SlotIndexed, slot);
}
inline Instruction slot(Opcode op, std::uint16_t s) {
    return I(op, AddrMode::SlotDirect, s);
}
inline Instruction none(Opcode op, std::uint16_t operand = 0) {
    return I(op, AddrMode::None, operand);
}

/// Events of one kind, in order.
inline std::vector<Event> events_of(const Machine& m, EventKind kind) {
    std::vector<Event> out;
    for (const Event& e : m.log().events())
        if (e.kind == kind) out.push_back(e);
    return out;
}

}  // namespace gvm::test
