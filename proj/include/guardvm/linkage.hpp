// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "guardvm/core.hpp"

namespace gvm {

constexpr std::uint64_t kDefaultScratchSize = 256;

/// Produced by the assembler, immutable. Slot 0 is the scratch declaration;
/// slots 1..n carry the extern symbols in declaration order.
struct LinkageTemplate {
    std::uint64_t scratch_size = kDefaultScratchSize;
    std::vector<std::string> externs;  // slot i+1 = externs[i]

    std::size_t slot_count() const { return externs.size() + 1; }

    friend bool operator==(const LinkageTemplate&, const LinkageTemplate&) = default;
};

struct SlotUnresolved {
    std::string symbol;
};
using Slot = std::variant<SlotUnresolved, Descriptor>;

/// The per-(process, code segment) copy of a template. Slots move from
/// Unresolved to Resolved at most once; slot 0 is resolved to a fresh
/// scratch segment at instantiation.
struct LinkageInstance {
    std::uint64_t process_id = 0;
    Suid code_suid;
    std::vector<Slot> slots;

    bool resolved(std::size_t index) const {
        return std::holds_alternative<Descriptor>(slots.at(index));
    }
    const Descriptor& descriptor(std::size_t index) const {
        return std::get<Descriptor>(slots.at(index));
    }
    const std::string& symbol(std::size_t index) const {
        return std::get<SlotUnresolved>(slots.at(index)).symbol;
    }
};

}  // namespace gvm
