// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guardvm/isa.hpp"
#include "guardvm/linkage.hpp"

namespace gvm {

struct Diagnostic {
    int line = 0;
    std::string message;
};

/// One assembled source unit: an object segment plus its linkage template.
/// Data segments (assembled from .byte lines) carry no template.
struct ObjectUnit {
    std::string name;
    std::string type_name;
    bool is_code = true;
    std::vector<std::uint8_t> bytes;
    LinkageTemplate tmpl;
    std::map<std::string, std::uint64_t> labels;
};

struct AsmResult {
    std::optional<ObjectUnit> unit;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return unit.has_value(); }
};

/// Two-pass assembly. Pass 1 collects labels and externs (slot 0 is the
/// scratch declaration, externs number 1..n in declaration order); pass 2
/// encodes. Deterministic: identical source yields identical bytes.
AsmResult assemble(const std::string& source);

/// Canonical text: externs in slot order, labels synthesized as L_<offset>
/// for branch targets, unknown words rendered as .word (lossless).
std::string disassemble(const ObjectUnit& unit);

/// .gobj textual object format; bit-exact round trip.
std::string serialize_object(const ObjectUnit& unit);
ObjectUnit parse_object(const std::string& text);  // throws CoreError

}  // namespace gvm
