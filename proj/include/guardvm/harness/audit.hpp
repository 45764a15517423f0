// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <string>
#include <vector>

#include "guardvm/event.hpp"

namespace gvm::harness {

struct AuditReport {
    std::vector<std::string> problems;

    bool ok() const { return problems.empty(); }
};

/// Structural checks over a run trace:
///  - at most one HALT, and nothing after it
///  - every FAULT is immediately followed by a TRAP of the same kind, and
///    the error path ends ALARM then HALT
///  - every LINK answers an outstanding LinkFault for its (slot, sym)
///  - GATE events nest properly and move exactly one layer at a time
AuditReport audit_trace(const std::vector<Event>& events);

}  // namespace gvm::harness
