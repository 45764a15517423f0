// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <vector>

namespace gvm::harness {

/// Program setup for the reference interpreter: one Services-layer code
/// segment with a scratch slot (0) and one read-only data slot (1).
struct ShadowConfig {
    std::vector<std::uint8_t> code;
    std::vector<std::uint8_t> data;
    std::vector<std::uint8_t> input;
    std::uint64_t scratch_size = 16;
    std::uint64_t max_steps = 4096;
};

struct ShadowResult {
    bool budget_exceeded = false;
    int exit_code = 0;
    std::uint64_t steps = 0;
    std::uint64_t acc = 0;
    std::uint64_t x = 0;
    std::vector<std::uint8_t> data;
    std::vector<std::uint8_t> scratch;
    std::vector<std::uint8_t> output;
};

/// Minimal stand-alone interpreter for the single-layer instruction subset.
/// Written against the documented semantics only; shares no code with the
/// production machine, so the two can check each other.
ShadowResult shadow_run(const ShadowConfig& cfg);

}  // namespace gvm::harness
