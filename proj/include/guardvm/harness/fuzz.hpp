// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "guardvm/harness/shadow.hpp"

namespace gvm::harness {

struct FuzzOptions {
    std::uint64_t seed = 42;
    int count = 10000;
    std::uint64_t max_steps = 4096;
};

struct FuzzMismatch {
    int index = 0;
    std::string detail;
};

struct FuzzReport {
    int programs = 0;
    int mismatch_count = 0;
    std::vector<FuzzMismatch> samples;  // first few, for diagnosis

    bool ok() const { return mismatch_count == 0; }
};

/// One random program setup drawn from the differential-testing subset.
ShadowConfig fuzz_case(std::mt19937_64& rng);

/// Runs `count` random programs on both interpreters and compares exit code,
/// registers, memory and output. Every trace also goes through the auditor.
FuzzReport run_fuzz(const FuzzOptions& options);

}  // namespace gvm::harness
