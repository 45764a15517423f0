// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gvm::harness {

struct ScenarioResult {
    std::string name;
    int exit_code = 0;
    std::string trace;
};

struct ScenarioCheck {
    std::string name;
    bool matched = false;
    std::string message;
};

std::vector<std::string> scenario_names();

/// Builds the named demo image, runs it and returns the serialized trace.
/// Deterministic: repeated runs yield identical text.
ScenarioResult run_scenario(const std::string& name);

/// Compares every scenario trace against its golden file; with `regen` the
/// files are rewritten instead.
std::vector<ScenarioCheck> check_scenarios(bool regen);

/// The canonical packet stream used by the filter demo: `count` packets of
/// the form [length, payload...] followed by a zero terminator.
std::vector<std::uint8_t> demo_packets(int count);

/// Host-side reference for the filter: one verdict byte per packet,
/// 1 to pass, 0 to drop.
std::vector<std::uint8_t> reference_filter(const std::vector<std::uint8_t>& stream);

/// Runs the filter demo image over `stream` and returns its verdict bytes.
std::vector<std::uint8_t> run_filter(const std::vector<std::uint8_t>& stream);

}  // namespace gvm::harness
