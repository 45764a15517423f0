// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <string>
#include <vector>

namespace gvm::harness {

struct MatrixReport {
    int cases = 0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// Exhaustive translate() check: every permission-bit combination, at every
/// layer, for every access kind (8 x 3 x 3 = 72 cases), judged against an
/// independent set-membership oracle.
MatrixReport check_permission_matrix();

/// Bounds behaviour at the edge offsets 0, len-1, len, len+1 and 2^64-1,
/// plus the empty segment.
MatrixReport check_boundary_offsets();

}  // namespace gvm::harness
