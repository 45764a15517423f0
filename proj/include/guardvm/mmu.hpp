// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "guardvm/core.hpp"

namespace gvm {

enum class AccessKind : std::uint8_t { Read, Write, ExecuteFetch };

char access_letter(AccessKind a);

/// A failed mediation. Carries enough to render one trace line losslessly.
struct MemFault {
    enum class Kind : std::uint8_t { Bounds, Permission };
    Kind kind = Kind::Bounds;
    Suid suid;
    std::uint64_t offset = 0;
    AccessKind access = AccessKind::Read;
    Layer layer = Layer::Services;
};

/// Bounds first, then permission; at most one fault. A gate segment is
/// fetchable in its gate_to layer even without an execute grant there, so
/// that gate code keeps running after it switches the Layer Register.
std::variant<std::monostate, MemFault> translate(const Descriptor& d,
                                                 std::uint64_t offset,
                                                 AccessKind access,
                                                 Layer layer);

struct DuplicateSuid : CoreError {
    using CoreError::CoreError;
};
struct NotKernel : CoreError {
    using CoreError::CoreError;
};

/// Owns the physical bytes of every live segment. Stored lengths track GST
/// lengths at all times; resize goes through the Kernel path only.
class SegmentStore {
public:
    void bind(Suid suid, std::vector<std::uint8_t> bytes);  // DuplicateSuid
    void unbind(Suid suid);                                 // UnknownSuid
    bool bound(Suid suid) const;
    const std::vector<std::uint8_t>& bytes(Suid suid) const;  // UnknownSuid
    std::vector<std::uint8_t>& bytes_mut(Suid suid);

    /// Grow zero-fills, shrink truncates. Store and GST update together.
    void resize(GlobalSegmentTable& gst, Suid suid, std::uint64_t new_length,
                bool kernel_path);

    std::variant<std::uint8_t, MemFault> read_byte(const Descriptor& d,
                                                   std::uint64_t offset,
                                                   Layer layer) const;
    std::variant<std::monostate, MemFault> write_byte(const Descriptor& d,
                                                      std::uint64_t offset,
                                                      std::uint8_t value,
                                                      Layer layer);

    const std::map<Suid, std::vector<std::uint8_t>>& segments() const {
        return segments_;
    }

private:
    std::map<Suid, std::vector<std::uint8_t>> segments_;
};

}  // namespace gvm
