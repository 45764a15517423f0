// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvm {

/// Segment unique identifier. Never reused within one VM lifetime.
struct Suid {
    std::uint64_t value = 0;

    friend auto operator<=>(const Suid&, const Suid&) = default;
};

constexpr std::uint64_t kFirstSuid = 0x1000;

/// The three software layers. The Instruction Layer is the machine itself,
/// not a value of this type. Order for dependency checks: Services above
/// Utilities above Kernel.
enum class Layer : std::uint8_t {
    Services = 0,
    Utilities = 1,
    Kernel = 2,
};

inline char layer_letter(Layer l) {
    switch (l) {
    case Layer::Services: return 'S';
    case Layer::Utilities: return 'U';
    case Layer::Kernel: return 'K';
    }
    return '?';
}

std::optional<Layer> layer_from_letter(char c);

/// Lowercase 0x-prefixed hex, no padding. Used for all hex in traces and images.
std::string hex_u64(std::uint64_t v);

/// True if `a` sits directly above `b` in the hierarchy (S above U, U above K).
inline bool directly_above(Layer a, Layer b) {
    return static_cast<int>(b) == static_cast<int>(a) + 1;
}

struct PermSet {
    bool read = false;
    bool write = false;
    bool execute = false;
    bool append = false;  // reserved: parsed, never granted

    friend bool operator==(const PermSet&, const PermSet&) = default;
};

/// Renders "rwx" style triple; append is intentionally not shown.
std::string perm_string(const PermSet& p);
std::optional<PermSet> perms_from_string(const std::string& s);

struct LayerPerms {
    PermSet services;
    PermSet utilities;
    PermSet kernel;

    const PermSet& at(Layer l) const {
        switch (l) {
        case Layer::Services: return services;
        case Layer::Utilities: return utilities;
        case Layer::Kernel: return kernel;
        }
        return kernel;
    }
    PermSet& at(Layer l) {
        return const_cast<PermSet&>(static_cast<const LayerPerms&>(*this).at(l));
    }

    friend bool operator==(const LayerPerms&, const LayerPerms&) = default;
};

/// The tagged intermediary on every address path. Permissions come from the
/// Type Table at construction time and are never hand-edited afterwards.
struct Descriptor {
    Suid suid;
    std::uint64_t length = 0;
    LayerPerms perms;
    std::optional<Layer> gate_to;
    bool handler = false;

    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

using TypeId = std::uint32_t;

struct TypeEntry {
    TypeId type_id = 0;
    std::string name;
    LayerPerms perms;
    std::optional<Layer> gate_to;
    bool handler = false;
};

struct GstEntry {
    Suid suid;
    std::uint64_t length = 0;
    TypeId type_id = 0;
};

struct CoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownSuid : CoreError {
    explicit UnknownSuid(Suid s);
    Suid suid;
};
struct UnknownType : CoreError {
    explicit UnknownType(TypeId t);
    TypeId type_id;
};

/// Type -> per-layer permissions; the single source of permissions in an image.
class TypeTable {
public:
    TypeId add(TypeEntry entry);  // assigns type_id if 0 and name is new
    const TypeEntry& entry(TypeId id) const;
    const TypeEntry* find_by_name(const std::string& name) const;
    const std::map<TypeId, TypeEntry>& entries() const { return entries_; }

private:
    std::map<TypeId, TypeEntry> entries_;
    TypeId next_id_ = 1;
};

/// Authoritative SUID -> (length, type) map.
class GlobalSegmentTable {
public:
    void add(GstEntry entry);                 // throws on duplicate suid
    void remove(Suid suid);                   // throws UnknownSuid
    void set_length(Suid suid, std::uint64_t len);
    const GstEntry* find(Suid suid) const;
    const std::map<Suid, GstEntry>& entries() const { return entries_; }

private:
    std::map<Suid, GstEntry> entries_;
};

GstEntry gst_lookup(const GlobalSegmentTable& gst, Suid suid);
PermSet type_permissions(const TypeTable& tt, TypeId type_id, Layer layer);

/// Composes a full Descriptor from the GST and Type Table. Deterministic:
/// (suid, gst length, type perms, gate_to, handler).
Descriptor build_descriptor(Suid suid, const GlobalSegmentTable& gst, const TypeTable& tt);

/// Finds or interns the scratch type paired with a code type: read+write in
/// every layer the code type can execute in (including a gate's target
/// layer), nothing anywhere else. Named "scratch$<code type>".
TypeId ensure_scratch_type(TypeTable& tt, TypeId code_type);

}  // namespace gvm
