// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guardvm/assembler.hpp"
#include "guardvm/machine.hpp"

namespace gvm {

struct ManifestType {
    std::string name;
    LayerPerms perms;
    std::optional<Layer> gate_to;
    bool handler = false;
    bool append_granted = false;  // build-time error if set
};

struct ManifestSegment {
    enum class Source : std::uint8_t { Asm, Data, Size };
    std::string name;
    std::string type_name;
    Source source = Source::Data;
    std::string asm_file;             // Source::Asm
    std::vector<std::uint8_t> data;   // Source::Data
    std::uint64_t size = 0;           // Source::Size
};

struct ManifestTrap {
    TrapKindId kind = TrapKindId::UserTrap;
    std::string segment;
    std::string label;
    Layer layer = Layer::Utilities;
};

struct Manifest {
    std::string name;
    std::vector<ManifestType> types;
    std::vector<ManifestSegment> segments;
    std::vector<ManifestTrap> traps;
    std::string entry_segment;
    std::string entry_label;
};

/// A fully built, self-consistent Guard image. Serializes deterministically.
struct GuardImage {
    std::string name;
    TypeTable tt;
    GlobalSegmentTable gst;
    NameTable names;
    std::map<Suid, std::vector<std::uint8_t>> segments;
    std::map<Suid, LinkageTemplate> templates;
    std::map<TrapKindId, GuestHandler> guest_handlers;
    Suid entry_segment;
    std::uint64_t entry_offset = 0;
};

struct BuildError : CoreError {
    using CoreError::CoreError;
};

Manifest parse_manifest(const std::string& text);  // throws BuildError

/// Deterministic build: SUIDs assigned sequentially from 0x1000 in segment
/// declaration order. `units` supplies the assembled object for every
/// `asm=` segment, matched by name.
GuardImage build_image(const Manifest& manifest, const std::vector<ObjectUnit>& units);

/// Reads a manifest from disk and assembles every asm= segment, resolving
/// source paths relative to the manifest's directory.
GuardImage build_image_from_file(const std::string& manifest_path);

std::string serialize_image(const GuardImage& image);
GuardImage parse_image(const std::string& text);  // throws BuildError

Machine load_image(const GuardImage& image);

/// Administrative install of a new segment under `name` (hot swap path).
Suid image_bind_object(GuardImage& image, const std::string& name,
                       const ObjectUnit& unit, const std::string& type_name);

}  // namespace gvm
