// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/mmu.hpp"

namespace gvm {

char access_letter(AccessKind a) {
    switch (a) {
    case AccessKind::Read: return 'R';
    case AccessKind::Write: return 'W';
    case AccessKind::ExecuteFetch: return 'X';
    }
    return '?';
}

std::variant<std::monostate, MemFault> translate(const Descriptor& d,
                                                 std::uint64_t offset,
                                                 AccessKind access,
                                                 Layer layer) {
    if (offset >= d.length)
        return MemFault{MemFault::Kind::Bounds, d.suid, offset, access, layer};
    const PermSet& p = d.perms.at(layer);
    bool ok = false;
    switch (access) {
    case AccessKind::Read: ok = p.read; break;
    case AccessKind::Write: ok = p.write; break;
    case AccessKind::ExecuteFetch:
        ok = p.execute || (d.gate_to.has_value() && *d.gate_to == layer);
        break;
    }
    if (!ok)
        return MemFault{MemFault::Kind::Permission, d.suid, offset, access, layer};
    return std::monostate{};
}

void SegmentStore::bind(Suid suid, std::vector<std::uint8_t> bytes) {
    if (segments_.contains(suid))
        throw DuplicateSuid("segment already bound: " + hex_u64(suid.value));
    segments_.emplace(suid, std::move(bytes));
}

void SegmentStore::unbind(Suid suid) {
    if (segments_.erase(suid) == 0) throw UnknownSuid(suid);
}

bool SegmentStore::bound(Suid suid) const { return segments_.contains(suid); }

const std::vector<std::uint8_t>& SegmentStore::bytes(Suid suid) const {
    auto it = segments_.find(suid);
    if (it == segments_.end()) throw UnknownSuid(suid);
    return it->second;
}

std::vector<std::uint8_t>& SegmentStore::bytes_mut(Suid suid) {
    auto it = segments_.find(suid);
    if (it == segments_.end()) throw UnknownSuid(suid);
    return it->second;
}

void SegmentStore::resize(GlobalSegmentTable& gst, Suid suid,
                          std::uint64_t new_length, bool kernel_path) {
    if (!kernel_path)
        throw NotKernel("resize outside the Kernel path");
    auto it = segments_.find(suid);
    if (it == segments_.end()) throw UnknownSuid(suid);
    gst.set_length(suid, new_length);  // throws UnknownSuid before store changes
    it->second.resize(new_length, 0);
}

std::variant<std::uint8_t, MemFault> SegmentStore::read_byte(const Descriptor& d,
                                                             std::uint64_t offset,
                                                             Layer layer) const {
    auto v = translate(d, offset, AccessKind::Read, layer);
    if (auto* f = std::get_if<MemFault>(&v)) return *f;
    return bytes(d.suid).at(offset);
}

std::variant<std::monostate, MemFault> SegmentStore::write_byte(const Descriptor& d,
                                                                std::uint64_t offset,
                                                                std::uint8_t value,
                                                                Layer layer) {
    auto v = translate(d, offset, AccessKind::Write, layer);
    if (auto* f = std::get_if<MemFault>(&v)) return *f;
    bytes_mut(d.suid).at(offset) = value;
    return std::monostate{};
}

}  // namespace gvm
