// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/core.hpp"

#include <cstdio>

namespace gvm {

std::string hex_u64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::optional<Layer> layer_from_letter(char c) {
    switch (c) {
    case 'S': return Layer::Services;
    case 'U': return Layer::Utilities;
    case 'K': return Layer::Kernel;
    default: return std::nullopt;
    }
}

std::string perm_string(const PermSet& p) {
    std::string s = "---";
    if (p.read) s[0] = 'r';
    if (p.write) s[1] = 'w';
    if (p.execute) s[2] = 'x';
    return s;
}

std::optional<PermSet> perms_from_string(const std::string& s) {
    if (s.size() < 3 || s.size() > 4) return std::nullopt;
    PermSet p;
    const char* expect = "rwxa";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '-') continue;
        if (s[i] != expect[i]) return std::nullopt;
        switch (i) {
        case 0: p.read = true; break;
        case 1: p.write = true; break;
        case 2: p.execute = true; break;
        case 3: p.append = true; break;
        }
    }
    return p;
}

UnknownSuid::UnknownSuid(Suid s)
    : CoreError("unknown suid " + hex_u64(s.value)), suid(s) {}

UnknownType::UnknownType(TypeId t)
    : CoreError("unknown type id " + std::to_string(t)), type_id(t) {}

TypeId TypeTable::add(TypeEntry entry) {
    if (entry.name.empty()) throw CoreError("type name must not be empty");
    if (find_by_name(entry.name) != nullptr)
        throw CoreError("duplicate type name: " + entry.name);
    if (entry.type_id == 0) entry.type_id = next_id_++;
    if (entries_.contains(entry.type_id))
        throw CoreError("duplicate type id " + std::to_string(entry.type_id));
    if (entry.type_id >= next_id_) next_id_ = entry.type_id + 1;
    TypeId id = entry.type_id;
    entries_.emplace(id, std::move(entry));
    return id;
}

const TypeEntry& TypeTable::entry(TypeId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw UnknownType(id);
    return it->second;
}

const TypeEntry* TypeTable::find_by_name(const std::string& name) const {
    for (const auto& [id, e] : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

void GlobalSegmentTable::add(GstEntry entry) {
    if (entries_.contains(entry.suid))
        throw CoreError("duplicate suid in GST");
    entries_.emplace(entry.suid, entry);
}

void GlobalSegmentTable::remove(Suid suid) {
    if (entries_.erase(suid) == 0) throw UnknownSuid(suid);
}

void GlobalSegmentTable::set_length(Suid suid, std::uint64_t len) {
    auto it = entries_.find(suid);
    if (it == entries_.end()) throw UnknownSuid(suid);
    it->second.length = len;
}

const GstEntry* GlobalSegmentTable::find(Suid suid) const {
    auto it = entries_.find(suid);
    return it == entries_.end() ? nullptr : &it->second;
}

GstEntry gst_lookup(const GlobalSegmentTable& gst, Suid suid) {
    const GstEntry* e = gst.find(suid);
    if (e == nullptr) throw UnknownSuid(suid);
    return *e;
}

PermSet type_permissions(const TypeTable& tt, TypeId type_id, Layer layer) {
    return tt.entry(type_id).perms.at(layer);
}

Descriptor build_descriptor(Suid suid, const GlobalSegmentTable& gst, const TypeTable& tt) {
    GstEntry ge = gst_lookup(gst, suid);
    const TypeEntry& te = tt.entry(ge.type_id);
    Descriptor d;
    d.suid = suid;
    d.length = ge.length;
    d.perms = te.perms;
    d.gate_to = te.gate_to;
    d.handler = te.handler;
    return d;
}

TypeId ensure_scratch_type(TypeTable& tt, TypeId code_type) {
    const TypeEntry& code = tt.entry(code_type);
    std::string name = "scratch$" + code.name;
    if (const TypeEntry* e = tt.find_by_name(name)) return e->type_id;
    TypeEntry e;
    e.name = name;
    for (Layer l : {Layer::Services, Layer::Utilities, Layer::Kernel}) {
        bool owns = code.perms.at(l).execute ||
                    (code.gate_to.has_value() && *code.gate_to == l);
        if (owns) e.perms.at(l) = PermSet{true, true, false, false};
    }
    return tt.add(std::move(e));
}

}  // namespace gvm
