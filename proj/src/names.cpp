// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/names.hpp"

namespace gvm {

Suid NameTable::lookup(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) throw UnknownName(name);
    return it->second;
}

std::optional<Suid> NameTable::find(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
}

void NameTable::bind(const std::string& name, Suid suid) {
    if (name.empty()) throw CoreError("empty name");
    if (bindings_.contains(name)) throw DuplicateName(name);
    bindings_.emplace(name, suid);
}

void NameTable::unbind(const std::string& name) {
    if (bindings_.erase(name) == 0) throw UnknownName(name);
}

void NameTable::rename(const std::string& old_name, const std::string& new_name) {
    auto it = bindings_.find(old_name);
    if (it == bindings_.end()) throw UnknownName(old_name);
    if (bindings_.contains(new_name)) throw DuplicateName(new_name);
    Suid s = it->second;
    bindings_.erase(it);
    bindings_.emplace(new_name, s);
}

std::optional<std::string> NameTable::name_of(Suid suid) const {
    for (const auto& [n, s] : bindings_)
        if (s == suid) return n;
    return std::nullopt;
}

}  // namespace gvm
