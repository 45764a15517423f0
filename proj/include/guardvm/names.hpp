// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <map>
#include <optional>
#include <string>

#include "guardvm/core.hpp"

namespace gvm {

struct UnknownName : CoreError {
    explicit UnknownName(const std::string& n)
        : CoreError("unknown name: " + n), name(n) {}
    std::string name;
};
struct DuplicateName : CoreError {
    explicit DuplicateName(const std::string& n)
        : CoreError("duplicate name: " + n), name(n) {}
    std::string name;
};

/// The Utilities-layer file system: symbolic name -> SUID. Flat namespace.
/// A suid may be reachable under several names after rename + rebind.
class NameTable {
public:
    Suid lookup(const std::string& name) const;  // UnknownName
    std::optional<Suid> find(const std::string& name) const;

    void bind(const std::string& name, Suid suid);  // DuplicateName
    void unbind(const std::string& name);           // UnknownName

    /// Atomic move of the binding; the suid and segment bytes are untouched.
    void rename(const std::string& old_name, const std::string& new_name);

    const std::map<std::string, Suid>& bindings() const { return bindings_; }

    /// First name bound to suid in lexical order, if any. Trace labels only.
    std::optional<std::string> name_of(Suid suid) const;

private:
    std::map<std::string, Suid> bindings_;
};

}  // namespace gvm
