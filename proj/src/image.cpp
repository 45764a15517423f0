// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/image.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gvm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

std::uint64_t parse_uint_or(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos, 0);
        if (pos != s.size()) throw BuildError("bad number in " + ctx + ": " + s);
        return v;
    } catch (const BuildError&) {
        throw;
    } catch (...) {
        throw BuildError("bad number in " + ctx + ": " + s);
    }
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& hex,
                                          const std::string& ctx) {
    if (hex.size() % 2 != 0) throw BuildError("odd hex run in " + ctx);
    std::vector<std::uint8_t> out;
    auto nib = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw BuildError("bad hex digit in " + ctx);
    };
    for (std::size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
    return out;
}

std::string hex_bytes(const std::uint8_t* data, std::size_t n) {
    std::string out;
    char buf[3];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", data[i]);
        out += buf;
    }
    return out;
}

std::optional<TrapKindId> trap_kind_from_name(const std::string& s) {
    for (TrapKindId k :
         {TrapKindId::Bounds, TrapKindId::Permission, TrapKindId::IllegalOpcode,
          TrapKindId::DivideByZero, TrapKindId::StackFault,
          TrapKindId::GateSequenceFault, TrapKindId::UserTrap,
          TrapKindId::LinkFault})
        if (trap_kind_name(k) == s) return k;
    return std::nullopt;
}

PermSet parse_layer_perms(const std::string& tok, char letter) {
    if (tok.size() < 2 || tok[0] != letter || tok[1] != ':')
        throw BuildError(std::string("expected ") + letter + ":<perms>, got " + tok);
    auto p = perms_from_string(tok.substr(2));
    if (!p) throw BuildError("bad permission string: " + tok);
    return *p;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
    Manifest m;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (auto c = raw.find('#'); c != std::string::npos) raw = raw.substr(0, c);
        std::string line = trim(raw);
        if (line.empty()) continue;
        auto words = split_ws(line);
        const std::string& key = words[0];
        auto where = [&] { return " (manifest line " + std::to_string(lineno) + ")"; };

        if (key == "image") {
            if (words.size() != 2) throw BuildError("image expects a name" + where());
            m.name = words[1];
        } else if (key == "type") {
            if (words.size() < 5) throw BuildError("short type line" + where());
            ManifestType t;
            t.name = words[1];
            t.perms.services = parse_layer_perms(words[2], 'S');
            t.perms.utilities = parse_layer_perms(words[3], 'U');
            t.perms.kernel = parse_layer_perms(words[4], 'K');
            t.append_granted = t.perms.services.append || t.perms.utilities.append ||
                               t.perms.kernel.append;
            for (std::size_t i = 5; i < words.size(); ++i) {
                if (words[i] == "handler") {
                    t.handler = true;
                } else if (words[i].rfind("gate=", 0) == 0 && words[i].size() == 6) {
                    auto l = layer_from_letter(words[i][5]);
                    if (!l || *l == Layer::Services)
                        throw BuildError("gate target must be U or K" + where());
                    t.gate_to = l;
                } else {
                    throw BuildError("bad type attribute: " + words[i] + where());
                }
            }
            m.types.push_back(std::move(t));
        } else if (key == "segment") {
            if (words.size() != 4) throw BuildError("segment expects <name> <type> <source>" + where());
            ManifestSegment s;
            s.name = words[1];
            s.type_name = words[2];
            const std::string& src = words[3];
            if (src.rfind("asm=", 0) == 0) {
                s.source = ManifestSegment::Source::Asm;
                s.asm_file = src.substr(4);
            } else if (src.rfind("data=hex:", 0) == 0) {
                s.source = ManifestSegment::Source::Data;
                s.data = parse_hex_bytes(src.substr(9), "segment " + s.name);
            } else if (src.rfind("size=", 0) == 0) {
                s.source = ManifestSegment::Source::Size;
                s.size = parse_uint_or(src.substr(5), "segment " + s.name);
            } else {
                throw BuildError("bad segment source: " + src + where());
            }
            m.segments.push_back(std::move(s));
        } else if (key == "trap") {
            if (words.size() != 5) throw BuildError("trap expects <kind> <segment> <label> <layer>" + where());
            ManifestTrap t;
            auto k = trap_kind_from_name(words[1]);
            if (!k) throw BuildError("unknown trap kind: " + words[1] + where());
            t.kind = *k;
            t.segment = words[2];
            t.label = words[3];
            auto l = words[4].size() == 1 ? layer_from_letter(words[4][0]) : std::nullopt;
            if (!l) throw BuildError("bad trap handler layer: " + words[4] + where());
            t.layer = *l;
            m.traps.push_back(std::move(t));
        } else if (key == "entry") {
            if (words.size() != 3) throw BuildError("entry expects <segment> <label>" + where());
            m.entry_segment = words[1];
            m.entry_label = words[2];
        } else {
            throw BuildError("unknown manifest keyword: " + key + where());
        }
    }
    if (m.name.empty()) throw BuildError("manifest missing image name");
    if (m.entry_segment.empty()) throw BuildError("manifest missing entry");
    return m;
}

GuardImage build_image(const Manifest& manifest, const std::vector<ObjectUnit>& units) {
    GuardImage img;
    img.name = manifest.name;

    for (const ManifestType& t : manifest.types) {
        if (t.append_granted)
            throw BuildError("AppendGranted: type " + t.name +
                             " grants the reserved append permission");
        if (t.gate_to.has_value()) {
            for (Layer l : {Layer::Services, Layer::Utilities, Layer::Kernel}) {
                if (t.perms.at(l).execute &&
                    static_cast<int>(*t.gate_to) <= static_cast<int>(l))
                    throw BuildError("type " + t.name +
                                     ": gate target must lie strictly below every "
                                     "layer granted execute");
            }
        }
        TypeEntry e;
        e.name = t.name;
        e.perms = t.perms;
        e.gate_to = t.gate_to;
        e.handler = t.handler;
        img.tt.add(std::move(e));
    }

    auto unit_for = [&](const std::string& name) -> const ObjectUnit* {
        for (const ObjectUnit& u : units)
            if (u.name == name) return &u;
        return nullptr;
    };

    std::uint64_t next = kFirstSuid;
    for (const ManifestSegment& s : manifest.segments) {
        const TypeEntry* te = img.tt.find_by_name(s.type_name);
        if (te == nullptr)
            throw BuildError("UnknownType: segment " + s.name + " uses undeclared type " +
                             s.type_name);
        Suid suid{next++};
        std::vector<std::uint8_t> bytes;
        if (s.source == ManifestSegment::Source::Asm) {
            const ObjectUnit* u = unit_for(s.name);
            if (u == nullptr)
                throw BuildError("no assembled object supplied for segment " + s.name);
            if (u->type_name != s.type_name)
                throw BuildError("segment " + s.name + ": manifest type " + s.type_name +
                                 " does not match object type " + u->type_name);
            bytes = u->bytes;
            if (u->is_code) img.templates[suid] = u->tmpl;
        } else if (s.source == ManifestSegment::Source::Data) {
            bytes = s.data;
        } else {
            bytes.assign(s.size, 0);
        }
        img.gst.add(GstEntry{suid, bytes.size(), te->type_id});
        img.names.bind(s.name, suid);  // DuplicateName on repeats
        img.segments.emplace(suid, std::move(bytes));
    }

    // scratch types are fixed at initialization time, one per code type
    for (const ManifestSegment& s : manifest.segments) {
        if (s.source != ManifestSegment::Source::Asm) continue;
        const ObjectUnit* u = unit_for(s.name);
        if (u != nullptr && u->is_code)
            ensure_scratch_type(img.tt, img.tt.find_by_name(s.type_name)->type_id);
    }

    // entry point
    auto entry_suid = img.names.find(manifest.entry_segment);
    if (!entry_suid) throw BuildError("entry segment not declared: " + manifest.entry_segment);
    const ObjectUnit* eu = unit_for(manifest.entry_segment);
    if (eu == nullptr || !eu->is_code)
        throw BuildError("entry segment must be an assembled code segment");
    auto lbl = eu->labels.find(manifest.entry_label);
    if (lbl == eu->labels.end())
        throw BuildError("entry label not defined: " + manifest.entry_label);
    const GstEntry* ge = img.gst.find(*entry_suid);
    if (!img.tt.entry(ge->type_id).perms.services.execute)
        throw BuildError("EntryNotServices: entry segment type must grant execute "
                         "at the Services layer");
    img.entry_segment = *entry_suid;
    img.entry_offset = lbl->second;

    for (const ManifestTrap& t : manifest.traps) {
        if (is_error_kind(t.kind))
            throw BuildError("guest handlers may bind only UserTrap or LinkFault");
        auto suid = img.names.find(t.segment);
        if (!suid) throw BuildError("trap handler segment not declared: " + t.segment);
        const GstEntry* g = img.gst.find(*suid);
        if (!img.tt.entry(g->type_id).handler)
            throw BuildError("trap handler segment type must carry the handler flag: " +
                             t.segment);
        const ObjectUnit* u = unit_for(t.segment);
        if (u == nullptr) throw BuildError("trap handler must be an assembled segment");
        auto l = u->labels.find(t.label);
        if (l == u->labels.end())
            throw BuildError("trap handler label not defined: " + t.label);
        img.guest_handlers[t.kind] = GuestHandler{*suid, l->second, t.layer};
    }

    return img;
}

GuardImage build_image_from_file(const std::string& manifest_path) {
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw BuildError("cannot read " + p.string());
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    };
    std::filesystem::path mpath(manifest_path);
    Manifest m = parse_manifest(slurp(mpath));

    std::vector<ObjectUnit> units;
    for (const ManifestSegment& s : m.segments) {
        if (s.source != ManifestSegment::Source::Asm) continue;
        AsmResult r = assemble(slurp(mpath.parent_path() / s.asm_file));
        if (!r.ok()) {
            std::string msg = s.asm_file + ":";
            for (const Diagnostic& d : r.diagnostics)
                msg += " line " + std::to_string(d.line) + ": " + d.message + ";";
            throw BuildError(msg);
        }
        units.push_back(std::move(*r.unit));
    }
    return build_image(m, units);
}

std::string serialize_image(const GuardImage& img) {
    std::ostringstream os;
    os << "gimage " << img.name << '\n';
    for (const auto& [id, t] : img.tt.entries()) {
        os << "type " << id << ' ' << t.name << ' ' << perm_string(t.perms.services)
           << ' ' << perm_string(t.perms.utilities) << ' '
           << perm_string(t.perms.kernel) << ' '
           << (t.gate_to ? std::string(1, layer_letter(*t.gate_to)) : "-") << ' '
           << (t.handler ? 1 : 0) << '\n';
    }
    for (const auto& [suid, e] : img.gst.entries())
        os << "gst " << hex_u64(suid.value) << ' ' << hex_u64(e.length) << ' '
           << e.type_id << '\n';
    for (const auto& [name, suid] : img.names.bindings())
        os << "bind " << name << ' ' << hex_u64(suid.value) << '\n';
    for (const auto& [suid, tpl] : img.templates) {
        os << "template " << hex_u64(suid.value) << ' ' << tpl.scratch_size << '\n';
        for (std::size_t i = 0; i < tpl.externs.size(); ++i)
            os << "slot " << hex_u64(suid.value) << ' ' << (i + 1) << ' '
               << tpl.externs[i] << '\n';
    }
    for (const auto& [kind, h] : img.guest_handlers)
        os << "trap " << trap_kind_name(kind) << ' ' << hex_u64(h.segment.value)
           << ' ' << hex_u64(h.entry) << ' ' << layer_letter(h.layer) << '\n';
    os << "entry " << hex_u64(img.entry_segment.value) << ' '
       << hex_u64(img.entry_offset) << '\n';
    for (const auto& [suid, bytes] : img.segments) {
        if (bytes.empty()) {
            os << "seg " << hex_u64(suid.value) << " hex:\n";
            continue;
        }
        for (std::size_t i = 0; i < bytes.size(); i += 16)
            os << "seg " << hex_u64(suid.value) << " hex:"
               << hex_bytes(bytes.data() + i, std::min<std::size_t>(16, bytes.size() - i))
               << '\n';
    }
    return os.str();
}

GuardImage parse_image(const std::string& text) {
    GuardImage img;
    bool saw_header = false, saw_entry = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto words = split_ws(line);
        const std::string& key = words[0];
        if (key == "gimage" && words.size() == 2) {
            img.name = words[1];
            saw_header = true;
        } else if (key == "type" && words.size() == 8) {
            TypeEntry t;
            t.type_id = static_cast<TypeId>(parse_uint_or(words[1], "type id"));
            t.name = words[2];
            auto sp = perms_from_string(words[3]);
            auto up = perms_from_string(words[4]);
            auto kp = perms_from_string(words[5]);
            if (!sp || !up || !kp) throw BuildError("bad perms in image type line");
            t.perms = {*sp, *up, *kp};
            if (words[6] != "-") {
                auto l = words[6].size() == 1 ? layer_from_letter(words[6][0]) : std::nullopt;
                if (!l) throw BuildError("bad gate letter in image type line");
                t.gate_to = l;
            }
            t.handler = words[7] == "1";
            img.tt.add(std::move(t));
        } else if (key == "gst" && words.size() == 4) {
            img.gst.add(GstEntry{Suid{parse_uint_or(words[1], "gst suid")},
                                 parse_uint_or(words[2], "gst length"),
                                 static_cast<TypeId>(parse_uint_or(words[3], "gst type"))});
        } else if (key == "bind" && words.size() == 3) {
            img.names.bind(words[1], Suid{parse_uint_or(words[2], "bind suid")});
        } else if (key == "template" && words.size() == 3) {
            LinkageTemplate tpl;
            tpl.scratch_size = parse_uint_or(words[2], "template scratch");
            img.templates[Suid{parse_uint_or(words[1], "template suid")}] = tpl;
        } else if (key == "slot" && words.size() == 4) {
            Suid suid{parse_uint_or(words[1], "slot suid")};
            auto it = img.templates.find(suid);
            if (it == img.templates.end())
                throw BuildError("slot line before template line: " + line);
            auto idx = parse_uint_or(words[2], "slot index");
            if (idx != it->second.externs.size() + 1)
                throw BuildError("slot indexes must be contiguous from 1: " + line);
            it->second.externs.push_back(words[3]);
        } else if (key == "trap" && words.size() == 5) {
            auto k = trap_kind_from_name(words[1]);
            auto l = words[4].size() == 1 ? layer_from_letter(words[4][0]) : std::nullopt;
            if (!k || !l) throw BuildError("bad trap line: " + line);
            img.guest_handlers[*k] =
                GuestHandler{Suid{parse_uint_or(words[2], "trap suid")},
                             parse_uint_or(words[3], "trap offset"), *l};
        } else if (key == "entry" && words.size() == 3) {
            img.entry_segment = Suid{parse_uint_or(words[1], "entry suid")};
            img.entry_offset = parse_uint_or(words[2], "entry offset");
            saw_entry = true;
        } else if (key == "seg" && words.size() == 3 &&
                   words[2].rfind("hex:", 0) == 0) {
            Suid suid{parse_uint_or(words[1], "seg suid")};
            auto bytes = parse_hex_bytes(words[2].substr(4), "seg " + words[1]);
            auto& dest = img.segments[suid];
            dest.insert(dest.end(), bytes.begin(), bytes.end());
        } else {
            throw BuildError("bad image line: " + line);
        }
    }
    if (!saw_header) throw BuildError("not a guard image (missing gimage header)");
    if (!saw_entry) throw BuildError("image missing entry line");
    // consistency: every GST entry has stored bytes of the declared length
    for (const auto& [suid, e] : img.gst.entries()) {
        auto it = img.segments.find(suid);
        if (it == img.segments.end())
            throw BuildError("image segment bytes missing for " + hex_u64(suid.value));
        if (it->second.size() != e.length)
            throw BuildError("image segment length mismatch for " + hex_u64(suid.value));
    }
    return img;
}

Machine load_image(const GuardImage& img) {
    Machine m;
    m.tt = img.tt;
    m.gst = img.gst;
    m.names = img.names;
    m.templates = img.templates;
    for (const auto& [suid, bytes] : img.segments) m.store.bind(suid, bytes);
    for (const auto& [kind, h] : img.guest_handlers) m.handlers[kind] = h;
    std::uint64_t next = kFirstSuid;
    for (const auto& [suid, e] : img.gst.entries())
        next = std::max(next, suid.value + 1);
    m.next_suid = next;
    m.start(img.entry_segment, img.entry_offset);
    return m;
}

Suid image_bind_object(GuardImage& img, const std::string& name,
                       const ObjectUnit& unit, const std::string& type_name) {
    const TypeEntry* te = img.tt.find_by_name(type_name);
    if (te == nullptr) throw BuildError("UnknownType: " + type_name);
    std::uint64_t next = kFirstSuid;
    for (const auto& [suid, e] : img.gst.entries())
        next = std::max(next, suid.value + 1);
    Suid suid{next};
    img.names.bind(name, suid);  // DuplicateName if already bound
    img.gst.add(GstEntry{suid, unit.bytes.size(), te->type_id});
    img.segments.emplace(suid, unit.bytes);
    if (unit.is_code) {
        img.templates[suid] = unit.tmpl;
        ensure_scratch_type(img.tt, te->type_id);
    }
    return suid;
}

}  // namespace gvm
