// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "guardvm/core.hpp"

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

bool valid_symbol(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::optional<std::uint64_t> parse_uint(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos, 0);  // handles 0x prefix
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

struct Stmt {
    int line = 0;
    std::string mnemonic;
    std::string operand;  // raw text, may be empty
    std::uint64_t offset = 0;
};

bool is_branch(Opcode op) {
    return op == Opcode::JMP || op == Opcode::BEQ || op == Opcode::BNE ||
           op == Opcode::BLT || op == Opcode::BGE;
}

}  // namespace

AsmResult assemble(const std::string& source) {
    AsmResult result;
    auto err = [&](int line, const std::string& msg) {
        result.diagnostics.push_back({line, msg});
    };

    std::string seg_name;
    std::string type_name;
    std::uint64_t scratch_size = kDefaultScratchSize;
    bool scratch_seen = false;
    std::vector<std::string> externs;
    std::map<std::string, std::uint64_t> labels;
    std::vector<Stmt> stmts;
    std::vector<std::uint8_t> data_bytes;
    bool has_code = false;
    bool has_data = false;
    std::uint64_t offset = 0;

    // pass 1: directives, labels, extern numbering, statement offsets
    std::istringstream is(source);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (auto c = raw.find(';'); c != std::string::npos) raw = raw.substr(0, c);
        std::string line = trim(raw);
        if (line.empty()) continue;

        if (line[0] == '.') {
            auto words = split_ws(line);
            const std::string& dir = words[0];
            if (dir == ".segment") {
                if (words.size() != 3) { err(lineno, ".segment expects <name> <type>"); continue; }
                if (!seg_name.empty()) { err(lineno, "duplicate .segment directive"); continue; }
                if (!valid_symbol(words[1]) || !valid_symbol(words[2])) {
                    err(lineno, "invalid segment or type name"); continue;
                }
                seg_name = words[1];
                type_name = words[2];
            } else if (dir == ".extern") {
                if (words.size() != 2 || !valid_symbol(words[1])) {
                    err(lineno, ".extern expects a symbol"); continue;
                }
                if (std::find(externs.begin(), externs.end(), words[1]) != externs.end()) {
                    err(lineno, "duplicate extern: " + words[1]); continue;
                }
                externs.push_back(words[1]);
            } else if (dir == ".scratch") {
                auto v = words.size() == 2 ? parse_uint(words[1]) : std::nullopt;
                if (!v) { err(lineno, ".scratch expects a size"); continue; }
                if (scratch_seen) { err(lineno, "duplicate .scratch directive"); continue; }
                scratch_seen = true;
                scratch_size = *v;
            } else if (dir == ".byte") {
                has_data = true;
                std::string rest = trim(line.substr(5));
                std::istringstream vs(rest);
                std::string tok;
                while (std::getline(vs, tok, ',')) {
                    auto v = parse_uint(trim(tok));
                    if (!v || *v > 0xFF) { err(lineno, "bad .byte value: " + trim(tok)); continue; }
                    data_bytes.push_back(static_cast<std::uint8_t>(*v));
                }
            } else if (dir == ".word") {
                auto v = words.size() == 2 ? parse_uint(words[1]) : std::nullopt;
                if (!v || *v > 0xFFFFFFFFull) { err(lineno, ".word expects a 32-bit value"); continue; }
                has_code = true;
                Stmt s;
                s.line = lineno;
                s.mnemonic = ".word";
                s.operand = words[1];
                s.offset = offset;
                stmts.push_back(s);
                offset += kInstructionSize;
            } else {
                err(lineno, "unknown directive: " + dir);
            }
            continue;
        }

        // label prefixes, possibly followed by an instruction on the same line
        while (true) {
            auto colon = line.find(':');
            if (colon == std::string::npos) break;
            std::string lbl = trim(line.substr(0, colon));
            if (!valid_symbol(lbl)) { err(lineno, "invalid label: " + lbl); lbl.clear(); }
            if (!lbl.empty()) {
                if (labels.contains(lbl)) err(lineno, "duplicate label: " + lbl);
                else labels[lbl] = offset;
            }
            line = trim(line.substr(colon + 1));
        }
        if (line.empty()) continue;

        has_code = true;
        auto sp = line.find_first_of(" \t");
        Stmt s;
        s.line = lineno;
        s.mnemonic = sp == std::string::npos ? line : line.substr(0, sp);
        s.operand = sp == std::string::npos ? "" : trim(line.substr(sp));
        s.offset = offset;
        stmts.push_back(s);
        offset += kInstructionSize;
    }

    if (seg_name.empty()) err(0, "missing .segment directive");
    if (has_code && has_data) err(0, "segment mixes instructions and .byte data");
    if (has_data && !externs.empty()) err(0, "data segments cannot declare externs");

    auto slot_of = [&](const std::string& name) -> std::optional<std::uint16_t> {
        if (name == "scratch") return 0;
        if (!name.empty() && name[0] == '%') {
            auto v = parse_uint(name.substr(1));
            if (v && *v <= 0xFFFF) return static_cast<std::uint16_t>(*v);
            return std::nullopt;
        }
        for (std::size_t i = 0; i < externs.size(); ++i)
            if (externs[i] == name) return static_cast<std::uint16_t>(i + 1);
        return std::nullopt;
    };

    // pass 2: encode
    std::vector<std::uint8_t> code;
    for (const Stmt& s : stmts) {
        if (s.mnemonic == ".word") {
            std::uint64_t v = *parse_uint(s.operand);
            code.push_back(static_cast<std::uint8_t>(v >> 24));
            code.push_back(static_cast<std::uint8_t>(v >> 16));
            code.push_back(static_cast<std::uint8_t>(v >> 8));
            code.push_back(static_cast<std::uint8_t>(v));
            continue;
        }
        auto op = opcode_from_mnemonic(s.mnemonic);
        if (!op) { err(s.line, "unknown mnemonic: " + s.mnemonic); continue; }

        Instruction ins;
        ins.opcode = *op;
        std::string opnd = s.operand;

        if (opnd.empty()) {
            ins.mode = AddrMode::None;
        } else if (opnd[0] == '#') {
            auto v = parse_uint(opnd.substr(1));
            if (!v) { err(s.line, "bad immediate: " + opnd); continue; }
            if (*v > 0xFFFF) { err(s.line, "operand overflow: " + opnd); continue; }
            // HALT's code travels in the operand of its None-mode encoding
            ins.mode = *op == Opcode::HALT ? AddrMode::None : AddrMode::Immediate;
            ins.operand = static_cast<std::uint16_t>(*v);
        } else if (is_branch(*op)) {
            auto it = labels.find(opnd);
            if (it == labels.end()) { err(s.line, "undefined label: " + opnd); continue; }
            if (it->second > 0xFFFF ||
                it->second >= stmts.size() * kInstructionSize) {
                err(s.line, "branch target out of range: " + opnd);
                continue;
            }
            ins.mode = AddrMode::Immediate;
            ins.operand = static_cast<std::uint16_t>(it->second);
        } else if (*op == Opcode::ENTER && opnd.size() == 1) {
            auto l = layer_from_letter(opnd[0]);
            if (!l) { err(s.line, "bad layer: " + opnd); continue; }
            ins.mode = AddrMode::Immediate;
            ins.operand = static_cast<std::uint16_t>(*l);
        } else {
            bool indexed = false;
            std::string name = opnd;
            if (name.size() > 2 && name.substr(name.size() - 2) == ",X") {
                indexed = true;
                name = trim(name.substr(0, name.size() - 2));
            }
            auto slot = slot_of(name);
            if (!slot) { err(s.line, "extern used but undeclared: " + name); continue; }
            ins.mode = indexed ? AddrMode::SlotIndexed : AddrMode::SlotDirect;
            ins.operand = *slot;
        }

        if (!mode_legal(ins.opcode, ins.mode)) {
            err(s.line, "operand form not valid for " + s.mnemonic);
            continue;
        }
        auto word = encode(ins);
        code.insert(code.end(), word.begin(), word.end());
    }

    if (!result.diagnostics.empty()) return result;

    ObjectUnit unit;
    unit.name = seg_name;
    unit.type_name = type_name;
    unit.is_code = !has_data;
    unit.bytes = has_data ? std::move(data_bytes) : std::move(code);
    unit.labels = std::move(labels);
    if (unit.is_code) {
        unit.tmpl.scratch_size = scratch_size;
        unit.tmpl.externs = std::move(externs);
    }
    result.unit = std::move(unit);
    return result;
}

std::string disassemble(const ObjectUnit& unit) {
    std::ostringstream os;
    os << ".segment " << unit.name << ' ' << unit.type_name << '\n';
    if (!unit.is_code) {
        for (std::size_t i = 0; i < unit.bytes.size(); i += 16) {
            os << ".byte ";
            for (std::size_t j = i; j < std::min(i + 16, unit.bytes.size()); ++j) {
                if (j > i) os << ", ";
                os << hex_u64(unit.bytes[j]);
            }
            os << '\n';
        }
        return os.str();
    }

    if (unit.bytes.size() % kInstructionSize != 0)
        throw CoreError("code segment length is not a multiple of 4");

    os << ".scratch " << unit.tmpl.scratch_size << '\n';
    for (const std::string& e : unit.tmpl.externs) os << ".extern " << e << '\n';

    // collect branch targets for synthesized labels
    std::set<std::uint64_t> targets;
    std::vector<std::optional<Instruction>> decoded;
    for (std::size_t i = 0; i < unit.bytes.size(); i += 4) {
        std::array<std::uint8_t, 4> w{unit.bytes[i], unit.bytes[i + 1],
                                      unit.bytes[i + 2], unit.bytes[i + 3]};
        auto ins = decode(w);
        decoded.push_back(ins);
        if (ins && is_branch(ins->opcode)) targets.insert(ins->operand);
    }

    auto slot_name = [&](std::uint16_t slot) -> std::string {
        if (slot == 0) return "scratch";
        if (slot <= unit.tmpl.externs.size()) return unit.tmpl.externs[slot - 1];
        return "%" + std::to_string(slot);
    };

    for (std::size_t i = 0; i < decoded.size(); ++i) {
        std::uint64_t off = i * kInstructionSize;
        if (targets.contains(off)) os << "L_" << off << ":\n";
        const auto& ins = decoded[i];
        if (!ins) {
            std::uint32_t v = (unit.bytes[i * 4] << 24) | (unit.bytes[i * 4 + 1] << 16) |
                              (unit.bytes[i * 4 + 2] << 8) | unit.bytes[i * 4 + 3];
            os << "    .word " << hex_u64(v) << '\n';
            continue;
        }
        os << "    " << mnemonic(ins->opcode);
        switch (ins->mode) {
        case AddrMode::Immediate:
            if (is_branch(ins->opcode)) os << " L_" << ins->operand;
            else if (ins->opcode == Opcode::ENTER)
                os << ' ' << layer_letter(static_cast<Layer>(ins->operand));
            else os << " #" << ins->operand;
            break;
        case AddrMode::SlotIndexed:
            os << ' ' << slot_name(ins->operand) << ",X";
            break;
        case AddrMode::SlotDirect:
            os << ' ' << slot_name(ins->operand);
            break;
        case AddrMode::None:
            if (ins->opcode == Opcode::HALT) os << " #" << ins->operand;
            break;
        }
        os << '\n';
    }
    return os.str();
}

std::string serialize_object(const ObjectUnit& unit) {
    std::ostringstream os;
    os << "name " << unit.name << '\n';
    os << "type " << unit.type_name << '\n';
    if (unit.is_code) {
        os << "scratch " << unit.tmpl.scratch_size << '\n';
        for (std::size_t i = 0; i < unit.tmpl.externs.size(); ++i)
            os << "extern " << (i + 1) << ' ' << unit.tmpl.externs[i] << '\n';
    }
    for (const auto& [lbl, off] : unit.labels)
        os << "label " << lbl << ' ' << hex_u64(off) << '\n';
    for (std::size_t i = 0; i < unit.bytes.size(); i += 16) {
        os << "code hex:";
        char buf[3];
        for (std::size_t j = i; j < std::min(i + 16, unit.bytes.size()); ++j) {
            std::snprintf(buf, sizeof buf, "%02x", unit.bytes[j]);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

ObjectUnit parse_object(const std::string& text) {
    ObjectUnit unit;
    unit.is_code = false;
    bool saw_name = false, saw_type = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto words = split_ws(line);
        const std::string& key = words[0];
        if (key == "name" && words.size() == 2) {
            unit.name = words[1];
            saw_name = true;
        } else if (key == "type" && words.size() == 2) {
            unit.type_name = words[1];
            saw_type = true;
        } else if (key == "scratch" && words.size() == 2) {
            auto v = parse_uint(words[1]);
            if (!v) throw CoreError("bad scratch size in object: " + line);
            unit.is_code = true;
            unit.tmpl.scratch_size = *v;
        } else if (key == "extern" && words.size() == 3) {
            auto slot = parse_uint(words[1]);
            if (!slot || *slot != unit.tmpl.externs.size() + 1)
                throw CoreError("extern slots must be contiguous from 1: " + line);
            unit.tmpl.externs.push_back(words[2]);
        } else if (key == "label" && words.size() == 3) {
            auto off = parse_uint(words[2]);
            if (!off) throw CoreError("bad label offset: " + line);
            unit.labels[words[1]] = *off;
        } else if (key == "code" && words.size() == 2 &&
                   words[1].rfind("hex:", 0) == 0) {
            std::string hex = words[1].substr(4);
            if (hex.size() % 2 != 0) throw CoreError("odd hex run in object");
            for (std::size_t i = 0; i < hex.size(); i += 2) {
                auto nib = [&](char c) -> int {
                    if (c >= '0' && c <= '9') return c - '0';
                    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                    throw CoreError("bad hex digit in object");
                };
                unit.bytes.push_back(
                    static_cast<std::uint8_t>(nib(hex[i]) * 16 + nib(hex[i + 1])));
            }
        } else {
            throw CoreError("bad object line: " + line);
        }
    }
    if (!saw_name || !saw_type) throw CoreError("object missing name or type");
    return unit;
}

}  // namespace gvm
