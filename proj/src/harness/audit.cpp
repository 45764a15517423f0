// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/harness/audit.hpp"

#include <set>

namespace gvm::harness {

namespace {

int layer_index(const std::string& s) {
    if (s == "S") return 0;
    if (s == "U") return 1;
    if (s == "K") return 2;
    return -1;
}

int expected_halt_code(const std::string& alarm_kind) {
    const char* errors[] = {"Bounds", "Permission", "IllegalOpcode",
                            "DivideByZero", "StackFault", "GateSequenceFault"};
    for (int i = 0; i < 6; ++i)
        if (alarm_kind == errors[i]) return 64 + i;
    if (alarm_kind == "LinkUnresolvable") return 70;
    if (alarm_kind == "FatalTrapNesting") return 71;
    return -1;
}

std::string field(const Event& e, const char* key) {
    const std::string* v = e.value(key);
    return v ? *v : std::string();
}

}  // namespace

AuditReport audit_trace(const std::vector<Event>& events) {
    AuditReport report;
    auto bad = [&](std::uint64_t step, const std::string& msg) {
        report.problems.push_back("step " + std::to_string(step) + ": " + msg);
    };

    // the non-Step backbone drives the ordering rules
    std::vector<const Event*> evs;
    bool halted = false;
    int halt_code = -1;
    for (const Event& e : events) {
        if (halted) bad(e.step, "event after HALT");
        if (e.kind == EventKind::Step) continue;
        evs.push_back(&e);
        if (e.kind == EventKind::Halt) {
            halted = true;
            halt_code = std::stoi(field(e, "code"));
        }
    }

    // every LINK must answer an outstanding LinkFault for that (slot, sym);
    // a resolved slot never faults again, so a spurious second LINK has no
    // trap to pair with
    std::map<std::pair<std::string, std::string>, int> pending_links;
    std::vector<std::pair<std::string, std::string>> gates;  // (from, to)

    for (std::size_t i = 0; i < evs.size(); ++i) {
        const Event& e = *evs[i];
        auto next = [&]() -> const Event* {
            return i + 1 < evs.size() ? evs[i + 1] : nullptr;
        };

        switch (e.kind) {
        case EventKind::Fault: {
            const Event* n = next();
            bool follows =
                n != nullptr &&
                ((n->kind == EventKind::Trap && field(*n, "kind") == field(e, "kind")) ||
                 (n->kind == EventKind::Alarm &&
                  field(*n, "kind") == "FatalTrapNesting"));
            if (!follows)
                bad(e.step, "FAULT not followed by a matching TRAP or a "
                            "nesting-cap ALARM");
            break;
        }
        case EventKind::Trap: {
            std::string kind = field(e, "kind");
            if (kind == "LinkFault")
                ++pending_links[{field(e, "slot"), field(e, "sym")}];
            if (expected_halt_code(kind) >= 0) {
                // an error trap must run straight into the alarm
                const Event* n = next();
                if (n == nullptr || n->kind != EventKind::Alarm ||
                    field(*n, "kind") != kind)
                    bad(e.step, "error TRAP " + kind + " not followed by its ALARM");
            }
            break;
        }
        case EventKind::Alarm: {
            std::string kind = field(e, "kind");
            if (kind == "Operator") break;
            int want = expected_halt_code(kind);
            const Event* n = next();
            if (want < 0)
                bad(e.step, "unknown ALARM kind " + kind);
            else if (n == nullptr || n->kind != EventKind::Halt ||
                     field(*n, "code") != std::to_string(want))
                bad(e.step, "ALARM " + kind + " not followed by HALT code " +
                                std::to_string(want));
            break;
        }
        case EventKind::Link: {
            auto key = std::make_pair(field(e, "slot"), field(e, "sym"));
            if (pending_links[key] <= 0)
                bad(e.step, "slot " + key.first + " (" + key.second +
                                ") linked without an outstanding LinkFault");
            else
                --pending_links[key];
            break;
        }
        case EventKind::Gate: {
            std::string dir = field(e, "dir");
            std::string from = field(e, "from");
            std::string to = field(e, "to");
            int fi = layer_index(from), ti = layer_index(to);
            if (fi < 0 || ti < 0) {
                bad(e.step, "bad GATE layer letters");
                break;
            }
            if (dir == "enter") {
                if (ti != fi + 1)
                    bad(e.step, "GATE enter skips a layer: " + from + "->" + to);
                gates.emplace_back(from, to);
            } else if (dir == "exit") {
                if (gates.empty())
                    bad(e.step, "GATE exit with no enter outstanding");
                else if (gates.back().second != from || gates.back().first != to)
                    bad(e.step, "GATE exit does not match the innermost enter");
                else
                    gates.pop_back();
            } else {
                bad(e.step, "bad GATE dir " + dir);
            }
            break;
        }
        default:
            break;
        }
    }

    // a clean halt must leave no gate open; error halts may
    if (!gates.empty() && halted && halt_code == 0)
        report.problems.push_back("trace halts cleanly with " +
                                  std::to_string(gates.size()) + " open gate(s)");
    return report;
}

}  // namespace gvm::harness
