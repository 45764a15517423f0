// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/harness/fuzz.hpp"

#include <sstream>

#include "guardvm/harness/audit.hpp"
#include "guardvm/machine.hpp"

namespace gvm::harness {

namespace {

void push_word(std::vector<std::uint8_t>& code, std::uint8_t op,
               std::uint8_t mode, std::uint16_t operand) {
    code.push_back(op);
    code.push_back(mode);
    code.push_back(static_cast<std::uint8_t>(operand & 0xFF));
    code.push_back(static_cast<std::uint8_t>(operand >> 8));
}

Machine build_vm(const ShadowConfig& cfg) {
    Machine m;
    TypeEntry code_t;
    code_t.name = "svc_code";
    code_t.perms.services = *perms_from_string("--x");
    TypeId code_id = m.tt.add(std::move(code_t));
    TypeEntry data_t;
    data_t.name = "fz_data";
    data_t.perms.services = *perms_from_string("r--");
    data_t.perms.utilities = *perms_from_string("rw-");
    TypeId data_id = m.tt.add(std::move(data_t));

    Suid prog{kFirstSuid}, d{kFirstSuid + 1};
    m.gst.add(GstEntry{prog, cfg.code.size(), code_id});
    m.gst.add(GstEntry{d, cfg.data.size(), data_id});
    m.names.bind("prog", prog);
    m.names.bind("d", d);
    m.store.bind(prog, cfg.code);
    m.store.bind(d, cfg.data);

    LinkageTemplate tpl;
    tpl.scratch_size = cfg.scratch_size;
    tpl.externs = {"d"};
    m.templates[prog] = tpl;
    m.input = cfg.input;
    m.next_suid = kFirstSuid + 2;
    m.start(prog, 0);
    return m;
}

std::string dump_case(const ShadowConfig& cfg) {
    std::ostringstream os;
    os << "code:";
    for (std::uint8_t b : cfg.code) os << ' ' << static_cast<int>(b);
    os << " data_len=" << cfg.data.size() << " input_len=" << cfg.input.size();
    return os.str();
}

}  // namespace

ShadowConfig fuzz_case(std::mt19937_64& rng) {
    ShadowConfig cfg;
    auto pick = [&](std::uint64_t n) { return rng() % n; };

    std::size_t n_ins = 4 + pick(29);
    std::size_t code_len = n_ins * 4;
    for (std::size_t i = 0; i < n_ins; ++i) {
        std::uint64_t roll = pick(100);
        if (roll < 28) {
            // arithmetic
            std::uint8_t op = static_cast<std::uint8_t>(0x20 + pick(7));
            if (pick(2) == 0) {
                push_word(cfg.code, op, 0,
                          static_cast<std::uint16_t>(pick(pick(8) == 0 ? 0xFFFF : 256)));
            } else {
                push_word(cfg.code, op, static_cast<std::uint8_t>(1 + pick(2)),
                          static_cast<std::uint16_t>(pick(10) == 0 ? pick(4) : pick(2)));
            }
        } else if (roll < 42) {
            // LDA in all four forms
            std::uint8_t mode = static_cast<std::uint8_t>(pick(4));
            std::uint16_t opnd = 0;
            if (mode == 0) opnd = static_cast<std::uint16_t>(pick(300));
            if (mode == 1 || mode == 2) opnd = static_cast<std::uint16_t>(pick(3));
            push_word(cfg.code, 0x10, mode, opnd);
        } else if (roll < 52) {
            push_word(cfg.code, 0x11, static_cast<std::uint8_t>(1 + pick(2)),
                      static_cast<std::uint16_t>(pick(8) == 0 ? pick(4) : pick(2)));
        } else if (roll < 60) {
            if (pick(5) == 0) push_word(cfg.code, 0x12, 3, 0);
            else
                push_word(cfg.code, 0x12, 0,
                          static_cast<std::uint16_t>(pick(pick(6) == 0 ? 100 : 24)));
        } else if (roll < 72) {
            // branch; mostly a legal aligned target, sometimes junk
            std::uint8_t op = static_cast<std::uint8_t>(0x30 + pick(5));
            std::uint16_t target;
            if (pick(12) == 0) target = static_cast<std::uint16_t>(pick(4 * code_len + 3));
            else target = static_cast<std::uint16_t>(pick(n_ins) * 4);
            push_word(cfg.code, op, 0, target);
        } else if (roll < 79) {
            push_word(cfg.code, 0x00, 3, static_cast<std::uint16_t>(pick(256)));
        } else if (roll < 85) {
            push_word(cfg.code, pick(2) == 0 ? 0x60 : 0x61, 3, 0);
        } else if (roll < 90) {
            if (pick(2) == 0) push_word(cfg.code, 0x50, 0, static_cast<std::uint16_t>(pick(32)));
            else push_word(cfg.code, 0x01, 3, 0);
        } else if (roll < 95) {
            // control transfers that must all fault at the Services layer
            switch (pick(5)) {
            case 0: push_word(cfg.code, 0x40, static_cast<std::uint8_t>(1 + pick(2)),
                              static_cast<std::uint16_t>(pick(3))); break;
            case 1: push_word(cfg.code, 0x41, 3, 0); break;
            case 2: push_word(cfg.code, 0x42, 0, static_cast<std::uint16_t>(pick(4))); break;
            case 3: push_word(cfg.code, 0x43, 3, 0); break;
            default: push_word(cfg.code, 0x51, 3, 0); break;
            }
        } else if (roll < 98) {
            std::uint8_t op = static_cast<std::uint8_t>(0x70 + pick(4));
            std::uint8_t mode = op == 0x71 ? 2 : (op == 0x70 ? 3 : 0);
            push_word(cfg.code, op, mode, op == 0x70 ? 0 : static_cast<std::uint16_t>(pick(4)));
        } else {
            // raw word, frequently undecodable
            push_word(cfg.code, static_cast<std::uint8_t>(rng()),
                      static_cast<std::uint8_t>(pick(6)),
                      static_cast<std::uint16_t>(rng()));
        }
    }

    cfg.data.resize(pick(49));
    for (auto& b : cfg.data) b = static_cast<std::uint8_t>(rng());
    cfg.input.resize(pick(13));
    for (auto& b : cfg.input) b = static_cast<std::uint8_t>(rng());
    cfg.scratch_size = 1 + pick(24);
    return cfg;
}

FuzzReport run_fuzz(const FuzzOptions& options) {
    FuzzReport report;
    std::mt19937_64 rng(options.seed);

    for (int i = 0; i < options.count; ++i) {
        ShadowConfig cfg = fuzz_case(rng);
        cfg.max_steps = options.max_steps;
        ShadowResult want = shadow_run(cfg);

        Machine m = build_vm(cfg);
        std::vector<std::string> diffs;

        if (want.budget_exceeded) {
            // the machine may spend one extra step on the single link fault
            RunResult got = m.run(cfg.max_steps + 2);
            if (got.status != RunStatus::BudgetExceeded &&
                got.steps <= cfg.max_steps)
                diffs.push_back("reference exceeded the budget, machine halted at step " +
                                std::to_string(got.steps));
        } else {
            RunResult got = m.run(want.steps + 4);
            if (got.status != RunStatus::Halted)
                diffs.push_back("machine failed to halt");
            else if (got.exit_code != want.exit_code)
                diffs.push_back("exit " + std::to_string(got.exit_code) + " want " +
                                std::to_string(want.exit_code));
            if (m.acc() != want.acc) diffs.push_back("acc mismatch");
            if (m.x() != want.x) diffs.push_back("x mismatch");
            if (m.output != want.output) diffs.push_back("output mismatch");
            if (m.store.bytes(Suid{kFirstSuid + 1}) != want.data)
                diffs.push_back("data segment mutated");
            auto& inst = m.linkage_for(0, Suid{kFirstSuid});
            if (m.store.bytes(inst.descriptor(0).suid) != want.scratch)
                diffs.push_back("scratch mismatch");
        }

        AuditReport audit = audit_trace(m.log().events());
        for (const std::string& p : audit.problems) diffs.push_back("audit: " + p);

        ++report.programs;
        if (!diffs.empty()) {
            ++report.mismatch_count;
            if (report.samples.size() < 8) {
                std::string joined;
                for (const std::string& d : diffs) joined += d + "; ";
                report.samples.push_back({i, joined + dump_case(cfg)});
            }
        }
    }
    return report;
}

}  // namespace gvm::harness
