// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include <iostream>

#include "CLI11.hpp"
#include "guardvm/harness/fuzz.hpp"
#include "guardvm/harness/matrix.hpp"
#include "guardvm/harness/scenarios.hpp"

using namespace gvm::harness;

namespace {

int report(const MatrixReport& r, const char* what) {
    std::cout << what << ": " << r.cases << " cases, " << r.failures.size()
              << " failures\n";
    for (const std::string& f : r.failures) std::cout << "  " << f << "\n";
    return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guard-verify: differential and structural checks"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    int count = 10000;
    std::uint64_t max_steps = 4096;
    bool regen = false;

    auto* cmatrix = app.add_subcommand("matrix", "permission and bounds matrix");
    auto* cfuzz = app.add_subcommand("fuzz", "differential random programs");
    cfuzz->add_option("--seed", seed);
    cfuzz->add_option("--count", count);
    cfuzz->add_option("--max-steps", max_steps);
    auto* cscen = app.add_subcommand("scenarios", "golden trace comparison");
    cscen->add_flag("--regen", regen, "rewrite the golden files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmatrix->parsed()) {
            int rc = report(check_permission_matrix(), "matrix");
            rc |= report(check_boundary_offsets(), "bounds");
            return rc;
        }
        if (cfuzz->parsed()) {
            FuzzReport r = run_fuzz({seed, count, max_steps});
            std::cout << "fuzz: " << r.programs << " programs, "
                      << r.mismatch_count << " mismatches (seed " << seed << ")\n";
            for (const FuzzMismatch& m : r.samples)
                std::cout << "  case " << m.index << ": " << m.detail << "\n";
            return r.ok() ? 0 : 1;
        }
        if (cscen->parsed()) {
            int rc = 0;
            for (const ScenarioCheck& c : check_scenarios(regen)) {
                std::cout << "scenario " << c.name << ": "
                          << (c.matched ? "ok" : "MISMATCH");
                if (!c.message.empty()) std::cout << " (" << c.message << ")";
                std::cout << "\n";
                if (!c.matched) rc = 1;
            }
            return rc;
        }
    } catch (const std::exception& e) {
        std::cerr << "guard-verify: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
