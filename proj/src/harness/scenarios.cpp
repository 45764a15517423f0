// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/harness/scenarios.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "guardvm/image.hpp"

namespace gvm::harness {

namespace {

std::filesystem::path demos_dir() { return GUARDVM_DEMOS_DIR; }
std::filesystem::path golden_dir() { return GUARDVM_GOLDEN_DIR; }

// the replacement data segment installed by the hot-swap scenario
const char* kSwappedFoo = R"(.segment foo util_data
.byte 0xf0, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7
.byte 0xf8, 0xf9, 0xfa, 0xfb, 0xfc, 0xfd, 0xfe, 0xff
)";

std::string run_traced(Machine& m, std::uint64_t budget, bool with_steps,
                       int& exit_code) {
    RunResult r = m.run(budget);
    exit_code = r.exit_code;
    return m.log().serialize(with_steps) + "RESULT exit=" +
           std::to_string(r.exit_code) + "\n";
}

ScenarioResult scenario_tutorial() {
    ScenarioResult out;
    out.name = "tutorial";
    Machine m = load_image(build_image_from_file((demos_dir() / "tutorial.gim").string()));
    out.trace = run_traced(m, 1000, true, out.exit_code);
    return out;
}

ScenarioResult scenario_linkfault() {
    ScenarioResult out;
    out.name = "linkfault";
    Machine m = load_image(build_image_from_file((demos_dir() / "linkdemo.gim").string()));
    out.trace = run_traced(m, 1000, true, out.exit_code);
    return out;
}

ScenarioResult scenario_hotswap() {
    ScenarioResult out;
    out.name = "hotswap";
    GuardImage img = build_image_from_file((demos_dir() / "tutorial.gim").string());

    Machine before = load_image(img);
    int first_exit = 0;
    std::string first = run_traced(before, 1000, true, first_exit);

    AsmResult repl = assemble(kSwappedFoo);
    if (!repl.ok()) throw CoreError("hotswap replacement failed to assemble");
    img.names.rename("foo", "oldfoo");
    image_bind_object(img, "foo", *repl.unit, "util_data");

    Machine after = load_image(img);
    std::string second = run_traced(after, 1000, true, out.exit_code);
    if (first_exit != 0) out.exit_code = first_exit;

    out.trace = "== before swap ==\n" + first + "== after swap ==\n" + second;
    return out;
}

ScenarioResult scenario_netfilter() {
    ScenarioResult out;
    out.name = "netfilter";
    Machine m = load_image(build_image_from_file((demos_dir() / "netfilter.gim").string()));
    m.input = demo_packets(50);
    out.trace = run_traced(m, 20000, false, out.exit_code);
    return out;
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"tutorial", "linkfault", "hotswap", "netfilter"};
}

ScenarioResult run_scenario(const std::string& name) {
    if (name == "tutorial") return scenario_tutorial();
    if (name == "linkfault") return scenario_linkfault();
    if (name == "hotswap") return scenario_hotswap();
    if (name == "netfilter") return scenario_netfilter();
    throw CoreError("unknown scenario: " + name);
}

std::vector<ScenarioCheck> check_scenarios(bool regen) {
    std::vector<ScenarioCheck> out;
    for (const std::string& name : scenario_names()) {
        ScenarioCheck check;
        check.name = name;
        ScenarioResult r = run_scenario(name);
        std::filesystem::path golden = golden_dir() / (name + ".trace");

        if (regen) {
            std::filesystem::create_directories(golden_dir());
            std::ofstream(golden, std::ios::binary) << r.trace;
            check.matched = true;
            check.message = "regenerated";
        } else {
            std::ifstream in(golden, std::ios::binary);
            if (!in) {
                check.message = "missing golden file " + golden.string();
            } else {
                std::ostringstream os;
                os << in.rdbuf();
                if (os.str() == r.trace) {
                    check.matched = true;
                } else {
                    check.message = "trace differs from " + golden.string();
                }
            }
        }
        out.push_back(std::move(check));
    }
    return out;
}

std::vector<std::uint8_t> demo_packets(int count) {
    std::vector<std::uint8_t> stream;
    std::mt19937_64 rng(0x67756172);
    for (int i = 0; i < count; ++i) {
        int len = 1 + static_cast<int>(rng() % 9);
        stream.push_back(static_cast<std::uint8_t>(len));
        for (int j = 0; j < len; ++j)
            stream.push_back(static_cast<std::uint8_t>(rng()));
    }
    stream.push_back(0);
    return stream;
}

std::vector<std::uint8_t> run_filter(const std::vector<std::uint8_t>& stream) {
    Machine m = load_image(build_image_from_file((demos_dir() / "netfilter.gim").string()));
    m.input = stream;
    RunResult r = m.run(64 + 16 * stream.size());
    if (r.status != RunStatus::Halted || r.exit_code != 0)
        throw CoreError("filter demo did not halt cleanly");
    return m.output;
}

std::vector<std::uint8_t> reference_filter(const std::vector<std::uint8_t>& stream) {
    std::vector<std::uint8_t> verdicts;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        std::uint8_t len = stream[pos++];
        if (len == 0) break;
        if (pos >= stream.size()) break;
        verdicts.push_back(stream[pos] < 0x80 ? 1 : 0);
        pos += len;
    }
    return verdicts;
}

}  // namespace gvm::harness
