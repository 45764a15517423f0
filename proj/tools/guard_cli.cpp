// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "guardvm/image.hpp"

namespace {

using namespace gvm;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CoreError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spew(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CoreError("cannot write " + path);
    out << text;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) std::cout << text;
    else spew(out_path, text);
}

int cmd_asm(const std::string& input, const std::string& out, bool dis) {
    if (dis) {
        emit(out, disassemble(parse_object(slurp(input))));
        return 0;
    }
    AsmResult r = assemble(slurp(input));
    if (!r.ok()) {
        for (const Diagnostic& d : r.diagnostics)
            std::cerr << input << ":" << d.line << ": " << d.message << "\n";
        return 2;
    }
    emit(out, serialize_object(*r.unit));
    return 0;
}

int cmd_build(const std::string& manifest, const std::string& out) {
    emit(out, serialize_image(build_image_from_file(manifest)));
    return 0;
}

int cmd_run(const std::string& image_path, bool trace, bool trace_steps,
            std::uint64_t max_steps, const std::string& in_path,
            const std::string& out_path) {
    Machine m = load_image(parse_image(slurp(image_path)));
    if (!in_path.empty()) {
        std::string bytes = slurp(in_path);
        m.input.assign(bytes.begin(), bytes.end());
    }
    RunResult r = m.run(max_steps);
    if (trace || trace_steps) std::cout << m.log().serialize(trace_steps);
    if (!out_path.empty())
        spew(out_path, std::string(m.output.begin(), m.output.end()));
    return r.exit_code;
}

int cmd_inspect(const std::string& image_path) {
    GuardImage img = parse_image(slurp(image_path));
    std::cout << "image " << img.name << "\n";
    for (const auto& [id, t] : img.tt.entries()) {
        std::cout << "type " << t.name << " S:" << perm_string(t.perms.services)
                  << " U:" << perm_string(t.perms.utilities)
                  << " K:" << perm_string(t.perms.kernel);
        if (t.gate_to) std::cout << " gate=" << layer_letter(*t.gate_to);
        if (t.handler) std::cout << " handler";
        std::cout << "\n";
    }
    for (const auto& [suid, e] : img.gst.entries()) {
        std::cout << "segment " << hex_u64(suid.value);
        if (auto n = img.names.name_of(suid)) std::cout << " " << *n;
        std::cout << " len=" << e.length << " type=" << img.tt.entry(e.type_id).name;
        if (auto t = img.templates.find(suid); t != img.templates.end()) {
            std::cout << " scratch=" << t->second.scratch_size;
            for (std::size_t i = 0; i < t->second.externs.size(); ++i)
                std::cout << " slot" << (i + 1) << "=" << t->second.externs[i];
        }
        std::cout << "\n";
    }
    for (const auto& [kind, h] : img.guest_handlers)
        std::cout << "trap " << trap_kind_name(kind) << " -> "
                  << hex_u64(h.segment.value) << "+" << hex_u64(h.entry) << " at "
                  << layer_letter(h.layer) << "\n";
    std::cout << "entry " << hex_u64(img.entry_segment.value) << "+"
              << hex_u64(img.entry_offset) << "\n";
    return 0;
}

int cmd_rename(const std::string& image_path, const std::string& from,
               const std::string& to, const std::string& out) {
    GuardImage img = parse_image(slurp(image_path));
    img.names.rename(from, to);
    spew(out.empty() ? image_path : out, serialize_image(img));
    return 0;
}

int cmd_bind(const std::string& image_path, const std::string& name,
             const std::string& object_path, const std::string& type_name,
             const std::string& out) {
    GuardImage img = parse_image(slurp(image_path));
    Suid suid = image_bind_object(img, name, parse_object(slurp(object_path)),
                                  type_name);
    spew(out.empty() ? image_path : out, serialize_image(img));
    std::cout << hex_u64(suid.value) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guard: assembler, image builder and virtual machine"};
    app.require_subcommand(1);

    std::string input, output, manifest, image_path, in_path, out_path;
    std::string from, to, name, object_path, type_name;
    bool dis = false, trace = false, trace_steps = false;
    std::uint64_t max_steps = 1u << 20;

    auto* casm = app.add_subcommand("asm", "assemble a source file to an object");
    casm->add_option("input", input)->required();
    casm->add_option("-o,--output", output);
    casm->add_flag("-d,--disassemble", dis, "input is an object; print canonical source");

    auto* cbuild = app.add_subcommand("build", "build an image from a manifest");
    cbuild->add_option("manifest", manifest)->required();
    cbuild->add_option("-o,--output", output);

    auto* crun = app.add_subcommand("run", "run a built image");
    crun->add_option("image", image_path)->required();
    crun->add_flag("--trace", trace, "print the event trace");
    crun->add_flag("--trace-steps", trace_steps, "print the trace with per-step lines");
    crun->add_option("--max-steps", max_steps);
    crun->add_option("--in", in_path, "file fed to the input stream");
    crun->add_option("--out", out_path, "file receiving the output stream");

    auto* cinspect = app.add_subcommand("inspect", "summarize a built image");
    cinspect->add_option("image", image_path)->required();

    auto* crename = app.add_subcommand("rename", "rebind a segment name");
    crename->add_option("image", image_path)->required();
    crename->add_option("from", from)->required();
    crename->add_option("to", to)->required();
    crename->add_option("-o,--output", output);

    auto* cbind = app.add_subcommand("bind", "install an object under a name");
    cbind->add_option("image", image_path)->required();
    cbind->add_option("name", name)->required();
    cbind->add_option("object", object_path)->required();
    cbind->add_option("type", type_name)->required();
    cbind->add_option("-o,--output", output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (casm->parsed()) return cmd_asm(input, output, dis);
        if (cbuild->parsed()) return cmd_build(manifest, output);
        if (crun->parsed())
            return cmd_run(image_path, trace, trace_steps, max_steps, in_path,
                           out_path);
        if (cinspect->parsed()) return cmd_inspect(image_path);
        if (crename->parsed()) return cmd_rename(image_path, from, to, output);
        if (cbind->parsed())
            return cmd_bind(image_path, name, object_path, type_name, output);
    } catch (const std::exception& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
