// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/harness/matrix.hpp"

#include <set>

#include "guardvm/mmu.hpp"

namespace gvm::harness {

namespace {

bool allowed(const Descriptor& d, std::uint64_t off, AccessKind a, Layer l) {
    return std::holds_alternative<std::monostate>(translate(d, off, a, l));
}

std::string describe(int bits, Layer l, AccessKind a) {
    std::string s = "perms=";
    s += (bits & 1) ? 'r' : '-';
    s += (bits & 2) ? 'w' : '-';
    s += (bits & 4) ? 'x' : '-';
    s += " layer=";
    s += layer_letter(l);
    s += " access=";
    s += access_letter(a);
    return s;
}

}  // namespace

MatrixReport check_permission_matrix() {
    MatrixReport report;
    for (int bits = 0; bits < 8; ++bits) {
        for (Layer layer : {Layer::Services, Layer::Utilities, Layer::Kernel}) {
            Descriptor d;
            d.suid = Suid{1};
            d.length = 4;
            d.perms.at(layer).read = bits & 1;
            d.perms.at(layer).write = bits & 2;
            d.perms.at(layer).execute = bits & 4;

            // membership oracle: the access letter must appear in the
            // rendered permission string for that layer
            std::string grants = perm_string(d.perms.at(layer));
            for (AccessKind a : {AccessKind::Read, AccessKind::Write,
                                 AccessKind::ExecuteFetch}) {
                char letter = a == AccessKind::Read    ? 'r'
                              : a == AccessKind::Write ? 'w'
                                                       : 'x';
                bool expect = grants.find(letter) != std::string::npos;
                ++report.cases;
                if (allowed(d, 0, a, layer) != expect)
                    report.failures.push_back(describe(bits, layer, a));

                // the same grant must not leak into the other layers
                for (Layer other : {Layer::Services, Layer::Utilities, Layer::Kernel}) {
                    if (other == layer) continue;
                    if (allowed(d, 0, a, other))
                        report.failures.push_back(describe(bits, layer, a) +
                                                  " leaks into layer " +
                                                  std::string(1, layer_letter(other)));
                }
            }
        }
    }
    return report;
}

MatrixReport check_boundary_offsets() {
    MatrixReport report;
    Descriptor d;
    d.suid = Suid{1};
    d.length = 16;
    d.perms.services = *perms_from_string("rwx");

    const std::uint64_t offsets[] = {0, 15, 16, 17, ~0ull};
    for (std::uint64_t off : offsets) {
        bool expect = off < d.length;
        for (AccessKind a : {AccessKind::Read, AccessKind::Write,
                             AccessKind::ExecuteFetch}) {
            ++report.cases;
            auto r = translate(d, off, a, Layer::Services);
            bool got = std::holds_alternative<std::monostate>(r);
            if (got != expect) {
                report.failures.push_back("offset " + std::to_string(off));
                continue;
            }
            if (!expect &&
                std::get<MemFault>(r).kind != MemFault::Kind::Bounds)
                report.failures.push_back("offset " + std::to_string(off) +
                                          " faulted but not as Bounds");
        }
    }

    Descriptor empty = d;
    empty.length = 0;
    ++report.cases;
    if (allowed(empty, 0, AccessKind::Read, Layer::Services))
        report.failures.push_back("offset 0 of an empty segment was granted");
    return report;
}

}  // namespace gvm::harness
