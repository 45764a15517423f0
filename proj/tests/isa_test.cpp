// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "doctest.h"
#include "guardvm/isa.hpp"

using namespace gvm;

TEST_CASE("decode of the worked examples") {
    auto ldx = decode({0x12, 0x00, 0x07, 0x00});
    REQUIRE(ldx.has_value());
    CHECK(ldx->opcode == Opcode::LDX);
    CHECK(ldx->mode == AddrMode::Immediate);
    CHECK(ldx->operand == 7);

    auto lda = decode({0x10, 0x01, 0x03, 0x00});
    REQUIRE(lda.has_value());
    CHECK(lda->opcode == Opcode::LDA);
    CHECK(lda->mode == AddrMode::SlotIndexed);
    CHECK(lda->operand == 3);
}

TEST_CASE("unknown opcode bytes do not decode") {
    CHECK_FALSE(decode({0xFF, 0x00, 0x00, 0x00}).has_value());
    CHECK_FALSE(decode({0xFF, 0xFF, 0xFF, 0xFF}).has_value());
}

TEST_CASE("illegal modes do not decode") {
    // STA has no immediate form, branches have no slot forms
    CHECK_FALSE(decode({0x11, 0x00, 0x01, 0x00}).has_value());
    CHECK_FALSE(decode({0x30, 0x01, 0x00, 0x00}).has_value());
    // mode byte out of range
    CHECK_FALSE(decode({0x01, 0x04, 0x00, 0x00}).has_value());
}

TEST_CASE("None-mode operands must be zero except for HALT") {
    CHECK_FALSE(decode({0x01, 0x03, 0x01, 0x00}).has_value());  // NOP with operand
    auto halt = decode({0x00, 0x03, 0x2A, 0x00});
    REQUIRE(halt.has_value());
    CHECK(halt->operand == 42);
}

TEST_CASE("encode/decode is a bijection over the legal instruction set") {
    int legal = 0;
    for (int op = 0; op < 256; ++op) {
        for (int mode = 0; mode < 4; ++mode) {
            Opcode opcode = static_cast<Opcode>(op);
            AddrMode m = static_cast<AddrMode>(mode);
            if (!mode_legal(opcode, m)) continue;
            for (std::uint32_t operand : {0u, 1u, 7u, 255u, 0x1234u, 0xFFFFu}) {
                if (m == AddrMode::None && opcode != Opcode::HALT && operand != 0)
                    continue;
                Instruction ins{opcode, m, static_cast<std::uint16_t>(operand)};
                auto word = encode(ins);
                auto back = decode(word);
                REQUIRE(back.has_value());
                CHECK(*back == ins);
                CHECK(encode(*back) == word);
                ++legal;
            }
        }
    }
    CHECK(legal > 100);
}

TEST_CASE("restricted opcode range is 0x70-0x7F") {
    CHECK(is_restricted(Opcode::RESOLVE));
    CHECK(is_restricted(Opcode::SEGLEN));
    CHECK(is_restricted(Opcode::ALARM));
    CHECK(is_restricted(Opcode::LOGEV));
    CHECK_FALSE(is_restricted(Opcode::TRAP));
    CHECK_FALSE(is_restricted(Opcode::HALT));
}

TEST_CASE("mnemonic round trip") {
    for (int op = 0; op < 256; ++op) {
        Opcode o = static_cast<Opcode>(op);
        bool known = mode_legal(o, AddrMode::Immediate) ||
                     mode_legal(o, AddrMode::SlotIndexed) ||
                     mode_legal(o, AddrMode::SlotDirect) ||
                     mode_legal(o, AddrMode::None);
        if (!known) continue;
        auto back = opcode_from_mnemonic(mnemonic(o));
        REQUIRE(back.has_value());
        CHECK(*back == o);
    }
}
