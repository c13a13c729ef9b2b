#include <gtest/gtest.h>

#include "rdpsim/micro_isa.hpp"

using namespace rdpsim;

TEST(MicroIsa, EncodingLayout) {
    auto b = encode({Op::LOAD_WORD, 1, 0, 0});
    EXPECT_EQ(b, (std::array<uint8_t, 8>{0x01, 0x01, 0x00, 0x00, 0, 0, 0, 0}));
    b = encode({Op::MOVE_IMM, 3, 0, 0x12345678});
    EXPECT_EQ(b, (std::array<uint8_t, 8>{0x03, 0x03, 0x00, 0x00, 0x78, 0x56, 0x34, 0x12}));
}

TEST(MicroIsa, DecodeRejectsGarbage) {
    EXPECT_FALSE(decode({0x00, 0, 0, 0, 0, 0, 0, 0}));
    EXPECT_FALSE(decode({0x09, 0, 0, 0, 0, 0, 0, 0}));
    EXPECT_FALSE(decode({0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF}));
    EXPECT_FALSE(decode({0x01, 15, 0, 0, 0, 0, 0, 0}));  // no such register
    EXPECT_FALSE(decode({0x01, 1, 0, 7, 0, 0, 0, 0}));   // reserved byte set
}

TEST(MicroIsa, RoundTripAllOps) {
    for (int op = 1; op <= 8; ++op) {
        Instr in{Op(op), uint8_t(op % 15), uint8_t((op * 3) % 15), 0xA5000000u + op};
        auto d = decode(encode(in));
        ASSERT_TRUE(d);
        EXPECT_EQ(*d, in);
        auto b = encode(in);
        uint32_t lo = b[0] | b[1] << 8 | b[2] << 16 | uint32_t(b[3]) << 24;
        uint32_t hi = b[4] | b[5] << 8 | b[6] << 16 | uint32_t(b[7]) << 24;
        EXPECT_EQ(decode_words(lo, hi), d);
    }
}

TEST(MicroIsa, AssemblerLabelsAndDirectives) {
    auto prog = assemble(R"(
        ; comment
        .org 0x20000000
        .word end
        .word loop|1
    loop:
        BRANCH_IF_EQ r0, r2, end   # trailing comment
        LOAD_WORD r1, [r0]
        UART_OUT r1
        ADD_IMM r0, 4
        BRANCH loop
    end:
        HALT
    )", 0x20000000);
    EXPECT_EQ(prog.label("loop"), 0x20000008u);
    EXPECT_EQ(prog.label("end"), 0x20000008u + 5 * 8);
    ASSERT_EQ(prog.bytes.size(), 8u + 6 * 8);
    EXPECT_EQ(prog.bytes[4], 0x09);  // loop|1, low byte
    auto first = decode({prog.bytes[8], prog.bytes[9], prog.bytes[10], prog.bytes[11],
                         prog.bytes[12], prog.bytes[13], prog.bytes[14], prog.bytes[15]});
    ASSERT_TRUE(first);
    EXPECT_EQ(first->op, Op::BRANCH_IF_EQ);
    EXPECT_EQ(first->imm, prog.label("end"));
}

TEST(MicroIsa, AssemblerErrors) {
    EXPECT_THROW(assemble("FROB r0", 0), AssemblyError);
    EXPECT_THROW(assemble("BRANCH nowhere", 0), AssemblyError);
    EXPECT_THROW(assemble("MOVE_IMM r16, 1", 0), AssemblyError);
    EXPECT_THROW(assemble("a:\na:\nHALT", 0), AssemblyError);
}

TEST(MicroIsa, Disassemble) {
    EXPECT_NE(disassemble({Op::LOAD_WORD, 1, 0, 0}).find("LOAD_WORD"), std::string::npos);
}
