#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdpsim {

// Fixed 8-byte encoding: [opcode, reg a, reg b, 0, imm32 little-endian].
enum class Op : uint8_t {
    LOAD_WORD = 0x01,     // a <- mem[b]
    STORE_WORD = 0x02,    // mem[b] <- a
    MOVE_IMM = 0x03,      // a <- imm
    ADD_IMM = 0x04,       // a <- a + imm
    BRANCH = 0x05,        // pc <- imm
    BRANCH_IF_EQ = 0x06,  // if a == b: pc <- imm
    UART_OUT = 0x07,      // uart <- a (4 bytes, little-endian)
    HALT = 0x08,
};

constexpr uint32_t kInstrSize = 8;
constexpr int kNumGeneralRegs = 15;  // r0..r12, sp (13), lr (14)

struct Instr {
    Op op = Op::HALT;
    uint8_t a = 0;
    uint8_t b = 0;
    uint32_t imm = 0;

    bool operator==(const Instr&) const = default;
};

std::array<uint8_t, 8> encode(const Instr& in);
std::optional<Instr> decode(const std::array<uint8_t, 8>& bytes);
std::optional<Instr> decode_words(uint32_t lo, uint32_t hi);
std::string disassemble(const Instr& in);

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AssembledProgram {
    uint32_t base = 0;
    std::vector<uint8_t> bytes;
    std::map<std::string, uint32_t> labels;

    uint32_t label(const std::string& name) const;
};

// Line-oriented text format, see docs/micro-isa.md.
AssembledProgram assemble(const std::string& text, uint32_t base);

}  // namespace rdpsim
