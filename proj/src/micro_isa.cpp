#include "rdpsim/micro_isa.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace rdpsim {

std::array<uint8_t, 8> encode(const Instr& in) {
    return {static_cast<uint8_t>(in.op), in.a, in.b, 0,
            uint8_t(in.imm), uint8_t(in.imm >> 8), uint8_t(in.imm >> 16), uint8_t(in.imm >> 24)};
}

std::optional<Instr> decode(const std::array<uint8_t, 8>& b) {
    uint8_t op = b[0];
    if (op < 0x01 || op > 0x08 || b[3] != 0)
        return std::nullopt;
    Instr in;
    in.op = static_cast<Op>(op);
    in.a = b[1];
    in.b = b[2];
    in.imm = uint32_t(b[4]) | uint32_t(b[5]) << 8 | uint32_t(b[6]) << 16 | uint32_t(b[7]) << 24;
    if (in.a >= kNumGeneralRegs || in.b >= kNumGeneralRegs)
        return std::nullopt;
    return in;
}

std::optional<Instr> decode_words(uint32_t lo, uint32_t hi) {
    return decode({uint8_t(lo), uint8_t(lo >> 8), uint8_t(lo >> 16), uint8_t(lo >> 24),
                   uint8_t(hi), uint8_t(hi >> 8), uint8_t(hi >> 16), uint8_t(hi >> 24)});
}

namespace {

const char* mnemonic(Op op) {
    switch (op) {
    case Op::LOAD_WORD: return "LOAD_WORD";
    case Op::STORE_WORD: return "STORE_WORD";
    case Op::MOVE_IMM: return "MOVE_IMM";
    case Op::ADD_IMM: return "ADD_IMM";
    case Op::BRANCH: return "BRANCH";
    case Op::BRANCH_IF_EQ: return "BRANCH_IF_EQ";
    case Op::UART_OUT: return "UART_OUT";
    case Op::HALT: return "HALT";
    }
    return "?";
}

std::string reg_name(uint8_t r) {
    if (r == 13)
        return "sp";
    if (r == 14)
        return "lr";
    return "r" + std::to_string(r);
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

std::vector<std::string> split_operands(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty())
        out.push_back(trim(cur));
    return out;
}

struct Line {
    int number;
    std::string label;
    std::string op;  // upper-case mnemonic or directive
    std::vector<std::string> args;
};

}  // namespace

std::string disassemble(const Instr& in) {
    std::ostringstream os;
    os << mnemonic(in.op);
    auto imm = [&] {
        std::ostringstream h;
        h << "0x" << std::hex << in.imm;
        return h.str();
    };
    switch (in.op) {
    case Op::LOAD_WORD:
    case Op::STORE_WORD: os << ' ' << reg_name(in.a) << ", " << reg_name(in.b); break;
    case Op::MOVE_IMM:
    case Op::ADD_IMM: os << ' ' << reg_name(in.a) << ", " << imm(); break;
    case Op::BRANCH: os << ' ' << imm(); break;
    case Op::BRANCH_IF_EQ:
        os << ' ' << reg_name(in.a) << ", " << reg_name(in.b) << ", " << imm();
        break;
    case Op::UART_OUT: os << ' ' << reg_name(in.a); break;
    case Op::HALT: break;
    }
    return os.str();
}

uint32_t AssembledProgram::label(const std::string& name) const {
    auto it = labels.find(name);
    if (it == labels.end())
        throw AssemblyError("unknown label " + name);
    return it->second;
}

AssembledProgram assemble(const std::string& text, uint32_t base) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        size_t c = raw.find_first_of(";#");
        std::string s = trim(c == std::string::npos ? raw : raw.substr(0, c));
        Line line{number, "", "", {}};
        size_t colon = s.find(':');
        if (colon != std::string::npos) {
            line.label = trim(s.substr(0, colon));
            s = trim(s.substr(colon + 1));
        }
        if (!s.empty()) {
            size_t sp = s.find_first_of(" \t");
            line.op = upper(s.substr(0, sp));
            if (sp != std::string::npos)
                line.args = split_operands(s.substr(sp + 1));
        }
        if (!line.label.empty() || !line.op.empty())
            lines.push_back(line);
    }

    auto fail = [](const Line& l, const std::string& msg) -> AssemblyError {
        return AssemblyError("line " + std::to_string(l.number) + ": " + msg);
    };
    auto number_of = [&](const Line& l, const std::string& s) -> uint32_t {
        try {
            size_t used = 0;
            unsigned long v = std::stoul(s, &used, 0);
            if (used != s.size())
                throw std::invalid_argument(s);
            return static_cast<uint32_t>(v);
        } catch (const std::exception&) {
            throw fail(l, "bad number '" + s + "'");
        }
    };

    AssembledProgram prog;
    prog.base = base;

    // Pass 1: addresses.
    uint32_t pc = base;
    for (const auto& l : lines) {
        if (!l.label.empty()) {
            if (prog.labels.count(l.label))
                throw fail(l, "duplicate label " + l.label);
            prog.labels[l.label] = pc;
        }
        if (l.op.empty())
            continue;
        if (l.op == ".ORG") {
            if (l.args.size() != 1)
                throw fail(l, ".org takes one address");
            uint32_t to = number_of(l, l.args[0]);
            if (to < pc)
                throw fail(l, ".org moves backwards");
            pc = to;
        } else if (l.op == ".WORD") {
            pc += 4 * static_cast<uint32_t>(l.args.size());
        } else {
            pc += kInstrSize;
        }
    }

    auto value_of = [&](const Line& l, const std::string& expr) -> uint32_t {
        std::string e = trim(expr);
        size_t op = e.find_first_of("+|");
        std::string head = trim(e.substr(0, op));
        uint32_t v;
        if (!head.empty() && (std::isalpha(static_cast<unsigned char>(head[0])) || head[0] == '_')) {
            auto it = prog.labels.find(head);
            if (it == prog.labels.end())
                throw fail(l, "unknown label " + head);
            v = it->second;
        } else {
            v = number_of(l, head);
        }
        if (op != std::string::npos) {
            uint32_t rhs = number_of(l, trim(e.substr(op + 1)));
            v = e[op] == '+' ? v + rhs : (v | rhs);
        }
        return v;
    };
    auto reg_of = [&](const Line& l, const std::string& s) -> uint8_t {
        std::string r = upper(trim(s));
        if (r == "SP")
            return 13;
        if (r == "LR")
            return 14;
        if (r.size() >= 2 && r[0] == 'R') {
            uint32_t n = number_of(l, r.substr(1));
            if (n < kNumGeneralRegs)
                return static_cast<uint8_t>(n);
        }
        throw fail(l, "bad register '" + s + "'");
    };
    auto need = [&](const Line& l, size_t n) {
        if (l.args.size() != n)
            throw fail(l, l.op + " takes " + std::to_string(n) + " operand(s)");
    };

    // Pass 2: emit.
    pc = base;
    auto emit_bytes = [&](const uint8_t* p, size_t n) {
        prog.bytes.insert(prog.bytes.end(), p, p + n);
        pc += static_cast<uint32_t>(n);
    };
    for (const auto& l : lines) {
        if (l.op.empty())
            continue;
        if (l.op == ".ORG") {
            uint32_t to = number_of(l, l.args[0]);
            prog.bytes.resize(prog.bytes.size() + (to - pc), 0);
            pc = to;
            continue;
        }
        if (l.op == ".WORD") {
            for (const auto& a : l.args) {
                uint32_t v = value_of(l, a);
                uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
                emit_bytes(b, 4);
            }
            continue;
        }
        Instr ins;
        if (l.op == "LOAD_WORD" || l.op == "STORE_WORD") {
            need(l, 2);
            ins.op = l.op == "LOAD_WORD" ? Op::LOAD_WORD : Op::STORE_WORD;
            ins.a = reg_of(l, l.args[0]);
            std::string addr = trim(l.args[1]);
            if (addr.size() > 2 && addr.front() == '[' && addr.back() == ']')
                addr = addr.substr(1, addr.size() - 2);
            ins.b = reg_of(l, addr);
        } else if (l.op == "MOVE_IMM" || l.op == "ADD_IMM") {
            need(l, 2);
            ins.op = l.op == "MOVE_IMM" ? Op::MOVE_IMM : Op::ADD_IMM;
            ins.a = reg_of(l, l.args[0]);
            ins.imm = value_of(l, l.args[1]);
        } else if (l.op == "BRANCH") {
            need(l, 1);
            ins.op = Op::BRANCH;
            ins.imm = value_of(l, l.args[0]);
        } else if (l.op == "BRANCH_IF_EQ") {
            need(l, 3);
            ins.op = Op::BRANCH_IF_EQ;
            ins.a = reg_of(l, l.args[0]);
            ins.b = reg_of(l, l.args[1]);
            ins.imm = value_of(l, l.args[2]);
        } else if (l.op == "UART_OUT") {
            need(l, 1);
            ins.op = Op::UART_OUT;
            ins.a = reg_of(l, l.args[0]);
        } else if (l.op == "HALT") {
            need(l, 0);
            ins.op = Op::HALT;
        } else {
            throw fail(l, "unknown mnemonic " + l.op);
        }
        auto enc = encode(ins);
        emit_bytes(enc.data(), enc.size());
    }
    return prog;
}

}  // namespace rdpsim
