#include "rdpsim/exploits.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdpsim/coverage.hpp"
#include "rdpsim/micro_isa.hpp"

namespace rdpsim {

namespace {

constexpr uint32_t kFaultMarker = 0xDEADFA17;
constexpr uint32_t kStage1Marker = 0x4B4F3153;  // "S1OK" on the wire

// SRAM layout used by the staged payloads.
constexpr uint32_t kPayloadTable = kSramBase + 0x000;  // boot-from-SRAM vectors
constexpr uint32_t kStage1 = kSramBase + 0x100;
constexpr uint32_t kDumper = kSramBase + 0x200;
constexpr uint32_t kFaultHandler = kSramBase + 0x300;
constexpr uint32_t kHandlerTable = kSramBase + 0x400;
constexpr uint32_t kDmaBuffer = kSramBase + 0x1000;

std::string h(uint32_t v) {
    return hex32(v);
}

// Sweeps [begin, end) word by word out of the UART, then halts.
std::string dumper_source(uint32_t base, uint32_t begin, uint32_t end, uint32_t vtor = 0) {
    std::ostringstream s;
    s << "; flash dumper\n";
    if (vtor) {
        s << "    MOVE_IMM r3, " << h(reg::VTOR) << "\n"
          << "    MOVE_IMM r4, " << h(vtor) << "\n"
          << "    STORE_WORD r4, [r3]\n";
    }
    s << "    MOVE_IMM r0, " << h(begin) << "\n"
      << "    MOVE_IMM r2, " << h(end) << "\n"
      << "loop:\n"
      << "    BRANCH_IF_EQ r0, r2, done\n"
      << "    LOAD_WORD r1, [r0]\n"
      << "    UART_OUT r1\n"
      << "    ADD_IMM r0, 4\n"
      << "    BRANCH loop\n"
      << "done:\n"
      << "    HALT\n";
    (void)base;
    return s.str();
}

std::string fault_handler_source() {
    return "    MOVE_IMM r1, " + h(kFaultMarker) + "\n    UART_OUT r1\n    HALT\n";
}

// Vector table whose NMI entry points at `nmi` and whose fault entries point
// at the fault handler; everything else is left at the handler too.
std::vector<uint8_t> handler_table(uint32_t entries, uint32_t nmi) {
    std::vector<uint8_t> t(4 * entries);
    for (uint32_t i = 0; i < entries; ++i)
        write_le32(t, 4 * i, kFaultHandler | 1);
    write_le32(t, 0, kSramBase + 0x800);
    if (entries > 2)
        write_le32(t, 8, nmi | 1);
    return t;
}

std::vector<uint8_t> assemble_at(const std::string& src, uint32_t base) {
    return assemble(src, base).bytes;
}

bool write_block(DebugSession& s, uint32_t addr, const std::vector<uint8_t>& bytes) {
    std::vector<uint8_t> b = bytes;
    b.resize((b.size() + 3) & ~size_t(3), 0);
    for (size_t i = 0; i < b.size(); i += 4)
        if (!s.mem_write(addr + uint32_t(i), read_le32(b, i)).ok())
            return false;
    return true;
}

std::optional<uint32_t> read_word(DebugSession& s, uint32_t addr) {
    auto r = s.mem_read(addr);
    if (!r.ok())
        return std::nullopt;
    return r.data;
}

uint32_t dhcsr(DebugSession& s) {
    return read_word(s, reg::DHCSR).value_or(0);
}

ExtractionReport begin(AttackRig& rig, AttackId id) {
    ExtractionReport r;
    r.device = rig.profile().name;
    r.attack = id;
    r.recovered.assign(rig.profile().flash_size, 0xFF);
    r.valid.assign(rig.profile().flash_words(), false);
    return r;
}

ExtractionReport& finish(ExtractionReport& r, AttackRig& rig, std::optional<AttackStatus> forced = {}) {
    r.finish();
    r.op_count = rig.op_count();
    r.transcript = rig.transcript();
    if (forced)
        r.status = *forced;
    else if (r.valid_words() == r.valid.size())
        r.status = AttackStatus::SUCCESS;
    else if (r.valid_words() > 0)
        r.status = AttackStatus::PARTIAL;
    else
        r.status = AttackStatus::FAILED;
    return r;
}

ExtractionReport not_vulnerable(ExtractionReport& r, AttackRig& rig, const std::string& why) {
    r.detail = why;
    // Nothing gathered by a failed probe counts as recovered.
    std::fill(r.valid.begin(), r.valid.end(), false);
    std::fill(r.recovered.begin(), r.recovered.end(), 0xFF);
    return finish(r, rig, AttackStatus::NOT_VULNERABLE);
}

// Words streamed by the dumper; stops at a trailing fault marker.
uint32_t take_uart_words(ExtractionReport& r, const std::vector<uint8_t>& uart, uint32_t first_offset,
                         uint32_t expected_words, bool& faulted) {
    uint32_t n = uint32_t(uart.size() / 4);
    faulted = false;
    if (n > expected_words) {
        faulted = true;
        n = expected_words;
    } else if (n < expected_words) {
        faulted = n > 0 && read_le32(uart, 4 * (n - 1)) == kFaultMarker;
        if (faulted)
            --n;
    }
    for (uint32_t i = 0; i < n; ++i)
        r.set_word(first_offset + 4 * i, read_le32(uart, 4 * i));
    return n;
}

uint64_t dump_budget(const DeviceProfile& p, const AttackOptions& opt) {
    return std::max<uint64_t>(opt.run_budget_cycles, 6ull * p.flash_words() + 4096);
}

bool sram_fits(const DeviceProfile& p, uint32_t addr, size_t bytes) {
    return addr >= kSramBase && addr - kSramBase + bytes <= p.sram_size;
}

// ---- D1-A ---------------------------------------------------------------------

std::optional<uint32_t> find_load_gadget(DebugSession& s, const DeviceProfile& p) {
    auto want = encode(Instr{Op::LOAD_WORD, 1, 0, 0});
    uint32_t lo = read_le32({want.begin(), want.end()}, 0);
    uint32_t hi_mask = 0;  // immediate is ignored by LOAD_WORD
    (void)hi_mask;
    for (uint32_t off = 0; off + 8 <= p.bootloader_size; off += 8) {
        auto w = read_word(s, p.bootloader_base + off);
        if (!w)
            return std::nullopt;
        if (*w == lo)
            return p.bootloader_base + off;
    }
    return std::nullopt;
}

bool d1a_gadget_path(ExtractionReport& r, AttackRig& rig, DebugSession& s) {
    const auto& p = rig.profile();
    auto gadget = find_load_gadget(s, p);
    if (!gadget) {
        rig.note("no load gadget in bootloader");
        return false;
    }
    rig.note("load gadget", {{"address", *gadget}});
    for (uint32_t off = 0; off < p.flash_size; off += 4) {
        s.reg_write(Reg::R0, kFlashBase + off);
        s.reg_write(Reg::PC, *gadget);
        auto step = s.single_step();
        if (!step.executed || step.fault_raised || step.lockup) {
            rig.note("gadget load faulted", {{"offset", off}});
            return false;
        }
        r.set_word(off, s.reg_read(Reg::R1));
    }
    return true;
}

bool d1a_sram_path(ExtractionReport& r, AttackRig& rig, DebugSession& s, const AttackOptions& opt) {
    const auto& p = rig.profile();
    auto code = assemble_at(dumper_source(kDumper, kFlashBase, kFlashBase + p.flash_size), kDumper);
    auto handler = assemble_at(fault_handler_source(), kFaultHandler);
    if (!write_block(s, kDumper, code) || !write_block(s, kFaultHandler, handler))
        return false;
    auto table = handler_table(p.vector_table_entries(), kFaultHandler);
    if (p.has_vtor) {
        if (!write_block(s, kHandlerTable, table))
            return false;
        s.mem_write(reg::VTOR, kHandlerTable);
    }
    s.reg_write(Reg::PC, kDumper);
    s.reg_write(Reg::XPSR, 1u << 24);
    s.resume();
    rig.run(dump_budget(p, opt));
    bool faulted = false;
    uint32_t got = take_uart_words(r, rig.uart_read(), 0, p.flash_words(), faulted);
    if (got == 0) {
        rig.note("SRAM code cannot read flash");
        return false;
    }
    return true;
}

// ---- D1-B -------------------------------------------------------------------

bool halted(DebugSession& s) {
    return dhcsr(s) & reg::S_HALT;
}

bool halt_core(AttackRig& rig, DebugSession& s) {
    s.set_c_debugen(true);
    s.halt();
    if (halted(s))
        return true;
    // The core may be stuck in lockup; a reset pulse brings it back.
    rig.reset_pulse();
    s.halt();
    return halted(s);
}

}  // namespace

// ---- report helpers ---------------------------------------------------------------

uint32_t ExtractionReport::valid_words() const {
    uint32_t n = 0;
    for (bool b : valid)
        n += b;
    return n;
}

void ExtractionReport::set_word(uint32_t offset, uint32_t value) {
    if (offset + 4 > recovered.size())
        return;
    write_le32(recovered, offset, value);
    valid[offset / 4] = true;
}

void ExtractionReport::finish() {
    coverage_percent = valid.empty() ? 0.0 : 100.0 * valid_words() / valid.size();
}

// ---- attacks -------------------------------------------------------------------

ExtractionReport exploit_d0(AttackRig& rig, const AttackOptions&) {
    auto r = begin(rig, AttackId::D0);
    const auto& p = rig.profile();
    try {
        auto s = rig.attach();
        if (!read_word(s, kFlashBase))
            return not_vulnerable(r, rig, "debugger flash reads denied");
        for (uint32_t off = 0; off < p.flash_size; off += 4) {
            auto w = read_word(s, kFlashBase + off);
            if (!w)
                break;
            r.set_word(off, *w);
        }
        s.detach();
    } catch (const ConnectRefused&) {
        return not_vulnerable(r, rig, "debug port refused");
    }
    return finish(r, rig);
}

ExtractionReport exploit_d1a(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::D1A);
    try {
        auto s = rig.attach();
        if (!halt_core(rig, s))
            return not_vulnerable(r, rig, "core cannot be halted");
        // The SRAM loop goes first: a failed attempt ends in the SRAM fault
        // handler with the core halted, whereas a failed gadget probe leaves a
        // fault pending that only a reset clears.
        if (d1a_sram_path(r, rig, s, opt)) {
            r.detail = "SRAM-resident load loop";
            return finish(r, rig);
        }
        std::fill(r.valid.begin(), r.valid.end(), false);
        if (!halted(s) && !halt_core(rig, s))
            return not_vulnerable(r, rig, "core cannot be halted");
        if (d1a_gadget_path(r, rig, s)) {
            r.detail = "bootloader load gadget";
            return finish(r, rig);
        }
    } catch (const ProtocolError& e) {
        return not_vulnerable(r, rig, e.what());
    }
    return not_vulnerable(r, rig, "neither bootloader gadgets nor SRAM code can read flash");
}

ExtractionReport exploit_d1b(AttackRig& rig, const AttackOptions&) {
    auto r = begin(rig, AttackId::D1B);
    const auto& p = rig.profile();
    const auto& c = p.d1b_params;
    try {
        auto s = rig.attach();
        if (!halt_core(rig, s))
            return not_vulnerable(r, rig, "core cannot be halted");

        // Exceptions the debugger may pend and whose entry stays in the table.
        std::vector<int> candidates;
        uint32_t entries = p.vector_table_entries();
        for (int n = 2; n < int(entries); ++n)
            if (n >= 16 || s.pend_exception(n))
                candidates.push_back(n);
        // Drain the probe pends.
        rig.reset_pulse();
        if (!halt_core(rig, s))
            return not_vulnerable(r, rig, "core cannot be halted");

        bool any = false;
        for (uint32_t v = 0; v < p.flash_size; v += c.vtor_granularity) {
            s.mem_write(reg::VTOR, kFlashBase + v);
            for (int n : candidates) {
                uint32_t off = vector_fetch_address(c, v, uint32_t(n));
                if (off + 4 > p.flash_size || r.valid[off / 4])
                    continue;
                if (!s.pend_exception(n))
                    continue;
                auto step = s.single_step();
                if (step.lockup || !step.exception) {
                    if (!any)
                        return not_vulnerable(r, rig, "vector fetch from flash denied");
                    rig.reset_pulse();
                    if (!halt_core(rig, s))
                        return finish(r, rig);
                    s.mem_write(reg::VTOR, kFlashBase + v);
                    continue;
                }
                uint32_t pc = s.reg_read(Reg::PC);
                uint32_t t = (s.reg_read(Reg::XPSR) >> 24) & 1;
                r.set_word(off, pc | t);
                any = true;
            }
        }
        r.detail = "exception entry vector reads";
    } catch (const ProtocolError& e) {
        return not_vulnerable(r, rig, e.what());
    }
    r.finish();
    auto& out = finish(r, rig);
    if (out.status == AttackStatus::PARTIAL)
        out.status = AttackStatus::SUCCESS;  // partial reach is the expected outcome
    return out;
}

ExtractionReport exploit_d1c(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::D1C);
    const auto& p = rig.profile();
    try {
        auto s = rig.attach();
        uint32_t st = dhcsr(s);
        if (st & (reg::C_DEBUGEN | reg::S_LOCKUP)) {
            r.detail = "core already under debug control or stopped; flash presumed locked";
            return finish(r, rig, AttackStatus::PRECONDITION_LOST);
        }
        auto code = assemble_at(dumper_source(kDumper, kFlashBase, kFlashBase + p.flash_size), kDumper);
        auto handler = assemble_at(fault_handler_source(), kFaultHandler);
        auto table = handler_table(p.vector_table_entries(), kDumper);
        if (!write_block(s, kDumper, code) || !write_block(s, kFaultHandler, handler) ||
            !write_block(s, kHandlerTable, table))
            return not_vulnerable(r, rig, "SRAM not writable");
        s.mem_write(reg::VTOR, kHandlerTable);
        auto vt = read_word(s, reg::VTOR);
        if (!vt || *vt != kHandlerTable)
            return not_vulnerable(r, rig, "VTOR not relocatable");
        if (!s.pend_exception(kNmi))
            return not_vulnerable(r, rig, "NMI not pendable");
        rig.run(dump_budget(p, opt));
        bool faulted = false;
        uint32_t got = take_uart_words(r, rig.uart_read(), 0, p.flash_words(), faulted);
        if (got == 0)
            return not_vulnerable(r, rig, "NMI handler cannot read flash");
        r.detail = "NMI handler dump";
    } catch (const ProtocolError& e) {
        return not_vulnerable(r, rig, e.what());
    }
    return finish(r, rig);
}

ExtractionReport exploit_d2(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::D2);
    const auto& p = rig.profile();
    try {
        auto s = rig.attach();
        uint32_t chunk = std::min<uint32_t>(opt.dma_chunk_words, (p.sram_size - 0x1000) / 4);
        if (!sram_fits(p, kDmaBuffer, 4))
            return not_vulnerable(r, rig, "no SRAM room for a DMA buffer");
        // Stop the CPU so it cannot disturb the transfer. Crash it through an
        // unreadable vector table first: that never sets C_DEBUGEN, which
        // some parts answer by locking every master out of flash.
        s.mem_write(reg::VTOR, 0xF0000000);
        s.pend_exception(kNmi);
        rig.run(4);
        if (dhcsr(s) & reg::S_LOCKUP) {
            r.detail = "CPU crashed via unreadable vector table";
        } else {
            if (!halt_core(rig, s))
                rig.note("core not halted");
            r.detail = "CPU halted";
        }
        auto probe = rig.dma_copy(s, kFlashBase, kDmaBuffer, 1);
        if (probe.state != DmaState::DONE)
            return not_vulnerable(r, rig, "DMA flash read denied");
        for (uint32_t w = 0; w < p.flash_words(); w += chunk) {
            uint32_t n = std::min(chunk, p.flash_words() - w);
            auto rep = rig.dma_copy(s, kFlashBase + 4 * w, kDmaBuffer, n);
            uint32_t ok = rep.state == DmaState::DONE ? n : rep.words_done;
            for (uint32_t i = 0; i < ok; ++i) {
                auto v = read_word(s, kDmaBuffer + 4 * i);
                if (v)
                    r.set_word(4 * (w + i), *v);
            }
            if (rep.state != DmaState::DONE)
                break;
        }
    } catch (const ProtocolError& e) {
        return not_vulnerable(r, rig, e.what());
    }
    return finish(r, rig);
}

ExtractionReport exploit_h0(AttackRig& rig, const AttackOptions&) {
    auto r = begin(rig, AttackId::H0);
    const auto& p = rig.profile();
    try {
        auto s = rig.attach();
        r.extra["idcode"] = s.idcode();
        if (!read_word(s, kFlashBase)) {
            s.detach();
            return not_vulnerable(r, rig, "debug port open but flash reads denied");
        }
        for (uint32_t off = 0; off < p.flash_size; off += 4)
            if (auto w = read_word(s, kFlashBase + off))
                r.set_word(off, *w);
        s.detach();
        r.detail = "debug port open and flash readable";
    } catch (const ConnectRefused&) {
        return not_vulnerable(r, rig, "debug port refused: RDP level 2 in effect");
    }
    return finish(r, rig);
}

ExtractionReport exploit_h1(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::H1);
    const auto& p = rig.profile();
    if (!p.has(VulnFlag::H1) || !p.dual_die || !p.qspi_layout || !p.obfuscation)
        return not_vulnerable(r, rig, "no exposed inter-die QSPI link");
    const auto& L = *p.qspi_layout;

    ObfuscationKey key = p.obfuscation->key;
    if (opt.infer_matrices) {
        auto twin = rig.make_twin();
        auto twin_trace = capture_probe_trace(*twin);
        rig.note("probe pages captured on twin", {{"transactions", twin_trace.transactions.size()}});
        try {
            key = infer_key_from_trace(twin_trace, L);
        } catch (const InferenceError& e) {
            r.detail = std::string("inference failed: ") + e.what();
            return finish(r, rig, AttackStatus::FAILED);
        }
        r.extra["inferred_key"] = to_json(key);
        r.extra["inferred_matches_profile"] = key == p.obfuscation->key;
    }

    rig.start_capture();
    rig.power_cycle();
    uint32_t boot_pages = std::min(L.initial_fetch, p.flash_size) / L.page_size;
    if (opt.touch_all_pages && boot_pages < p.page_count()) {
        // Any DMA request reaches the flash controller, denied or not, and
        // pulls the page across the link.
        try {
            auto s = rig.attach();
            for (uint32_t pg = boot_pages; pg < p.page_count(); ++pg)
                rig.dma_copy(s, kFlashBase + pg * L.page_size, kDmaBuffer, 1);
            s.detach();
        } catch (const ProtocolError& e) {
            rig.note(std::string("cannot touch remaining pages: ") + e.what());
        }
    }
    auto trace = rig.stop_capture();
    auto fw = decode_firmware(trace, L, p.flash_size, key);
    for (uint32_t pg = 0; pg < fw.page_present.size(); ++pg) {
        if (!fw.page_present[pg])
            continue;
        for (uint32_t o = 0; o < L.page_size; o += 4)
            r.set_word(pg * L.page_size + o, read_le32(fw.image, pg * L.page_size + o));
    }
    r.extra["gaps"] = gaps_to_json(fw);
    r.extra["trace_transactions"] = trace.transactions.size();
    r.detail = opt.infer_matrices ? "trace decoded with inferred matrices"
                                  : "trace decoded with known matrices";
    return finish(r, rig);
}

ExtractionReport exploit_h2(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::H2);
    const auto& p = rig.profile();
    if (!p.has(VulnFlag::H2) || !p.dual_die || !p.qspi_layout)
        return not_vulnerable(r, rig, "no exposed option-byte transfer");
    const auto& L = *p.qspi_layout;
    auto inj = opt.injector.value_or(h2_address_injector());
    rig.arm_injector(inj);
    for (uint32_t attempt = 1; attempt <= std::max<uint32_t>(1, opt.attempts); ++attempt) {
        rig.start_capture();
        rig.power_cycle();
        auto trace = rig.stop_capture();
        for (const auto& t : trace.transactions) {
            if (t.data.size() == L.option_bytes_size) {
                rig.note("option-byte transfer", {{"attempt", attempt},
                                                  {"address", t.address},
                                                  {"raw", uint32_t(t.data[0]) << 8 | t.data[1]}});
                break;
            }
        }
        try {
            auto s = rig.attach();
            if (!read_word(s, kFlashBase)) {
                s.detach();
                continue;
            }
            for (uint32_t off = 0; off < p.flash_size; off += 4)
                if (auto w = read_word(s, kFlashBase + off))
                    r.set_word(off, *w);
            if (auto ob = read_word(s, kOptionBytesBase))
                r.extra["stored_option_raw"] = ((*ob & 0xFF) << 8) | ((*ob >> 8) & 0xFF);
            s.detach();
            r.extra["attempts"] = attempt;
            r.detail = "option-byte address forced to the factory block";
            rig.disarm_injector();
            return finish(r, rig);
        } catch (const ProtocolError& e) {
            rig.note(std::string("attempt failed: ") + e.what(), {{"attempt", attempt}});
        }
    }
    rig.disarm_injector();
    r.detail = "fault did not lower the protection level";
    return finish(r, rig, AttackStatus::FAILED);
}

ExtractionReport exploit_h3(AttackRig& rig, const AttackOptions& opt) {
    auto r = begin(rig, AttackId::H3);
    const auto& p = rig.profile();
    if (!p.has(VulnFlag::H3))
        return not_vulnerable(r, rig, "no FPB reset-vector remap");

    // Stage 1 patches the reset vector fetch, stage 2 is the dumper.
    std::ostringstream s1;
    s1 << "    MOVE_IMM r0, " << h(reg::FP_COMP0) << "\n"
       << "    MOVE_IMM r1, " << h(0x4 | 1) << "\n"
       << "    STORE_WORD r1, [r0]\n"
       << "    MOVE_IMM r0, " << h(reg::FP_REPL0) << "\n"
       << "    MOVE_IMM r1, " << h(kDumper | 1) << "\n"
       << "    STORE_WORD r1, [r0]\n"
       << "    MOVE_IMM r0, " << h(reg::FP_CTRL) << "\n"
       << "    MOVE_IMM r1, 3\n"
       << "    STORE_WORD r1, [r0]\n"
       << "    MOVE_IMM r1, " << h(kStage1Marker) << "\n"
       << "    UART_OUT r1\n"
       << "    HALT\n";
    auto stage1 = assemble_at(s1.str(), kStage1);
    auto stage2 = assemble_at(
        dumper_source(kDumper, kFlashBase, kFlashBase + p.flash_size, kHandlerTable), kDumper);
    auto handler = assemble_at(fault_handler_source(), kFaultHandler);
    std::vector<uint8_t> boot(8);
    write_le32(boot, 0, kSramBase + 0x800);
    write_le32(boot, 4, kStage1 | 1);

    try {
        auto s = rig.attach();
        bool ok = write_block(s, kPayloadTable, boot) && write_block(s, kStage1, stage1) &&
                  write_block(s, kDumper, stage2) && write_block(s, kFaultHandler, handler) &&
                  write_block(s, kHandlerTable, handler_table(p.vector_table_entries(), kFaultHandler));
        s.detach();
        if (!ok)
            return not_vulnerable(r, rig, "SRAM not writable");
    } catch (const ProtocolError& e) {
        return not_vulnerable(r, rig, e.what());
    }

    rig.set_boot_pins(BootMode::SRAM);
    if (opt.skip_glitch)
        rig.reset_pulse();
    else
        rig.glitch(opt.glitch_us);
    rig.run(4096);
    auto s1_out = rig.uart_read();
    if (s1_out.size() < 4 || read_le32(s1_out, 0) != kStage1Marker) {
        rig.set_boot_pins(BootMode::FLASH);
        r.detail = "stage 1 did not run: SRAM lost across the glitch";
        return finish(r, rig, AttackStatus::GLITCH_FAILED);
    }

    rig.set_boot_pins(BootMode::FLASH);
    rig.reset_pulse();
    rig.run(dump_budget(p, opt));
    bool faulted = false;
    take_uart_words(r, rig.uart_read(), 0, p.flash_words(), faulted);
    r.detail = faulted ? "stage 2 ran but flash reads faulted" : "reset vector remapped to SRAM dumper";
    if (faulted && r.valid_words() == 0)
        return finish(r, rig, AttackStatus::FAILED);
    return finish(r, rig);
}

QspiTrace capture_probe_trace(Device& twin) {
    const auto& p = twin.profile();
    if (!p.qspi_layout)
        throw ConfigError("part has no QSPI link");
    auto s = DebugSession::attach(twin);
    s.program_flash(inference_probe_image(p.flash_size, p.qspi_layout->page_size));
    s.detach();
    twin.start_capture();
    twin.apply_power_event(PowerEvent::power_off());
    twin.apply_power_event(PowerEvent::power_on());
    return twin.stop_capture();
}

uint64_t op_budget(AttackId id, const DeviceProfile& p) {
    uint64_t n = p.flash_words();
    switch (id) {
    case AttackId::D1A:
    case AttackId::D1B: return 4 * n + 1024;
    case AttackId::D1C:
    case AttackId::H1:
    case AttackId::H3: return 1024;
    default: return n + 1024;
    }
}

ExtractionReport run_attack(AttackId id, AttackRig& rig, const AttackOptions& opt) {
    switch (id) {
    case AttackId::D0: return exploit_d0(rig, opt);
    case AttackId::D1A: return exploit_d1a(rig, opt);
    case AttackId::D1B: return exploit_d1b(rig, opt);
    case AttackId::D1C: return exploit_d1c(rig, opt);
    case AttackId::D2: return exploit_d2(rig, opt);
    case AttackId::H0: return exploit_h0(rig, opt);
    case AttackId::H1: return exploit_h1(rig, opt);
    case AttackId::H2: return exploit_h2(rig, opt);
    case AttackId::H3: return exploit_h3(rig, opt);
    }
    throw ConfigError("unknown attack");
}

// ---- serialization --------------------------------------------------------------

nlohmann::json report_to_json(const ExtractionReport& r) {
    std::string bitmap;
    bitmap.reserve(r.valid.size());
    for (bool b : r.valid)
        bitmap += b ? '1' : '0';
    return {{"device", r.device},
            {"attack", r.attack},
            {"status", r.status},
            {"coverage_percent", r.coverage_percent},
            {"valid_words", r.valid_words()},
            {"total_words", r.valid.size()},
            {"op_count", r.op_count},
            {"detail", r.detail},
            {"extra", r.extra},
            {"valid_bitmap", bitmap}};
}

void save_report(const ExtractionReport& r, const std::string& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    auto base = std::filesystem::path(dir) / stem;
    {
        std::ofstream bin(base.string() + ".bin", std::ios::binary);
        if (!bin)
            throw ConfigError("cannot write " + base.string() + ".bin");
        bin.write(reinterpret_cast<const char*>(r.recovered.data()), std::streamsize(r.recovered.size()));
    }
    auto j = report_to_json(r);
    j["image"] = stem + ".bin";
    j["transcript"] = stem + ".transcript.json";
    std::ofstream js(base.string() + ".json");
    js << j.dump(2) << '\n';
    r.transcript.save(base.string() + ".transcript.json");
}

std::vector<uint8_t> transcript_result_bytes(const Transcript& t) {
    std::vector<uint8_t> out;
    auto push_word = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i)
            out.push_back(uint8_t(v >> (8 * i)));
    };
    for (const auto& rec : t.records()) {
        const auto& res = rec.result;
        if (!res.is_object())
            continue;
        for (const auto& [k, v] : res.items()) {
            if (v.is_number_unsigned())
                push_word(v.get<uint32_t>());
            else if (k == "hex" && v.is_string()) {
                const auto& s = v.get_ref<const std::string&>();
                for (size_t i = 0; i + 1 < s.size(); i += 2)
                    out.push_back(uint8_t(std::stoul(s.substr(i, 2), nullptr, 16)));
            }
        }
    }
    return out;
}

}  // namespace rdpsim
