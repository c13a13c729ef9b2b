#include <gtest/gtest.h>

#include "rdpsim/device.hpp"
#include "rdpsim/exploits.hpp"
#include "rdpsim/micro_isa.hpp"

using namespace rdpsim;

namespace {

// Two-word table at flash 0 followed by `code` at 0x100.
std::vector<uint8_t> image_with(const DeviceProfile& p, const std::string& code) {
    std::vector<uint8_t> img(p.flash_size, 0xFF);
    write_le32(img, 0, kSramBase + p.sram_size);
    write_le32(img, 4, (kFlashBase + 0x100) | 1);
    auto prog = assemble(code, kFlashBase + 0x100).bytes;
    std::copy(prog.begin(), prog.end(), img.begin() + 0x100);
    return img;
}

Device boot(const DeviceProfile& p, const std::vector<uint8_t>& img, uint16_t raw = kRdpRawL0) {
    Device d(p, 1);
    d.provision(img, raw);
    d.apply_power_event(PowerEvent::power_on());
    return d;
}

}  // namespace

TEST(Core, ResetLoadsSpAndPc) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    EXPECT_EQ(d.core().regs[13], kSramBase + p.sram_size);
    EXPECT_EQ(d.core().regs[15], kFlashBase + 0x100);
    EXPECT_TRUE(d.core().t_flag);
    EXPECT_EQ(d.core().run_state, RunState::RUNNING);
}

TEST(Core, RunsProgramAndEmitsUart) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, R"(
        MOVE_IMM r0, 0x11223344
        ADD_IMM r0, 1
        UART_OUT r0
        HALT
    )"));
    d.tick(10);
    EXPECT_EQ(d.core().run_state, RunState::HALTED);
    EXPECT_EQ(d.uart(), (std::vector<uint8_t>{0x45, 0x33, 0x22, 0x11}));
}

TEST(Core, LoadStoreAndBranch) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, R"(
        MOVE_IMM r0, 0x20000100
        MOVE_IMM r1, 7
        MOVE_IMM r2, 0
        MOVE_IMM r3, 3
    loop:
        BRANCH_IF_EQ r2, r3, done
        ADD_IMM r1, 1
        ADD_IMM r2, 1
        BRANCH loop
    done:
        STORE_WORD r1, [r0]
        LOAD_WORD r4, [r0]
        HALT
    )"));
    d.tick(100);
    EXPECT_EQ(read_le32(d.sram(), 0x100), 10u);
    EXPECT_EQ(d.core().regs[4], 10u);
}

TEST(Core, InvalidOpcodeRaisesUsageFault) {
    const auto& p = profile_for("STM32F103");
    auto img = image_with(p, "HALT");
    img[0x100] = 0x77;
    auto d = boot(p, img);
    auto rep = d.step();
    EXPECT_EQ(rep.fault_raised, kUsageFault);
    EXPECT_FALSE(rep.executed);
}

TEST(Core, DeniedLoadIsBusFault) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "MOVE_IMM r0, 0x08000000\nLOAD_WORD r1, [r0]\nHALT"), 0x1234);
    d.attach_debugger();  // data bus to flash closes
    d.step();
    uint32_t pc = d.core().regs[15];
    auto rep = d.step();
    EXPECT_EQ(rep.fault_raised, kBusFault);
    EXPECT_EQ(d.core().regs[15], pc);  // does not retire
}

TEST(Core, ExceptionEntryReadsVector) {
    const auto& p = profile_for("STM32F103");
    auto img = image_with(p, "HALT");
    write_le32(img, 8, 0x08000201);  // NMI
    auto d = boot(p, img);
    ASSERT_TRUE(d.pend_exception(kNmi));
    auto rep = d.step();
    EXPECT_EQ(rep.exception, kNmi);
    EXPECT_EQ(d.core().regs[15], 0x08000200u);
    EXPECT_TRUE(d.core().t_flag);
}

TEST(Core, VtorMasksToGranularity) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    d.write_vtor(0x080000FF);
    EXPECT_EQ(d.core().vtor, 0x08000080u);
}

TEST(Core, OrAddressingOfVectorFetch) {
    const auto& p = profile_for("STM32F103");
    auto img = image_with(p, "HALT");
    // VTOR 0x08000080 with IRQ index 40 (0xA0): OR gives 0x080000A0, ADD would give 0x08000120.
    write_le32(img, 0xA0, 0x12345679);
    write_le32(img, 0x120, 0x0BADBAD1);
    auto d = boot(p, img);
    d.write_vtor(0x08000080);
    ASSERT_TRUE(d.pend_exception(40));
    auto rep = d.take_exception(40);
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.vector_address, 0x080000A0u);
    EXPECT_EQ(rep.pc, 0x12345678u);
    EXPECT_TRUE(rep.t_flag);
}

TEST(Core, IrqBeyondTableLocksUp) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    ASSERT_TRUE(d.pend_exception(16 + 70));
    auto rep = d.step();
    EXPECT_TRUE(rep.lockup);
    EXPECT_EQ(d.core().run_state, RunState::LOCKUP);
}

TEST(Core, Rev1CannotPendMemManage) {
    auto d = boot(profile_for("STM32F103"), image_with(profile_for("STM32F103"), "HALT"));
    EXPECT_EQ(profile_for("STM32F103").core_revision, 1);
    EXPECT_FALSE(d.pend_exception(kMemManage));
    EXPECT_TRUE(d.pend_exception(kNmi));
    auto c = boot(profile_for("CKS32F103"), image_with(profile_for("CKS32F103"), "HALT"));
    EXPECT_TRUE(c.pend_exception(kMemManage));
}

TEST(Core, FaultInsideFaultLocksUp) {
    const auto& p = profile_for("STM32F103");
    auto img = image_with(p, "HALT");
    img[0x100] = 0x77;
    write_le32(img, 4 * kUsageFault, 0x08000101);  // handler is the same bad word
    write_le32(img, 4 * kHardFault, 0x08000101);
    auto d = boot(p, img);
    d.tick(5);
    EXPECT_EQ(d.core().run_state, RunState::LOCKUP);
}

TEST(Core, FpbRemapsResetVector) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    FpbConfig f;
    f.enabled = true;
    f.comparators[0] = {0x4, 0x20000201, true};
    d.set_fpb(f);
    d.apply_power_event(PowerEvent::reset_pulse());
    EXPECT_EQ(d.core().regs[15], 0x20000200u);
    EXPECT_EQ(d.fpb(), f);
}

TEST(Core, FpbProgrammedThroughRegisters) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    d.bus_access({Master::DEBUGGER, Access::DATA_WRITE, reg::FP_COMP0 + 4, 4, 0x00000009});
    d.bus_access({Master::DEBUGGER, Access::DATA_WRITE, reg::FP_REPL0 + 4, 4, 0xCAFEF00D});
    d.bus_access({Master::DEBUGGER, Access::DATA_WRITE, reg::FP_CTRL, 4, 3});
    EXPECT_TRUE(d.fpb().enabled);
    EXPECT_TRUE(d.fpb().comparators[1].enabled);
    EXPECT_EQ(d.fpb().comparators[1].match_address, 0x8u);
    EXPECT_EQ(d.fpb().comparators[1].replacement_value, 0xCAFEF00Du);
}

TEST(Core, HaltNeedsDebugEnable) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "loop:\nBRANCH loop"));
    EXPECT_THROW(d.halt(), ProtocolError);
    d.set_c_debugen(true);
    d.halt();
    EXPECT_EQ(d.core().run_state, RunState::HALTED);
    d.resume();
    EXPECT_EQ(d.core().run_state, RunState::RUNNING);
}

// ---- dma ----------------------------------------------------------------------

TEST(Dma, CopiesFlashToSramAtL0) {
    const auto& p = profile_for("STM32F103");
    auto img = random_victim_image(p, 4);
    auto d = boot(p, img);
    d.set_c_debugen(true);
    d.halt();
    d.dma_configure(kFlashBase + 0x40, kSramBase + 0x1000, 16);
    auto rep = d.dma_start();
    EXPECT_EQ(rep.state, DmaState::DONE);
    EXPECT_EQ(rep.words_done, 16u);
    EXPECT_TRUE(std::equal(img.begin() + 0x40, img.begin() + 0x80, d.sram().begin() + 0x1000));
}

TEST(Dma, ConfigErrors) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    EXPECT_THROW(d.dma_configure(kFlashBase, kFlashBase + 0x100, 4), ConfigError);  // dst not SRAM
    EXPECT_THROW(d.dma_configure(kFlashBase + 1, kSramBase, 4), ConfigError);
    EXPECT_THROW(d.dma_configure(kSramBase, kSramBase + 8, 4), ConfigError);  // overlap
    EXPECT_THROW(d.dma_configure(kFlashBase, kSramBase + p.sram_size - 8, 4), ConfigError);
    EXPECT_THROW(d.dma_configure(0xFFFFFFF0, kSramBase, 8), ConfigError);
}

TEST(Dma, FaultsAtFirstDeniedWord) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"));
    d.set_c_debugen(true);
    d.halt();
    // Last two words of SRAM, then unmapped space.
    d.dma_configure(kSramBase + p.sram_size - 8, kSramBase, 4);
    auto rep = d.dma_start();
    EXPECT_EQ(rep.state, DmaState::FAULTED);
    EXPECT_EQ(rep.fault_word, 2u);
    EXPECT_EQ(rep.words_done, 2u);
}

TEST(Dma, DeniedUnderDebuggerOnStm) {
    const auto& p = profile_for("STM32F103");
    auto d = boot(p, image_with(p, "HALT"), 0x1234);
    d.attach_debugger();
    d.tick(2);  // core halts itself; the transfer then runs in one go
    d.dma_configure(kFlashBase, kSramBase + 0x1000, 4);
    auto rep = d.dma_start();
    EXPECT_EQ(rep.state, DmaState::FAULTED);
    EXPECT_EQ(rep.fault_word, 0u);
}

TEST(Dma, InterleavesWithRunningCpu) {
    const auto& p = profile_for("CKS32F103");
    auto d = boot(p, image_with(p, "loop:\nBRANCH loop"));
    d.dma_configure(kFlashBase, kSramBase + 0x1000, 8);
    auto rep = d.dma_start();
    EXPECT_EQ(rep.state, DmaState::RUNNING);
    d.tick(3);
    EXPECT_EQ(d.dma_report().words_done, 3u);
    d.tick(10);
    EXPECT_EQ(d.dma_report().state, DmaState::DONE);
    EXPECT_THROW(d.dma_start(), ProtocolError);  // not idle
}
