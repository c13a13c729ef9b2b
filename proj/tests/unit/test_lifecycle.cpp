#include <gtest/gtest.h>

#include "rdpsim/debug_port.hpp"
#include "rdpsim/device.hpp"
#include "rdpsim/exploits.hpp"

using namespace rdpsim;

namespace {

struct Retained {
    bool fpb, lockdown, sram, rdp_l1, stored;
};

// Sets up FPB, lockdown and an SRAM marker, applies `events`, reports what survived.
Retained apply(const std::vector<PowerEvent>& events) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision(structured_victim_image(p, 1), 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    d.attach_debugger();
    d.detach_debugger();
    FpbConfig f;
    f.enabled = true;
    f.comparators[0] = {0x4, 0x20000101, true};
    d.set_fpb(f);
    write_le32(d.sram_mut(), 0x100, 0x5AFE5AFE);
    for (const auto& e : events)
        d.apply_power_event(e);
    return {!d.fpb().empty(), d.flash_lockdown(), read_le32(d.sram(), 0x100) == 0x5AFE5AFE,
            d.rdp().level == Rdp::L1, d.stored_option_raw() == 0x1234};
}

}  // namespace

TEST(Retention, ResetPulseKeepsEverything) {
    auto r = apply({PowerEvent::reset_pulse()});
    EXPECT_TRUE(r.fpb);
    EXPECT_TRUE(r.lockdown);
    EXPECT_TRUE(r.sram);
    EXPECT_TRUE(r.rdp_l1);
    EXPECT_TRUE(r.stored);
}

TEST(Retention, ShortGlitchKeepsOnlySram) {
    auto r = apply({PowerEvent::glitch(300)});
    EXPECT_FALSE(r.fpb);
    EXPECT_FALSE(r.lockdown);
    EXPECT_TRUE(r.sram);
    EXPECT_TRUE(r.rdp_l1);
    EXPECT_TRUE(r.stored);
}

TEST(Retention, LongGlitchClearsSram) {
    auto r = apply({PowerEvent::glitch(5000)});
    EXPECT_FALSE(r.fpb);
    EXPECT_FALSE(r.lockdown);
    EXPECT_FALSE(r.sram);
    EXPECT_TRUE(r.rdp_l1);
    EXPECT_TRUE(r.stored);
}

TEST(Retention, GlitchAtThresholdKeepsSram) {
    uint32_t rem = profile_for("STM32F103").sram_remanence_us;
    EXPECT_TRUE(apply({PowerEvent::glitch(rem)}).sram);
    EXPECT_FALSE(apply({PowerEvent::glitch(rem + 1)}).sram);
}

TEST(Retention, PowerCycleClearsVolatile) {
    auto r = apply({PowerEvent::power_off(), PowerEvent::power_on()});
    EXPECT_FALSE(r.fpb);
    EXPECT_FALSE(r.lockdown);
    EXPECT_FALSE(r.sram);
    EXPECT_TRUE(r.rdp_l1);
    EXPECT_TRUE(r.stored);
}

TEST(Lifecycle, GlitchNeedsPositiveDuration) {
    Device d(profile_for("STM32F103"), 1);
    d.apply_power_event(PowerEvent::power_on());
    EXPECT_THROW(d.apply_power_event(PowerEvent::glitch(0)), ConfigError);
}

TEST(Lifecycle, GlitchPullsResetLowOnce) {
    Device d(profile_for("STM32F103"), 1);
    d.apply_power_event(PowerEvent::power_on());
    size_t before = d.reset_line().size();
    uint64_t t0 = d.now_us();
    d.apply_power_event(PowerEvent::glitch(300));
    int lows = 0;
    for (size_t i = before; i < d.reset_line().size(); ++i)
        lows += !d.reset_line()[i].high;
    EXPECT_EQ(lows, 1);
    EXPECT_TRUE(d.reset_line().back().high);
    EXPECT_EQ(d.now_us(), t0 + 300);
}

TEST(Lifecycle, BootPinsLatchedAtReset) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision(structured_victim_image(p, 1), 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    d.set_boot_pins(BootMode::SRAM);
    EXPECT_EQ(d.boot_mode(), BootMode::FLASH);
    d.apply_power_event(PowerEvent::reset_pulse());
    EXPECT_EQ(d.boot_mode(), BootMode::SRAM);
}

TEST(Lifecycle, ResetNeedsPower) {
    Device d(profile_for("STM32F103"), 1);
    EXPECT_THROW(d.apply_power_event(PowerEvent::reset_pulse()), ProtocolError);
}

TEST(Lifecycle, GlitchReloadsOptionBytes) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision({}, kRdpRawL0);
    d.apply_power_event(PowerEvent::power_on());
    d.write_option_bytes(0x1234);
    EXPECT_EQ(d.rdp().level, Rdp::L0);
    d.apply_power_event(PowerEvent::reset_pulse());
    EXPECT_EQ(d.rdp().level, Rdp::L0);
    d.apply_power_event(PowerEvent::glitch(10));
    EXPECT_EQ(d.rdp().level, Rdp::L1);
}

// ---- debug port ------------------------------------------------------------------

TEST(DebugPort, L2RefusesAttach) {
    const auto& p = profile_for("GD32F130");
    Device d(p, 1);
    d.provision({}, kRdpRawL2);
    d.apply_power_event(PowerEvent::power_on());
    Transcript t;
    EXPECT_THROW(DebugSession::attach(d, &t), ConnectRefused);
    EXPECT_FALSE(d.debugger_attached());
    EXPECT_EQ(t.size(), 1u);
}

TEST(DebugPort, L1AttachesAndReportsIdcode) {
    const auto& p = profile_for("GD32F130");
    Device d(p, 1);
    d.provision({}, 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    auto s = DebugSession::attach(d);
    EXPECT_EQ(s.idcode(), p.idcode);
    EXPECT_TRUE(s.attached());
    EXPECT_THROW(DebugSession::attach(d), ProtocolError);
}

TEST(DebugPort, RegisterAccessNeedsDebugEnable) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision(structured_victim_image(p, 1), 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    auto s = DebugSession::attach(d);
    EXPECT_THROW(s.reg_read(Reg::PC), ProtocolError);
    EXPECT_THROW(s.halt(), ProtocolError);
    EXPECT_THROW(s.single_step(), ProtocolError);
    s.set_c_debugen(true);
    s.halt();
    EXPECT_EQ(d.core().run_state, RunState::HALTED);
    s.reg_write(Reg::R5, 0x1234);
    EXPECT_EQ(s.reg_read(Reg::R5), 0x1234u);
    EXPECT_TRUE(s.mem_read(reg::DHCSR).data.value() & reg::S_HALT);
    s.detach();
    EXPECT_FALSE(d.core().c_debugen);
    EXPECT_EQ(d.core().run_state, RunState::RUNNING);
}

TEST(DebugPort, SessionDiesWithPower) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision({}, 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    auto s = DebugSession::attach(d);
    d.apply_power_event(PowerEvent::glitch(100));
    EXPECT_FALSE(s.attached());
    EXPECT_THROW(s.mem_read(kSramBase), ProtocolError);
}

TEST(DebugPort, TranscriptRecordsCalls) {
    const auto& p = profile_for("STM32F103");
    Device d(p, 1);
    d.provision({}, 0x1234);
    d.apply_power_event(PowerEvent::power_on());
    Transcript t;
    auto s = DebugSession::attach(d, &t);
    s.mem_read(kFlashBase);
    s.mem_write(kSramBase, 7);
    EXPECT_TRUE(t.contains_op("attach"));
    EXPECT_TRUE(t.contains_op("mem_write"));
    auto j = t.to_json();
    ASSERT_EQ(j.size(), 3u);
    EXPECT_EQ(j[1]["result"]["status"], "DENIED");
    EXPECT_EQ(j[2]["args"]["value"], 7);
}
