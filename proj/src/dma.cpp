#include "rdpsim/device.hpp"

namespace rdpsim {

void Device::dma_configure(uint32_t src, uint32_t dst, uint32_t count) {
    if (dma_.state == DmaState::RUNNING)
        throw ProtocolError("DMA channel busy");
    if (src % 4 || dst % 4)
        throw ConfigError("DMA addresses must be word aligned");
    uint64_t bytes = uint64_t(count) * 4;
    if (dst < kSramBase || uint64_t(dst) + bytes > uint64_t(kSramBase) + profile_.sram_size)
        throw ConfigError("DMA destination must lie in SRAM");
    if (uint64_t(src) + bytes > (uint64_t(1) << 32))
        throw ConfigError("DMA source range wraps the address space");
    if (count && src < uint64_t(dst) + bytes && dst < uint64_t(src) + bytes)
        throw ConfigError("DMA source and destination overlap");
    dma_ = DmaChannel{};
    dma_.src = src;
    dma_.dst = dst;
    dma_.count = count;
}

DmaReport Device::dma_start() {
    if (!powered_)
        throw ProtocolError("device unpowered");
    if (dma_.state != DmaState::IDLE)
        throw ProtocolError("DMA channel must be configured before start");
    dma_.done = 0;
    dma_.fault_word.reset();
    dma_.state = dma_.count ? DmaState::RUNNING : DmaState::DONE;
    // With the CPU stopped nothing can interleave, so run to completion.
    if (core_.run_state != RunState::RUNNING)
        dma_run_to_end();
    return dma_report();
}

DmaReport Device::dma_report() const {
    return {dma_.state, dma_.done, dma_.fault_word};
}

void Device::dma_word() {
    if (dma_.state != DmaState::RUNNING)
        return;
    uint32_t off = 4 * dma_.done;
    auto rd = bus_access({Master::DMA, Access::DATA_READ, dma_.src + off, 4, 0});
    if (!rd.ok()) {
        dma_.state = DmaState::FAULTED;
        dma_.fault_word = dma_.done;
        return;
    }
    auto wr = bus_access({Master::DMA, Access::DATA_WRITE, dma_.dst + off, 4, *rd.data});
    if (!wr.ok()) {
        dma_.state = DmaState::FAULTED;
        dma_.fault_word = dma_.done;
        return;
    }
    if (++dma_.done == dma_.count)
        dma_.state = DmaState::DONE;
}

void Device::dma_run_to_end() {
    while (dma_.state == DmaState::RUNNING)
        dma_word();
}

}  // namespace rdpsim
