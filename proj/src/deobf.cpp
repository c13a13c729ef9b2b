#include "rdpsim/deobf.hpp"

#include <map>

namespace rdpsim {

uint32_t DecodedFirmware::pages_present() const {
    uint32_t n = 0;
    for (bool b : page_present)
        n += b;
    return n;
}

double DecodedFirmware::coverage_percent() const {
    return page_present.empty() ? 0.0 : 100.0 * pages_present() / page_present.size();
}

namespace {

// The last full-page read of each firmware page, keyed by page index.
std::map<uint32_t, const QspiTransaction*> firmware_pages(const QspiTrace& trace,
                                                          const QspiLayout& layout,
                                                          uint32_t flash_size) {
    std::map<uint32_t, const QspiTransaction*> pages;
    for (const auto& t : trace.transactions) {
        if (t.address < layout.firmware_base || t.address - layout.firmware_base >= flash_size)
            continue;
        uint32_t off = t.address - layout.firmware_base;
        if (off % layout.page_size || t.data.size() != layout.page_size)
            continue;
        pages[off / layout.page_size] = &t;
    }
    return pages;
}

}  // namespace

DecodedFirmware decode_firmware(const QspiTrace& trace, const QspiLayout& layout,
                                uint32_t flash_size, const ObfuscationKey& key) {
    DecodedFirmware out;
    uint32_t n_pages = flash_size / layout.page_size;
    out.image.assign(flash_size, 0xFF);
    out.page_present.assign(n_pages, false);
    for (const auto& [page, t] : firmware_pages(trace, layout, flash_size)) {
        auto logical = deobfuscate_page_bytes(key, t->data);
        std::copy(logical.begin(), logical.end(), out.image.begin() + size_t(page) * layout.page_size);
        out.page_present[page] = true;
    }
    for (uint32_t p = 0; p < n_pages;) {
        if (out.page_present[p]) {
            ++p;
            continue;
        }
        uint32_t q = p;
        while (q < n_pages && !out.page_present[q])
            ++q;
        out.gaps.emplace_back(p * layout.page_size, q * layout.page_size);
        p = q;
    }
    return out;
}

std::vector<uint8_t> inference_probe_image(uint32_t flash_size, uint32_t page_size) {
    if (flash_size < (kBitTestFirstPage + kBitTestWords.size()) * page_size)
        throw ConfigError("flash too small for the inference probe pages");
    std::vector<uint8_t> img(flash_size, 0xFF);
    for (size_t k = 0; k < kWordProbeOffsets.size(); ++k) {
        size_t at = k * page_size + kWordProbeOffsets[k];
        std::fill(img.begin() + at, img.begin() + at + 4, 0x00);
    }
    for (size_t t = 0; t < kBitTestWords.size(); ++t) {
        size_t at = (kBitTestFirstPage + t) * page_size;
        for (int b = 0; b < 4; ++b)
            img[at + b] = uint8_t(kBitTestWords[t] >> (24 - 8 * b));
    }
    return img;
}

ObfuscationKey infer_key_from_trace(const QspiTrace& trace, const QspiLayout& layout) {
    uint32_t need = (kBitTestFirstPage + uint32_t(kBitTestWords.size())) * layout.page_size;
    auto pages = firmware_pages(trace, layout, need);
    auto page = [&](uint32_t i) -> const std::vector<uint8_t>& {
        auto it = pages.find(i);
        if (it == pages.end())
            throw InferenceError("probe page " + std::to_string(i) + " missing from trace");
        return it->second->data;
    };

    std::vector<WordObservation> obs;
    for (uint32_t k = 0; k < kWordProbeOffsets.size(); ++k) {
        const auto& d = page(k);
        std::optional<uint32_t> found;
        for (uint32_t o = 0; o < layout.page_size; o += 4) {
            if (d[o] || d[o + 1] || d[o + 2] || d[o + 3])
                continue;
            if (found)
                throw InferenceError("probe page " + std::to_string(k) +
                                     " shows more than one zero word");
            found = o;
        }
        if (!found)
            throw InferenceError("probe page " + std::to_string(k) + " shows no zero word");
        obs.emplace_back(kWordProbeOffsets[k], *found);
    }

    std::array<uint32_t, 5> responses{};
    for (uint32_t t = 0; t < kBitTestWords.size(); ++t) {
        const auto& d = page(kBitTestFirstPage + t);
        responses[t] = uint32_t(d[0]) << 24 | uint32_t(d[1]) << 16 | uint32_t(d[2]) << 8 | d[3];
    }

    ObfuscationKey key;
    key.word_perm = infer_word_permutation(obs);
    key.bit_perms = infer_bit_permutation(responses);
    return key;
}

nlohmann::json gaps_to_json(const DecodedFirmware& d) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& [b, e] : d.gaps)
        g.push_back({{"begin", b}, {"end", e}});
    return g;
}

}  // namespace rdpsim
