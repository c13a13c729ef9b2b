#include "rdpsim/profiles.hpp"

#include <fstream>
#include <map>

namespace rdpsim {

namespace {

constexpr uint32_t kAllMasters = 0xF;
constexpr uint32_t kCpu = bit_of(Master::CPU_DATA) | bit_of(Master::CPU_INSTR);

// Small builder so the rule tables below read as a list.
struct R {
    PolicyRule r;
    explicit R(std::string name) { r.name = std::move(name); }
    R& masters(uint32_t m) { r.masters = m; return *this; }
    R& master(Master m) { r.masters |= bit_of(m); return *this; }
    R& access(Access a) { r.accesses |= bit_of(a); return *this; }
    R& region(Region g) { r.regions |= bit_of(g); return *this; }
    R& exec(ExecFrom e) { r.executing_from |= bit_of(e); return *this; }
    R& min_rdp(Rdp l) { r.min_rdp = l; return *this; }
    R& max_rdp(Rdp l) { r.max_rdp = l; return *this; }
    R& debugger(bool v) { r.debugger_attached = v; return *this; }
    R& c_debugen(bool v) { r.c_debugen_ever_set = v; return *this; }
    R& lockdown(bool v) { r.flash_lockdown = v; return *this; }
    R& boot(BootMode b) { r.boot_mode = b; return *this; }
    PolicyRule allow() { r.verdict = Verdict::ALLOW; return r; }
    PolicyRule deny() { r.verdict = Verdict::DENY; return r; }
    PolicyRule trigger() { r.verdict = Verdict::LOCKDOWN_TRIGGER; return r; }
};

R flash(std::string name) {
    R b(std::move(name));
    b.region(Region::FLASH).min_rdp(Rdp::L1);
    return b;
}

std::vector<PolicyRule> common_head() {
    return {
        R("bootloader-readable")
            .region(Region::BOOTLOADER)
            .access(Access::DATA_READ)
            .access(Access::INSTR_FETCH)
            .access(Access::VECTOR_FETCH)
            .allow(),
        R("nonvolatile-write-via-programmer-only")
            .region(Region::FLASH)
            .region(Region::BOOTLOADER)
            .region(Region::OPTION_BYTES)
            .access(Access::DATA_WRITE)
            .deny(),
        R("volatile-and-system")
            .region(Region::SRAM)
            .region(Region::PERIPHERAL)
            .region(Region::SYSTEM)
            .region(Region::DEBUG_CONTROL)
            .region(Region::OPTION_BYTES)
            .allow(),
        R("rdp0-open").region(Region::FLASH).max_rdp(Rdp::L0).allow(),
        flash("sram-boot-hides-flash").masters(kCpu).boot(BootMode::SRAM).deny(),
        flash("debugger-flash-read").master(Master::DEBUGGER).deny(),
    };
}

std::vector<PolicyRule> with_tail(std::vector<PolicyRule> head, std::vector<PolicyRule> body) {
    auto rules = common_head();
    rules.insert(rules.begin(), head.begin(), head.end());
    rules.insert(rules.end(), body.begin(), body.end());
    rules.push_back(R("default-deny").deny());
    return rules;
}

// STM32F103 / APM32F103: vector fetches stay open, data masters locked when a
// debugger is or was attached.
std::vector<PolicyRule> stm_like_rules() {
    return with_tail({}, {
        flash("lockdown-data-bus")
            .master(Master::CPU_DATA)
            .master(Master::DMA)
            .lockdown(true)
            .deny(),
        flash("instruction-bus").master(Master::CPU_INSTR).allow(),
        flash("cpu-data-debugger").master(Master::CPU_DATA).debugger(true).deny(),
        flash("dma-debugger").master(Master::DMA).debugger(true).deny(),
        flash("cpu-data").master(Master::CPU_DATA).allow(),
        flash("dma").master(Master::DMA).allow(),
    });
}

std::vector<PolicyRule> cks_rules() {
    return with_tail({}, {
        flash("instruction-bus").master(Master::CPU_INSTR).allow(),
        flash("cpu-data-from-flash-code")
            .master(Master::CPU_DATA)
            .exec(ExecFrom::FLASH)
            .exec(ExecFrom::BOOTLOADER)
            .allow(),
        flash("cpu-data-other-code").master(Master::CPU_DATA).deny(),
        flash("dma-always").master(Master::DMA).allow(),
    });
}

std::vector<PolicyRule> gd32f103_rules() {
    return with_tail(
        {
            R("c_debugen-write-locks-flash")
                .master(Master::DEBUGGER)
                .access(Access::DATA_WRITE)
                .region(Region::DEBUG_CONTROL)
                .trigger(),
        },
        {
            flash("lockdown-all-masters").masters(kAllMasters).lockdown(true).deny(),
            flash("c_debugen-all-masters").masters(kAllMasters).c_debugen(true).deny(),
            flash("vector-fetch-debugger")
                .master(Master::CPU_INSTR)
                .access(Access::VECTOR_FETCH)
                .debugger(true)
                .deny(),
            flash("instruction-bus").master(Master::CPU_INSTR).allow(),
            flash("cpu-data").master(Master::CPU_DATA).allow(),
            flash("dma").master(Master::DMA).allow(),
        });
}

std::vector<PolicyRule> gd32f130_rules() {
    return with_tail({}, {
        flash("vector-fetch-debugger")
            .master(Master::CPU_INSTR)
            .access(Access::VECTOR_FETCH)
            .debugger(true)
            .deny(),
        flash("instruction-bus").master(Master::CPU_INSTR).allow(),
        flash("cpu-data-debugger").master(Master::CPU_DATA).debugger(true).deny(),
        flash("cpu-data").master(Master::CPU_DATA).allow(),
        flash("dma-debugger").master(Master::DMA).debugger(true).deny(),
        flash("dma").master(Master::DMA).allow(),
    });
}

std::vector<PolicyRule> gd32vf103_rules() {
    return with_tail({}, {
        flash("vector-fetch-debugger")
            .master(Master::CPU_INSTR)
            .access(Access::VECTOR_FETCH)
            .debugger(true)
            .deny(),
        flash("instruction-bus").master(Master::CPU_INSTR).allow(),
        flash("cpu-data-from-flash-or-sram")
            .master(Master::CPU_DATA)
            .exec(ExecFrom::FLASH)
            .exec(ExecFrom::SRAM)
            .allow(),
        flash("cpu-data-debugger").master(Master::CPU_DATA).debugger(true).deny(),
        flash("cpu-data").master(Master::CPU_DATA).allow(),
        flash("dma-debugger").master(Master::DMA).debugger(true).deny(),
        flash("dma").master(Master::DMA).allow(),
    });
}

CoverageParams d1b_params_for_revision(int revision) {
    CoverageParams p;
    p.vtor_granularity = 0x80;
    p.max_pendable_irq = 240;
    p.wrap_mode = WrapMode::NONE;
    p.vector_addressing = VectorAddressing::OR;
    if (revision == 1)
        p.usable_system_exceptions = {2, 12, 14, 15};
    else if (revision == 2)
        p.usable_system_exceptions = {2, 4, 5, 6, 11, 12, 14, 15};
    return p;
}

Obfuscation gd_obfuscation(const std::array<int, 8>& word_cols, bool verified) {
    Obfuscation o;
    o.key.word_perm = Gf2Perm8::from_columns(word_cols);
    o.key.bit_perms = {
        Gf2Perm8::from_columns({4, 0, 7, 6, 2, 3, 5, 1}),
        Gf2Perm8::from_columns({0, 7, 6, 2, 3, 5, 1, 4}),
        Gf2Perm8::from_columns({7, 6, 2, 3, 5, 1, 4, 0}),
        Gf2Perm8::from_columns({6, 2, 3, 5, 1, 4, 0, 7}),
    };
    o.verified = verified;
    return o;
}

constexpr std::array<int, 8> kGd32f103Word = {7, 6, 5, 4, 3, 2, 1, 0};
constexpr std::array<int, 8> kGd32f130Word = {1, 6, 4, 2, 0, 7, 5, 3};

DeviceProfile make(DeviceName name) {
    DeviceProfile p;
    p.name = name;
    p.isa = "ARMv7-M";
    p.sram_size = 20 * 1024;
    p.supported_rdp_levels = {Rdp::L0, Rdp::L1};
    p.cpuid = 0x412FC231;
    p.core_revision = 2;
    p.idcode = 0x2BA01477;
    p.fpb_reset_remap = false;
    switch (name) {
    case DeviceName::STM32F103:
        p.part_number = "STM32F103C8";
        p.flash_size = 64 * 1024;
        p.idcode = 0x1BA01477;
        p.cpuid = 0x411FC231;
        p.core_revision = 1;
        p.fpb_reset_remap = true;
        p.external_interrupt_count = 59;
        p.vuln_flags = {VulnFlag::D1B, VulnFlag::H3};
        p.policy = stm_like_rules();
        p.cves = {{"D1-B: Extraction via Exceptions", "CVE-2020-8004"},
                  {"H3: Glitch and FPB → Shellcode", "CVE-2020-13466"}};
        break;
    case DeviceName::APM32F103:
        p.part_number = "APM32F103CBT6";
        p.flash_size = 128 * 1024;
        p.fpb_reset_remap = true;
        p.external_interrupt_count = 75;
        p.vuln_flags = {VulnFlag::D1B, VulnFlag::H3};
        p.policy = stm_like_rules();
        p.cves = {{"D1-B: Extraction via Exceptions", "CVE-2020-13463"},
                  {"H3: Glitch and FPB → Shellcode", "CVE-2020-13471"}};
        break;
    case DeviceName::CKS32F103:
        p.part_number = "CKS32F103C8T6";
        p.flash_size = 64 * 1024;
        p.external_interrupt_count = 76;
        p.vuln_flags = {VulnFlag::D1A_FLASH_GADGET, VulnFlag::D1B, VulnFlag::D2_ALWAYS};
        p.policy = cks_rules();
        p.cves = {{"D1-A: Load Instruction Exploitation", "CVE-2020-13464"},
                  {"D2: DMA Access Exploitation", "CVE-2020-13467"}};
        break;
    case DeviceName::GD32F103:
        p.part_number = "GD32F103C8T6";
        p.flash_size = 64 * 1024;
        p.external_interrupt_count = 60;
        p.dual_die = true;
        p.vuln_flags = {VulnFlag::D1C, VulnFlag::D2_UNTIL_CDEBUGEN, VulnFlag::H1};
        p.policy = gd32f103_rules();
        p.qspi_layout = QspiLayout{};
        p.qspi_layout->initial_fetch = p.flash_size;
        p.obfuscation = gd_obfuscation(kGd32f103Word, true);
        p.cves = {{"D1-B: Extraction via Exceptions", "CVE-2020-13465"},
                  {"D1-C: Control Flow Redirection", "CVE-2020-13472"},
                  {"D2: DMA Access Exploitation", "CVE-2020-13470"}};
        break;
    case DeviceName::GD32F130:
        p.part_number = "GD32F130C8T6";
        p.flash_size = 64 * 1024;
        p.sram_size = 8 * 1024;
        p.external_interrupt_count = 52;
        p.dual_die = true;
        p.supported_rdp_levels = {Rdp::L0, Rdp::L1, Rdp::L2};
        p.vuln_flags = {VulnFlag::H1, VulnFlag::H2};
        p.policy = gd32f130_rules();
        p.qspi_layout = QspiLayout{};
        p.qspi_layout->initial_fetch = 32 * 1024;
        p.obfuscation = gd_obfuscation(kGd32f130Word, true);
        p.cves = {{"H1: Invasive Data Eavesdropping", "CVE-2020-13468"},
                  {"H2: Invasive RDP Manipulation", "CVE-2020-13469"}};
        break;
    case DeviceName::GD32VF103:
        p.part_number = "GD32VF103CBT6";
        p.isa = "RV32IMAC";
        p.flash_size = 128 * 1024;
        p.sram_size = 32 * 1024;
        p.idcode = 0x1000563D;
        p.cpuid.reset();
        p.core_revision = 0;
        p.has_vtor = false;
        p.external_interrupt_count = 86;
        p.dual_die = true;
        p.vuln_flags = {VulnFlag::D1A_SRAM_CODE};
        p.policy = gd32vf103_rules();
        p.qspi_layout = QspiLayout{};
        p.qspi_layout->initial_fetch = p.flash_size;
        p.obfuscation = gd_obfuscation(kGd32f103Word, false);
        p.cves = {{"D1-A: Load Instruction Exploitation", "CVE-2020-13469"},
                  {"D1-C: Control Flow Redirection", "CVE-2020-13465"}};
        break;
    }
    p.d1b_params = d1b_params_for_revision(p.core_revision);
    p.lockdown_on_attach = p.has(VulnFlag::H3);
    return p;
}

}  // namespace

const std::vector<DeviceName>& all_devices() {
    static const std::vector<DeviceName> names = {
        DeviceName::STM32F103, DeviceName::APM32F103, DeviceName::CKS32F103,
        DeviceName::GD32F103,  DeviceName::GD32F130,  DeviceName::GD32VF103};
    return names;
}

const DeviceProfile& profile_for(DeviceName name) {
    static const std::map<DeviceName, DeviceProfile> table = [] {
        std::map<DeviceName, DeviceProfile> t;
        for (DeviceName n : all_devices())
            t.emplace(n, make(n));
        return t;
    }();
    return table.at(name);
}

const DeviceProfile& profile_for(const std::string& name) {
    return profile_for(parse_enum<DeviceName>(name, "device"));
}

RdpLevel decode_rdp(uint16_t raw, const DeviceProfile& profile) {
    if (raw == kRdpRawL0)
        return {Rdp::L0, raw};
    if (raw == kRdpRawL2 && profile.supports(Rdp::L2))
        return {Rdp::L2, raw};
    return {Rdp::L1, raw};
}

uint16_t canonical_raw(Rdp level) {
    switch (level) {
    case Rdp::L0: return kRdpRawL0;
    case Rdp::L2: return kRdpRawL2;
    default: return 0x5AA5;
    }
}

DeviceProfile mini_profile(const DeviceProfile& base, uint32_t flash_size) {
    if (flash_size == 0 || flash_size % 1024 || flash_size > base.flash_size)
        throw ConfigError("mini profile flash size must be a multiple of 1 KiB");
    DeviceProfile p = base;
    p.flash_size = flash_size;
    p.part_number += "-mini" + std::to_string(flash_size / 1024) + "k";
    if (p.qspi_layout)
        p.qspi_layout->initial_fetch = std::min(p.qspi_layout->initial_fetch, flash_size);
    return p;
}

// ---- JSON ----------------------------------------------------------------

namespace {

template <typename E>
nlohmann::json mask_to_json(uint32_t mask, int count) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < count; ++i)
        if (mask & (1u << i))
            a.push_back(static_cast<E>(i));
    return a;
}

template <typename E>
uint32_t mask_from_json(const nlohmann::json& j, const char* what) {
    uint32_t m = 0;
    for (const auto& e : j)
        m |= bit_of(parse_enum<E>(e.get<std::string>(), what));
    return m;
}

template <typename T>
void opt_out(nlohmann::json& j, const char* key, const std::optional<T>& v) {
    if (v)
        j[key] = *v;
}

template <typename T>
void opt_in(const nlohmann::json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key))
        v = j.at(key).get<T>();
    else
        v.reset();
}

nlohmann::json rule_to_json(const PolicyRule& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["masters"] = mask_to_json<Master>(r.masters, 4);
    j["accesses"] = mask_to_json<Access>(r.accesses, 4);
    j["regions"] = mask_to_json<Region>(r.regions, 8);
    j["executing_from"] = mask_to_json<ExecFrom>(r.executing_from, 4);
    j["min_rdp"] = r.min_rdp;
    j["max_rdp"] = r.max_rdp;
    opt_out(j, "debugger_attached", r.debugger_attached);
    opt_out(j, "c_debugen_ever_set", r.c_debugen_ever_set);
    opt_out(j, "flash_lockdown", r.flash_lockdown);
    opt_out(j, "boot_mode", r.boot_mode);
    j["verdict"] = r.verdict;
    return j;
}

PolicyRule rule_from_json(const nlohmann::json& j) {
    PolicyRule r;
    r.name = j.at("name").get<std::string>();
    r.masters = mask_from_json<Master>(j.value("masters", nlohmann::json::array()), "master");
    r.accesses = mask_from_json<Access>(j.value("accesses", nlohmann::json::array()), "access");
    r.regions = mask_from_json<Region>(j.value("regions", nlohmann::json::array()), "region");
    r.executing_from =
        mask_from_json<ExecFrom>(j.value("executing_from", nlohmann::json::array()), "exec");
    r.min_rdp = parse_enum<Rdp>(j.value("min_rdp", std::string("L0")), "rdp");
    r.max_rdp = parse_enum<Rdp>(j.value("max_rdp", std::string("L2")), "rdp");
    opt_in(j, "debugger_attached", r.debugger_attached);
    opt_in(j, "c_debugen_ever_set", r.c_debugen_ever_set);
    opt_in(j, "flash_lockdown", r.flash_lockdown);
    if (j.contains("boot_mode"))
        r.boot_mode = parse_enum<BootMode>(j.at("boot_mode").get<std::string>(), "boot mode");
    r.verdict = parse_enum<Verdict>(j.at("verdict").get<std::string>(), "verdict");
    return r;
}

}  // namespace

void to_json(nlohmann::json& j, const DeviceProfile& p) {
    j = nlohmann::json::object();
    j["name"] = p.name;
    j["part_number"] = p.part_number;
    j["isa"] = p.isa;
    j["flash_size"] = p.flash_size;
    j["sram_size"] = p.sram_size;
    j["bootloader_base"] = p.bootloader_base;
    j["bootloader_size"] = p.bootloader_size;
    j["idcode"] = hex32(p.idcode);
    if (p.cpuid)
        j["cpuid"] = hex32(*p.cpuid);
    j["core_revision"] = p.core_revision;
    j["has_vtor"] = p.has_vtor;
    j["fpb_reset_remap"] = p.fpb_reset_remap;
    j["lockdown_on_attach"] = p.lockdown_on_attach;
    j["supported_rdp_levels"] = p.supported_rdp_levels;
    j["dual_die"] = p.dual_die;
    j["vuln_flags"] = p.vuln_flags;
    j["external_interrupt_count"] = p.external_interrupt_count;
    const auto& c = p.d1b_params;
    j["d1b_params"] = {{"usable_system_exceptions", c.usable_system_exceptions},
                       {"vtor_granularity", c.vtor_granularity},
                       {"max_pendable_irq", c.max_pendable_irq},
                       {"wrap_mode", c.wrap_mode},
                       {"vector_addressing", c.vector_addressing}};
    if (p.qspi_layout) {
        const auto& q = *p.qspi_layout;
        j["qspi_layout"] = {{"factory_config_addr", q.factory_config_addr},
                            {"factory_config_size", q.factory_config_size},
                            {"bootloader_addr", q.bootloader_addr},
                            {"option_bytes_addr", q.option_bytes_addr},
                            {"option_bytes_size", q.option_bytes_size},
                            {"firmware_base", q.firmware_base},
                            {"page_size", q.page_size},
                            {"initial_fetch", q.initial_fetch},
                            {"command", q.command},
                            {"dummy_cycles", q.dummy_cycles},
                            {"clock_mhz", q.clock_mhz}};
    }
    if (p.obfuscation) {
        j["obfuscation"] = to_json(p.obfuscation->key);
        j["obfuscation"]["verified"] = p.obfuscation->verified;
    }
    j["sram_remanence_us"] = p.sram_remanence_us;
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : p.policy)
        rules.push_back(rule_to_json(r));
    j["policy"] = rules;
    nlohmann::json cves = nlohmann::json::array();
    for (const auto& c2 : p.cves)
        cves.push_back({{"vulnerability", c2.vulnerability}, {"cve", c2.cve}});
    j["cves"] = cves;
}

namespace {

uint32_t parse_u32(const nlohmann::json& v) {
    if (v.is_string())
        return static_cast<uint32_t>(std::stoul(v.get<std::string>(), nullptr, 0));
    return v.get<uint32_t>();
}

}  // namespace

void from_json(const nlohmann::json& j, DeviceProfile& p) {
    try {
        p = DeviceProfile{};
        p.name = parse_enum<DeviceName>(j.at("name").get<std::string>(), "device");
        p.part_number = j.value("part_number", enum_name(p.name));
        p.isa = j.value("isa", std::string("ARMv7-M"));
        p.flash_size = j.at("flash_size").get<uint32_t>();
        p.sram_size = j.at("sram_size").get<uint32_t>();
        p.bootloader_base = j.value("bootloader_base", kBootloaderBase);
        p.bootloader_size = j.value("bootloader_size", 0x800u);
        p.idcode = parse_u32(j.at("idcode"));
        if (j.contains("cpuid"))
            p.cpuid = parse_u32(j.at("cpuid"));
        p.core_revision = j.value("core_revision", 0);
        p.has_vtor = j.value("has_vtor", true);
        p.fpb_reset_remap = j.value("fpb_reset_remap", false);
        p.lockdown_on_attach = j.value("lockdown_on_attach", false);
        for (const auto& l : j.at("supported_rdp_levels"))
            p.supported_rdp_levels.insert(parse_enum<Rdp>(l.get<std::string>(), "rdp"));
        p.dual_die = j.value("dual_die", false);
        for (const auto& f : j.at("vuln_flags"))
            p.vuln_flags.insert(parse_enum<VulnFlag>(f.get<std::string>(), "flag"));
        p.external_interrupt_count = j.at("external_interrupt_count").get<uint32_t>();
        const auto& c = j.at("d1b_params");
        p.d1b_params.usable_system_exceptions = c.at("usable_system_exceptions").get<std::set<int>>();
        p.d1b_params.vtor_granularity = c.at("vtor_granularity").get<uint32_t>();
        p.d1b_params.max_pendable_irq = c.at("max_pendable_irq").get<uint32_t>();
        p.d1b_params.wrap_mode =
            parse_enum<WrapMode>(c.at("wrap_mode").get<std::string>(), "wrap mode");
        p.d1b_params.vector_addressing = parse_enum<VectorAddressing>(
            c.value("vector_addressing", std::string("ADD")), "vector addressing");
        if (j.contains("qspi_layout")) {
            const auto& q = j.at("qspi_layout");
            QspiLayout l;
            l.factory_config_addr = q.value("factory_config_addr", l.factory_config_addr);
            l.factory_config_size = q.value("factory_config_size", l.factory_config_size);
            l.bootloader_addr = q.value("bootloader_addr", l.bootloader_addr);
            l.option_bytes_addr = q.value("option_bytes_addr", l.option_bytes_addr);
            l.option_bytes_size = q.value("option_bytes_size", l.option_bytes_size);
            l.firmware_base = q.value("firmware_base", l.firmware_base);
            l.page_size = q.value("page_size", l.page_size);
            l.initial_fetch = q.at("initial_fetch").get<uint32_t>();
            l.command = q.value("command", l.command);
            l.dummy_cycles = q.value("dummy_cycles", l.dummy_cycles);
            l.clock_mhz = q.value("clock_mhz", l.clock_mhz);
            p.qspi_layout = l;
        }
        if (j.contains("obfuscation")) {
            Obfuscation o;
            o.key = key_from_json(j.at("obfuscation"));
            o.verified = j.at("obfuscation").value("verified", false);
            p.obfuscation = o;
        }
        p.sram_remanence_us = j.value("sram_remanence_us", 1000u);
        for (const auto& r : j.at("policy"))
            p.policy.push_back(rule_from_json(r));
        for (const auto& c2 : j.value("cves", nlohmann::json::array()))
            p.cves.push_back({c2.at("vulnerability").get<std::string>(),
                              c2.at("cve").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed profile: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("malformed profile: ") + e.what());
    }
    if (p.dual_die && !p.qspi_layout)
        throw ConfigError("dual-die profile requires qspi_layout");
    if (p.flash_size == 0 || p.flash_size % 1024)
        throw ConfigError("flash_size must be a nonzero multiple of 1 KiB");
    if (p.policy.empty())
        throw ConfigError("profile has no policy rules");
    {
        PolicyRule catch_all;
        catch_all.name = p.policy.back().name;
        catch_all.verdict = Verdict::DENY;
        if (!(p.policy.back() == catch_all))
            throw ConfigError("policy must end in an unconditional DENY rule");
    }
    uint32_t g = p.d1b_params.vtor_granularity;
    if (g < 0x80 || (g & (g - 1)))
        throw ConfigError("vtor_granularity must be a power of two >= 0x80");
}

DeviceProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open profile " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile " + path + ": " + e.what());
    }
    return j.get<DeviceProfile>();
}

}  // namespace rdpsim
