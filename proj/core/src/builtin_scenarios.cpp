#include <algorithm>

#include "nicsim/error.hpp"
#include "nicsim/scenario.hpp"

namespace nicsim {

namespace {

using namespace std::chrono_literals;

// Alveo U250: PCIe Gen3 x16 host link, 16 GB/s AXI4 fabric, DDR4 at 19.2 GB/s.
PcieLinkConfig alveo_link() {
    PcieLinkConfig link;
    link.lanes = 16;
    link.per_lane = Bandwidth{1.0};
    link.effective_cap = Bandwidth{15.8};
    link.max_payload_bytes = 256;
    link.tlp_header_bytes = 12;
    link.tlp_framing_bytes = 12;
    return link;
}

MemoryEndpointConfig alveo_ddr4() {
    return MemoryEndpointConfig{MemoryKind::Ddr4, ByteSize{16 * GiB}, Bandwidth{19.2}, 80ns, 512};
}

// 512-bit AXI BRAM controller at 250 MHz.
MemoryEndpointConfig alveo_bram() {
    return MemoryEndpointConfig{MemoryKind::Bram, ByteSize{1 * MiB}, Bandwidth{16.0}, 4ns, 64};
}

DmaEngineConfig xdma_engine() {
    DmaEngineConfig dma;
    dma.max_channels = 4;
    dma.per_channel_cap_h2c = Bandwidth{10.0};
    dma.per_channel_cap_c2h = Bandwidth{10.0};
    dma.descriptor_granularity = ByteSize{4096};
    dma.descriptor_overhead = 10ns;
    dma.setup_overhead = SetupOverheads{4us, 5us};
    dma.queue_overhead = 2us;
    return dma;
}

ScenarioConfig fpga_scenario(std::string name, MemoryEndpointConfig endpoint) {
    ScenarioConfig cfg;
    cfg.name = std::move(name);
    cfg.engine = EngineKind::XdmaDescriptor;
    cfg.mode = OperatingMode::MsixInterrupt;
    cfg.link = alveo_link();
    cfg.fabric = AxiFabricConfig{};
    cfg.endpoint = endpoint;
    cfg.engine_params = xdma_engine();
    return cfg;
}

// BlueField-2: PCIe Gen4 x16, one DDR4-3200 channel, 100 Gb/s port.
ScenarioConfig bluefield2_rdma(std::string name, EngineKind verb) {
    ScenarioConfig cfg;
    cfg.name = std::move(name);
    cfg.engine = verb;
    cfg.mode = OperatingMode::MsixInterrupt;
    cfg.link.lanes = 16;
    cfg.link.per_lane = Bandwidth{2.0};
    cfg.link.effective_cap = Bandwidth{31.5};
    cfg.link.max_payload_bytes = 256;
    cfg.endpoint = MemoryEndpointConfig{MemoryKind::Ddr4, ByteSize{16 * GiB}, Bandwidth{25.6}, 90ns, 512};

    RdmaConfig rdma;
    rdma.link_gbps = 100.0;
    rdma.mtu_bytes = 4096;
    rdma.packet_overhead_bytes = 58;  // RoCEv2: Ethernet + IPv4 + UDP + BTH + ICRC + FCS
    rdma.verb_setup_read = 2500ns;
    rdma.verb_setup_write = 2000ns;
    rdma.round_trip = 3us;
    rdma.host_memory_bw = Bandwidth{25.6};
    cfg.engine_params = rdma;
    return cfg;
}

DmaEngineConfig& dma_of(ScenarioConfig& cfg) { return std::get<DmaEngineConfig>(cfg.engine_params); }

// Values produced by `nicsim calibrate` (see data/calibrated_defaults.toml).
constexpr double kBramCapH2c = 7.97369307676951;
constexpr double kBramCapC2h = 8.231364806493119;
constexpr double kDdrCapH2c = 11.243532443046568;
constexpr double kDdrCapC2h = 12.550080966949462;
constexpr double kDdrAggregateH2c = 9.866666666666667;
constexpr double kMicroblazeFactorH2c = 0.8753027002016704;
constexpr double kMicroblazeFactorC2h = 0.7756297667821248;
constexpr double kPetalinuxFactorH2c = 0.8525052738189698;
constexpr double kPetalinuxFactorC2h = 0.44583333333333325;
constexpr double kPetalinuxAggregateC2h = 13.033333333333333;

}  // namespace

ScenarioConfig uncalibrated_bram_xdma() { return fpga_scenario("bram-xdma", alveo_bram()); }

ScenarioConfig uncalibrated_ddr_xdma() { return fpga_scenario("ddr-xdma", alveo_ddr4()); }

ScenarioConfig uncalibrated_ddr_microblaze(const ScenarioConfig& ddr_base) {
    ScenarioConfig cfg = ddr_base;
    cfg.name = "ddr-microblaze";
    cfg.fabric.contending_master = true;
    cfg.fabric.contention_factor_h2c = 1.0;
    cfg.fabric.contention_factor_c2h = 1.0;
    return cfg;
}

ScenarioConfig uncalibrated_ddr_petalinux(const ScenarioConfig& ddr_base) {
    using namespace std::chrono_literals;
    ScenarioConfig cfg = uncalibrated_ddr_microblaze(ddr_base);
    cfg.name = "ddr-petalinux";
    auto& dma = dma_of(cfg);
    // Kernel scheduling and memory management on the soft core.
    dma.setup_overhead = SetupOverheads{7us, 8us};
    dma.aggregate_cap_h2c = Bandwidth{9.0};
    dma.aggregate_cap_c2h.reset();
    return cfg;
}

std::vector<ScenarioConfig> builtin_scenarios() {
    ScenarioConfig bram = uncalibrated_bram_xdma();
    dma_of(bram).per_channel_cap_h2c = Bandwidth{kBramCapH2c};
    dma_of(bram).per_channel_cap_c2h = Bandwidth{kBramCapC2h};

    ScenarioConfig ddr = uncalibrated_ddr_xdma();
    dma_of(ddr).per_channel_cap_h2c = Bandwidth{kDdrCapH2c};
    dma_of(ddr).per_channel_cap_c2h = Bandwidth{kDdrCapC2h};
    dma_of(ddr).aggregate_cap_h2c = Bandwidth{kDdrAggregateH2c};

    ScenarioConfig microblaze = uncalibrated_ddr_microblaze(ddr);
    microblaze.fabric.contention_factor_h2c = kMicroblazeFactorH2c;
    microblaze.fabric.contention_factor_c2h = kMicroblazeFactorC2h;

    ScenarioConfig petalinux = uncalibrated_ddr_petalinux(ddr);
    petalinux.fabric.contention_factor_h2c = kPetalinuxFactorH2c;
    petalinux.fabric.contention_factor_c2h = kPetalinuxFactorC2h;
    dma_of(petalinux).aggregate_cap_c2h = Bandwidth{kPetalinuxAggregateC2h};

    return {bram,
            ddr,
            microblaze,
            petalinux,
            bluefield2_rdma("rdma-bf2-read", EngineKind::RdmaRead),
            bluefield2_rdma("rdma-bf2-write", EngineKind::RdmaWrite)};
}

ScenarioConfig builtin_scenario(std::string_view name) {
    auto all = builtin_scenarios();
    auto it = std::find_if(all.begin(), all.end(), [&](const ScenarioConfig& c) { return c.name == name; });
    if (it == all.end()) {
        throw Error(ErrorCode::InvalidConfig, "no builtin scenario named '" + std::string(name) + "'");
    }
    return *it;
}

}  // namespace nicsim
