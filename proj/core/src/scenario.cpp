#include "nicsim/scenario.hpp"

#include <algorithm>
#include <array>

#include "nicsim/error.hpp"

namespace nicsim {

namespace {

template <typename Enum, std::size_t N>
Enum parse_token(std::string_view token, const std::array<Enum, N>& values, std::string_view what) {
    for (Enum v : values) {
        if (to_token(v) == token) return v;
    }
    throw Error(ErrorCode::ParseError, "unknown " + std::string(what) + " '" + std::string(token) + "'");
}

void require_positive(Bandwidth bw, std::string_view what) {
    if (!(bw.gbps > 0.0)) {
        throw Error(ErrorCode::NonPositiveRate, std::string(what) + " must be > 0");
    }
}

void require_non_negative(Nanoseconds t, std::string_view what) {
    if (!(t.count() >= 0.0)) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be >= 0");
    }
}

void validate_dma(const DmaEngineConfig& dma) {
    if (dma.max_channels < 1 || dma.max_channels > 4) {
        throw Error(ErrorCode::InvalidConfig, "dma.max_channels must be in [1, 4]");
    }
    require_positive(dma.per_channel_cap_h2c, "dma.per_channel_cap_h2c");
    require_positive(dma.per_channel_cap_c2h, "dma.per_channel_cap_c2h");
    if (dma.aggregate_cap_h2c) require_positive(*dma.aggregate_cap_h2c, "dma.aggregate_cap_h2c");
    if (dma.aggregate_cap_c2h) require_positive(*dma.aggregate_cap_c2h, "dma.aggregate_cap_c2h");
    if (dma.descriptor_granularity.bytes < 4096) {
        throw Error(ErrorCode::InvalidConfig, "dma.descriptor_granularity must be >= 4096 bytes");
    }
    require_non_negative(dma.descriptor_overhead, "dma.descriptor_overhead");
    require_non_negative(dma.setup_overhead.polled, "dma.setup_overhead.polled");
    require_non_negative(dma.setup_overhead.msix, "dma.setup_overhead.msix");
    require_non_negative(dma.queue_overhead, "dma.queue_overhead");
}

void validate_rdma(const RdmaConfig& rdma) {
    // Generation presets plus common Ethernet port speeds.
    constexpr std::array<double, 9> kKnownSpeeds{10, 20, 25, 40, 50, 56, 100, 200, 400};
    if (!(rdma.link_gbps > 0.0)) {
        throw Error(ErrorCode::NonPositiveRate, "rdma.link_gbps must be > 0");
    }
    if (std::find(kKnownSpeeds.begin(), kKnownSpeeds.end(), rdma.link_gbps) == kKnownSpeeds.end()) {
        throw Error(ErrorCode::InvalidConfig,
                    "rdma.link_gbps must be a generation preset or a standard port speed");
    }
    if (rdma.mtu_bytes < 256 || rdma.mtu_bytes > 4096) {
        throw Error(ErrorCode::InvalidConfig, "rdma.mtu_bytes must be in [256, 4096]");
    }
    require_positive(rdma.host_memory_bw, "rdma.host_memory_bw");
    require_non_negative(rdma.verb_setup_read, "rdma.verb_setup_read");
    require_non_negative(rdma.verb_setup_write, "rdma.verb_setup_write");
    require_non_negative(rdma.round_trip, "rdma.round_trip");
}

}  // namespace

std::string_view to_token(Direction d) {
    return d == Direction::HostToCard ? "h2c" : "c2h";
}

std::string_view to_token(OperatingMode m) {
    return m == OperatingMode::Polled ? "polled" : "msix";
}

std::string_view to_token(EngineKind e) {
    switch (e) {
        case EngineKind::XdmaDescriptor: return "xdma";
        case EngineKind::QdmaQueue:      return "qdma";
        case EngineKind::RdmaRead:       return "rdma-read";
        case EngineKind::RdmaWrite:      return "rdma-write";
    }
    return "?";
}

std::string_view to_token(MemoryKind k) {
    switch (k) {
        case MemoryKind::Bram:     return "bram";
        case MemoryKind::Ddr4:     return "ddr4";
        case MemoryKind::HostDram: return "host-dram";
    }
    return "?";
}

Direction parse_direction(std::string_view token) {
    return parse_token(token, std::array{Direction::HostToCard, Direction::CardToHost}, "direction");
}

OperatingMode parse_mode(std::string_view token) {
    return parse_token(token, std::array{OperatingMode::Polled, OperatingMode::MsixInterrupt}, "mode");
}

EngineKind parse_engine(std::string_view token) {
    return parse_token(token,
                       std::array{EngineKind::XdmaDescriptor, EngineKind::QdmaQueue,
                                  EngineKind::RdmaRead, EngineKind::RdmaWrite},
                       "engine");
}

MemoryKind parse_memory_kind(std::string_view token) {
    return parse_token(token, std::array{MemoryKind::Bram, MemoryKind::Ddr4, MemoryKind::HostDram},
                       "memory kind");
}

double AxiFabricConfig::contention_factor(Direction d) const {
    if (!contending_master) return 1.0;
    return d == Direction::HostToCard ? contention_factor_h2c : contention_factor_c2h;
}

const DmaEngineConfig& ValidatedScenario::dma() const {
    const auto* dma = std::get_if<DmaEngineConfig>(&cfg_.engine_params);
    if (dma == nullptr) {
        throw Error(ErrorCode::IncompatibleEngine, cfg_.name + " has no DMA engine");
    }
    return *dma;
}

const RdmaConfig& ValidatedScenario::rdma() const {
    const auto* rdma = std::get_if<RdmaConfig>(&cfg_.engine_params);
    if (rdma == nullptr) {
        throw Error(ErrorCode::IncompatibleEngine, cfg_.name + " is not an RDMA scenario");
    }
    return *rdma;
}

int ValidatedScenario::max_channels() const {
    return is_rdma() ? 1 : dma().max_channels;
}

ValidatedScenario validate_scenario(ScenarioConfig cfg) {
    if (cfg.name.empty()) {
        throw Error(ErrorCode::InvalidConfig, "scenario name is empty");
    }

    const auto& link = cfg.link;
    constexpr std::array<int, 6> kLaneWidths{1, 2, 4, 8, 16, 32};
    if (std::find(kLaneWidths.begin(), kLaneWidths.end(), link.lanes) == kLaneWidths.end()) {
        throw Error(ErrorCode::InvalidConfig, "link.lanes must be one of 1,2,4,8,16,32");
    }
    require_positive(link.per_lane, "link.per_lane_bw");
    require_positive(link.effective_cap, "link.effective_cap");
    const double raw = link.lanes * link.per_lane.gbps;
    if (link.effective_cap.gbps > raw * (1.0 + 1e-9)) {
        throw Error(ErrorCode::CapExceeded, "link.effective_cap " + std::to_string(link.effective_cap.gbps) +
                                                " exceeds lanes x per_lane = " + std::to_string(raw));
    }
    if (link.max_payload_bytes < 64 || link.max_payload_bytes > 4096) {
        throw Error(ErrorCode::InvalidConfig, "link.max_payload_bytes must be in [64, 4096]");
    }
    if (link.tlp_header_bytes < 12 || link.tlp_header_bytes > 16) {
        throw Error(ErrorCode::InvalidConfig, "link.tlp_header_bytes must be in [12, 16]");
    }

    auto& fabric = cfg.fabric;
    require_positive(fabric.cap, "fabric.cap");
    if (fabric.contending_master) {
        for (double f : {fabric.contention_factor_h2c, fabric.contention_factor_c2h}) {
            if (!(f > 0.0) || f > 1.0) {
                throw Error(ErrorCode::InvalidConfig, "fabric contention factors must be in (0, 1]");
            }
        }
    } else {
        fabric.contention_factor_h2c = 1.0;
        fabric.contention_factor_c2h = 1.0;
    }

    const auto& ep = cfg.endpoint;
    require_positive(ep.peak_bw, "endpoint.peak_bw");
    if (ep.capacity.bytes == 0) {
        throw Error(ErrorCode::InvalidConfig, "endpoint.capacity must be > 0");
    }
    if (ep.burst_bytes == 0) {
        throw Error(ErrorCode::InvalidConfig, "endpoint.burst_bytes must be > 0");
    }
    require_non_negative(ep.access_latency, "endpoint.access_latency");

    if (is_rdma(cfg.engine)) {
        const auto* rdma = std::get_if<RdmaConfig>(&cfg.engine_params);
        if (rdma == nullptr || ep.kind == MemoryKind::Bram) {
            throw Error(ErrorCode::IncompatibleEngine,
                        "RDMA engines need [rdma] parameters and an SoC memory endpoint");
        }
        validate_rdma(*rdma);
    } else {
        const auto* dma = std::get_if<DmaEngineConfig>(&cfg.engine_params);
        if (dma == nullptr || ep.kind == MemoryKind::HostDram) {
            throw Error(ErrorCode::IncompatibleEngine,
                        "XDMA/QDMA engines need [dma] parameters and card memory");
        }
        validate_dma(*dma);
    }
    return ValidatedScenario(std::move(cfg));
}

void check_request(const ValidatedScenario& scenario, const TransferRequest& req) {
    if (req.size.bytes == 0) {
        throw Error(ErrorCode::InvalidRequest, "transfer size must be >= 1 byte");
    }
    if (req.channels < 1 || req.channels > scenario.max_channels()) {
        throw Error(ErrorCode::InvalidRequest,
                    "channel count " + std::to_string(req.channels) + " outside [1, " +
                        std::to_string(scenario.max_channels()) + "] for " + scenario.name());
    }
}

std::vector<ByteSize> standard_sizes(const ScenarioConfig& cfg) {
    const std::uint64_t top = std::min<std::uint64_t>(4 * MiB, cfg.endpoint.capacity.bytes);
    return power_of_two_sizes(ByteSize{64}, ByteSize{top});
}

}  // namespace nicsim
