#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nicsim/units.hpp"

namespace nicsim {

enum class Direction : std::uint8_t { HostToCard, CardToHost };
enum class OperatingMode : std::uint8_t { Polled, MsixInterrupt };
enum class EngineKind : std::uint8_t { XdmaDescriptor, QdmaQueue, RdmaRead, RdmaWrite };
enum class MemoryKind : std::uint8_t { Bram, Ddr4, HostDram };

/// Short lowercase tokens used by the config file, CSV and CLI.
std::string_view to_token(Direction d);
std::string_view to_token(OperatingMode m);
std::string_view to_token(EngineKind e);
std::string_view to_token(MemoryKind k);

Direction parse_direction(std::string_view token);
OperatingMode parse_mode(std::string_view token);
EngineKind parse_engine(std::string_view token);
MemoryKind parse_memory_kind(std::string_view token);

constexpr bool is_rdma(EngineKind e) {
    return e == EngineKind::RdmaRead || e == EngineKind::RdmaWrite;
}

/// PCIe lane group plus the transaction-layer packet geometry.
struct PcieLinkConfig {
    int lanes = 16;
    Bandwidth per_lane{1.0};
    Bandwidth effective_cap{15.8};   ///< Usable link rate after encoding/DLL losses.
    std::uint32_t max_payload_bytes = 256;
    std::uint32_t tlp_header_bytes = 12;   ///< 3 DW memory request header.
    std::uint32_t tlp_framing_bytes = 12;  ///< Sequence number, LCRC, framing symbols.

    std::uint32_t per_tlp_overhead() const { return tlp_header_bytes + tlp_framing_bytes; }
    bool operator==(const PcieLinkConfig&) const = default;
};

struct MemoryEndpointConfig {
    MemoryKind kind = MemoryKind::Ddr4;
    ByteSize capacity{16 * GiB};
    Bandwidth peak_bw{19.2};
    Nanoseconds access_latency{0.0};
    std::uint32_t burst_bytes = 512;

    bool operator==(const MemoryEndpointConfig&) const = default;
};

/// AXI interconnect between the PCIe engine and card memory.
struct AxiFabricConfig {
    Bandwidth cap{16.0};
    bool contending_master = false;
    double contention_factor_h2c = 1.0;
    double contention_factor_c2h = 1.0;

    /// Per-direction multiplier on engine channel caps; 1.0 without a contender.
    double contention_factor(Direction d) const;
    bool operator==(const AxiFabricConfig&) const = default;
};

struct SetupOverheads {
    Nanoseconds polled{0.0};
    Nanoseconds msix{0.0};

    Nanoseconds operator[](OperatingMode mode) const {
        return mode == OperatingMode::Polled ? polled : msix;
    }
    bool operator==(const SetupOverheads&) const = default;
};

/// XDMA/QDMA engine parameters.
struct DmaEngineConfig {
    int max_channels = 4;
    Bandwidth per_channel_cap_h2c{10.0};
    Bandwidth per_channel_cap_c2h{10.0};
    /// Ceiling on the interleaved aggregate when more than one channel is active.
    std::optional<Bandwidth> aggregate_cap_h2c;
    std::optional<Bandwidth> aggregate_cap_c2h;
    ByteSize descriptor_granularity{4096};
    Nanoseconds descriptor_overhead{10.0};
    SetupOverheads setup_overhead;
    /// Queue/doorbell management cost, charged only for QdmaQueue engines.
    Nanoseconds queue_overhead{2000.0};

    Bandwidth per_channel_cap(Direction d) const {
        return d == Direction::HostToCard ? per_channel_cap_h2c : per_channel_cap_c2h;
    }
    std::optional<Bandwidth> aggregate_cap(Direction d) const {
        return d == Direction::HostToCard ? aggregate_cap_h2c : aggregate_cap_c2h;
    }
    bool operator==(const DmaEngineConfig&) const = default;
};

enum class RdmaVerb : std::uint8_t { Read, Write };

/// Verbs-level RDMA path of an SoC SmartNIC.
struct RdmaConfig {
    double link_gbps = 100.0;  ///< Port speed in gigabits per second.
    std::uint32_t mtu_bytes = 4096;
    std::uint32_t packet_overhead_bytes = 58;
    Nanoseconds verb_setup_read{0.0};
    Nanoseconds verb_setup_write{0.0};
    Nanoseconds round_trip{0.0};
    Bandwidth host_memory_bw{25.6};

    Nanoseconds verb_setup(RdmaVerb v) const {
        return v == RdmaVerb::Read ? verb_setup_read : verb_setup_write;
    }
    Bandwidth wire_rate() const { return Bandwidth{link_gbps / 8.0}; }
    bool operator==(const RdmaConfig&) const = default;
};

using EngineParams = std::variant<DmaEngineConfig, RdmaConfig>;

/// Full parameterization of one experiment design.
struct ScenarioConfig {
    std::string name;
    EngineKind engine = EngineKind::XdmaDescriptor;
    OperatingMode mode = OperatingMode::MsixInterrupt;
    PcieLinkConfig link;
    AxiFabricConfig fabric;
    MemoryEndpointConfig endpoint;
    EngineParams engine_params = DmaEngineConfig{};

    bool operator==(const ScenarioConfig&) const = default;
};

/// Immutable scenario that passed validation. Safe to share across threads.
class ValidatedScenario {
public:
    const ScenarioConfig& config() const { return cfg_; }
    const std::string& name() const { return cfg_.name; }
    bool is_rdma() const { return nicsim::is_rdma(cfg_.engine); }

    /// Only valid for XDMA/QDMA scenarios.
    const DmaEngineConfig& dma() const;
    /// Only valid for RDMA scenarios.
    const RdmaConfig& rdma() const;

    /// Channels per direction the engine supports (RDMA uses a single queue pair).
    int max_channels() const;

    bool operator==(const ValidatedScenario&) const = default;

private:
    explicit ValidatedScenario(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}
    friend ValidatedScenario validate_scenario(ScenarioConfig cfg);

    ScenarioConfig cfg_;
};

/// Checks every scenario invariant. Contention factors are normalized to 1.0
/// when no contending master is present.
ValidatedScenario validate_scenario(ScenarioConfig cfg);

/// One memory-access job.
struct TransferRequest {
    Direction direction = Direction::HostToCard;
    ByteSize size{0};
    int channels = 1;
    ByteSize offset{0};

    bool operator==(const TransferRequest&) const = default;
};

/// Validates a request against the engine (size, channel count). Capacity
/// is checked separately by capacity_check.
void check_request(const ValidatedScenario& scenario, const TransferRequest& req);

/// The six calibrated presets: bram-xdma, ddr-xdma, ddr-microblaze,
/// ddr-petalinux, rdma-bf2-read, rdma-bf2-write.
std::vector<ScenarioConfig> builtin_scenarios();

/// Looks up a builtin preset by name; throws InvalidConfig if unknown.
ScenarioConfig builtin_scenario(std::string_view name);

/// Presets before calibration: physical constants in place, fitted
/// parameters at neutral starting values. ddr-microblaze and ddr-petalinux
/// derive from `ddr_base` (normally the fitted ddr-xdma).
ScenarioConfig uncalibrated_bram_xdma();
ScenarioConfig uncalibrated_ddr_xdma();
ScenarioConfig uncalibrated_ddr_microblaze(const ScenarioConfig& ddr_base);
ScenarioConfig uncalibrated_ddr_petalinux(const ScenarioConfig& ddr_base);

/// Standard sweep sizes: powers of two from 64 B up to min(4 MiB, capacity).
std::vector<ByteSize> standard_sizes(const ScenarioConfig& cfg);

}  // namespace nicsim
