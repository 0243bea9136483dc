#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "nicsim/scenario.hpp"

namespace nicsim {

namespace toml {

/// The TOML subset the scenario files use: one level of [tables], bare keys,
/// strings, integers, floats and booleans, '#' comments.
using Value = std::variant<bool, std::int64_t, double, std::string>;

struct Document {
    /// Keyed by table name; "" is the root table.
    std::map<std::string, std::map<std::string, Value>> tables;
};

Document parse(std::string_view text);

/// Shortest round-trip float text, always with a '.' or exponent.
std::string format_double(double v);
std::string format_value(const Value& v);

}  // namespace toml

/// Scenario file schema (one key per struct field):
///
///   name, engine (xdma|qdma|rdma-read|rdma-write), mode (polled|msix)
///   [link]     lanes, per_lane_gbps, effective_cap_gbps, max_payload_bytes,
///              tlp_header_bytes, tlp_framing_bytes
///   [fabric]   cap_gbps, contending_master, contention_factor_h2c, contention_factor_c2h
///   [endpoint] kind (bram|ddr4|host-dram), capacity_bytes, peak_gbps,
///              access_latency_ns, burst_bytes
///   [dma]      max_channels, per_channel_cap_h2c_gbps, per_channel_cap_c2h_gbps,
///              aggregate_cap_h2c_gbps?, aggregate_cap_c2h_gbps?,
///              descriptor_granularity_bytes, descriptor_overhead_ns,
///              setup_overhead_polled_ns, setup_overhead_msix_ns, queue_overhead_ns
///   [rdma]     link_gbps, mtu_bytes, packet_overhead_bytes, verb_setup_read_ns,
///              verb_setup_write_ns, round_trip_ns, host_memory_gbps
///
/// Exactly one of [dma] / [rdma] must be present. Omitted keys keep their
/// struct defaults; unknown keys are a ParseError.
ScenarioConfig scenario_from_toml(std::string_view text);
std::string scenario_to_toml(const ScenarioConfig& cfg);

ScenarioConfig load_scenario_file(const std::filesystem::path& path);
void save_scenario_file(const ScenarioConfig& cfg, const std::filesystem::path& path);

}  // namespace nicsim
