#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nicsim/scenario.hpp"
#include "nicsim/units.hpp"

namespace nicsim {

/// A measured value (bw_low == bw_high) or range attached to one
/// (scenario, direction, channels) series.
struct ReferencePoint {
    std::string scenario;
    Direction direction = Direction::HostToCard;
    int channels = 1;
    /// Transfer size the value was read at; empty means peak over the sweep.
    std::optional<ByteSize> size;
    Bandwidth bw_low;
    Bandwidth bw_high;
    std::string label;

    bool is_interval() const { return bw_low != bw_high; }
    bool operator==(const ReferencePoint&) const = default;
};

ReferencePoint reference_value(std::string scenario, Direction d, int channels, std::optional<ByteSize> size,
                               double gbps, std::string label);
ReferencePoint reference_range(std::string scenario, Direction d, int channels, std::optional<ByteSize> size,
                               double low_gbps, double high_gbps, std::string label);

struct ReferenceSet {
    std::vector<ReferencePoint> points;

    ReferenceSet for_scenario(std::string_view name) const;
    bool empty() const { return points.empty(); }
};

/// Bandwidths measured on the Alveo U250 designs: BRAM at 1 MiB, the DDR
/// designs as peak over the sweep.
ReferenceSet published_references();

/// Relative distance from `value` to the reference interval; 0 inside it.
double interval_distance(Bandwidth value, const ReferencePoint& ref);

/// Pass rule: inside [low (1 - tol), high (1 + tol)].
bool within_tolerance(Bandwidth value, const ReferencePoint& ref, double tolerance);

std::string describe(const ReferencePoint& ref);

}  // namespace nicsim
