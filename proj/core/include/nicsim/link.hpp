#pragma once

#include <cstdint>

#include "nicsim/scenario.hpp"
#include "nicsim/units.hpp"

namespace nicsim {

/// Transaction-layer view of one payload crossing the link.
struct TlpBreakdown {
    std::uint64_t tlp_count = 0;
    ByteSize payload_bytes;
    ByteSize wire_bytes;   ///< payload + tlp_count * (header + framing)
    double efficiency = 0.0;

    bool operator==(const TlpBreakdown&) const = default;
};

/// Splits `size` into max-payload TLPs; the last TLP carries the remainder.
TlpBreakdown packetize(ByteSize size, const PcieLinkConfig& link);

/// Payload-visible link ceiling for a transfer of `size`: effective_cap x efficiency.
Bandwidth link_payload_cap(const PcieLinkConfig& link, ByteSize size);

/// Asymptotic efficiency max_payload / (max_payload + header + framing).
double max_link_efficiency(const PcieLinkConfig& link);

/// Raw lane aggregate, lanes x per_lane.
Bandwidth raw_lane_bandwidth(const PcieLinkConfig& link);

Nanoseconds serialize_time(ByteSize wire_bytes, const PcieLinkConfig& link);

}  // namespace nicsim
