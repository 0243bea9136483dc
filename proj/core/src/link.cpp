#include "nicsim/link.hpp"

namespace nicsim {

TlpBreakdown packetize(ByteSize size, const PcieLinkConfig& link) {
    TlpBreakdown out;
    out.tlp_count = ceil_div(size.bytes, link.max_payload_bytes);
    out.payload_bytes = size;
    out.wire_bytes = ByteSize{size.bytes + out.tlp_count * link.per_tlp_overhead()};
    out.efficiency = out.wire_bytes.bytes == 0
                         ? 0.0
                         : static_cast<double>(size.bytes) / static_cast<double>(out.wire_bytes.bytes);
    return out;
}

Bandwidth link_payload_cap(const PcieLinkConfig& link, ByteSize size) {
    return Bandwidth{link.effective_cap.gbps * packetize(size, link).efficiency};
}

double max_link_efficiency(const PcieLinkConfig& link) {
    const double mps = link.max_payload_bytes;
    return mps / (mps + link.per_tlp_overhead());
}

Bandwidth raw_lane_bandwidth(const PcieLinkConfig& link) {
    return Bandwidth{link.lanes * link.per_lane.gbps};
}

Nanoseconds serialize_time(ByteSize wire_bytes, const PcieLinkConfig& link) {
    return transfer_time(static_cast<double>(wire_bytes.bytes), link.effective_cap);
}

}  // namespace nicsim
