#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "nicsim/scenario.hpp"
#include "nicsim/units.hpp"

namespace nicsim {

/// One scatter/gather element.
struct Descriptor {
    ByteSize source_offset;
    ByteSize dest_offset;
    ByteSize length;

    bool operator==(const Descriptor&) const = default;
};

struct DescriptorList {
    std::vector<Descriptor> entries;

    ByteSize total_bytes() const;
};

/// Splits a request into page-sized descriptors. Host-side buffers start at
/// `host_offset`; card-side addresses start at req.offset. For H2C the host is
/// the source, for C2H the card is.
DescriptorList build_descriptors(const TransferRequest& req, ByteSize granularity,
                                 ByteSize host_offset = ByteSize{0});

struct ChannelPlan {
    std::vector<ByteSize> per_channel_sizes;

    ByteSize largest() const;
};

/// Equal split; remainder bytes go one per channel starting from channel 0.
/// Channels must be in [1, 4].
ChannelPlan channel_split(ByteSize size, int channels);

/// Descriptors needed across all channels of a plan.
std::uint64_t descriptor_count(const ChannelPlan& plan, ByteSize granularity);

/// Fixed per-transfer cost. DMA: setup(mode) + descriptor_overhead x descriptors
/// (+ queue overhead for QDMA). RDMA: verb setup (+ round trip for reads).
Nanoseconds engine_overheads(const ValidatedScenario& scenario, const TransferRequest& req);

/// Bottleneck rate of the data path for this request.
Bandwidth steady_rate(const ValidatedScenario& scenario, const TransferRequest& req);

struct TransferTiming {
    Nanoseconds total{0.0};
    Bandwidth bandwidth;
    Nanoseconds fixed_overhead{0.0};  ///< engine overheads + first-access latency
    Bandwidth steady;
};

/// Latency-plus-bandwidth model: T = overheads + access latency + size / steady.
/// Throws CapacityExceeded / InvalidRequest before computing anything.
TransferTiming analytic_transfer_time(const ValidatedScenario& scenario, const TransferRequest& req);

RdmaVerb verb_of(EngineKind engine);

/// Verbs transfer of `size` bytes on an SoC scenario. Reads pay an extra
/// round trip. Throws IncompatibleEngine for FPGA scenarios.
TransferTiming rdma_transfer_time(const ValidatedScenario& scenario, RdmaVerb verb, ByteSize size);

/// InfiniBand generation signalling rate in Gb/s (SDR..NDR).
double generation_preset(std::string_view name);

}  // namespace nicsim
