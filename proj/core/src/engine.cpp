#include "nicsim/engine.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "nicsim/error.hpp"
#include "nicsim/fabric.hpp"
#include "nicsim/link.hpp"

namespace nicsim {

namespace {

/// Wire bytes for one channel share, packetized descriptor by descriptor.
double share_wire_bytes(std::uint64_t share, std::uint64_t granularity, const PcieLinkConfig& link) {
    const std::uint64_t full = share / granularity;
    const std::uint64_t rest = share % granularity;
    double wire = static_cast<double>(full) * packetize(ByteSize{granularity}, link).wire_bytes.bytes;
    if (rest > 0) wire += packetize(ByteSize{rest}, link).wire_bytes.bytes;
    return wire;
}

/// Time the endpoint spends on `share` bytes accessed in runs of `run` bytes.
/// Each channel streams one contiguous region, so the burst penalty follows the share.
double memory_time(std::uint64_t share, const MemoryEndpointConfig& ep) {
    if (share == 0) return 0.0;
    return transfer_time(static_cast<double>(share), memory_service_rate(ep, ByteSize{share})).count();
}

Bandwidth dma_steady_rate(const ValidatedScenario& scenario, const TransferRequest& req) {
    const auto& cfg = scenario.config();
    const auto& dma = scenario.dma();
    const auto plan = channel_split(req.size, req.channels);
    const double size = static_cast<double>(req.size.bytes);
    const std::uint64_t g = dma.descriptor_granularity.bytes;
    const auto share = fabric_share(cfg.fabric, req.direction);

    // Channels run in parallel, so the largest share sets the engine-bound time.
    const double per_channel = dma.per_channel_cap(req.direction).gbps * share.factor;
    Bandwidth rate{per_channel * size / static_cast<double>(plan.largest().bytes)};

    if (req.channels > 1) {
        if (auto agg = dma.aggregate_cap(req.direction)) rate = min(rate, *agg);
    }

    double wire = 0.0;
    double mem_time = 0.0;
    for (ByteSize s : plan.per_channel_sizes) {
        wire += share_wire_bytes(s.bytes, g, cfg.link);
        mem_time += memory_time(s.bytes, cfg.endpoint);
    }
    rate = min(rate, Bandwidth{cfg.link.effective_cap.gbps * size / wire});
    rate = min(rate, share.cap);
    rate = min(rate, Bandwidth{size / mem_time});
    return min(rate, cfg.endpoint.peak_bw);
}

Bandwidth rdma_steady_rate(const ValidatedScenario& scenario, ByteSize size) {
    const auto& cfg = scenario.config();
    const auto& rdma = scenario.rdma();
    const double bytes = static_cast<double>(size.bytes);
    const double packets = static_cast<double>(ceil_div(size.bytes, rdma.mtu_bytes));
    const double wire = bytes + packets * rdma.packet_overhead_bytes;

    Bandwidth rate{rdma.wire_rate().gbps * bytes / wire};
    rate = min(rate, Bandwidth{bytes / memory_time(size.bytes, cfg.endpoint)});
    rate = min(rate, rdma.host_memory_bw);
    return min(rate, cfg.endpoint.peak_bw);
}

}  // namespace

ByteSize DescriptorList::total_bytes() const {
    ByteSize total;
    for (const auto& d : entries) total = total + d.length;
    return total;
}

DescriptorList build_descriptors(const TransferRequest& req, ByteSize granularity, ByteSize host_offset) {
    if (granularity.bytes == 0) {
        throw Error(ErrorCode::InvalidRequest, "descriptor granularity must be >= 1");
    }
    DescriptorList list;
    list.entries.reserve(ceil_div(req.size.bytes, granularity.bytes));
    for (std::uint64_t done = 0; done < req.size.bytes; done += granularity.bytes) {
        const std::uint64_t len = std::min(granularity.bytes, req.size.bytes - done);
        ByteSize host{host_offset.bytes + done};
        ByteSize card{req.offset.bytes + done};
        if (req.direction == Direction::HostToCard) {
            list.entries.push_back({host, card, ByteSize{len}});
        } else {
            list.entries.push_back({card, host, ByteSize{len}});
        }
    }
    return list;
}

ByteSize ChannelPlan::largest() const {
    ByteSize best;
    for (ByteSize s : per_channel_sizes) best = std::max(best, s);
    return best;
}

ChannelPlan channel_split(ByteSize size, int channels) {
    if (channels < 1 || channels > 4) {
        throw Error(ErrorCode::InvalidRequest, "channel count must be in [1, 4]");
    }
    const auto n = static_cast<std::uint64_t>(channels);
    const std::uint64_t base = size.bytes / n;
    const std::uint64_t extra = size.bytes % n;
    ChannelPlan plan;
    for (std::uint64_t c = 0; c < n; ++c) {
        plan.per_channel_sizes.push_back(ByteSize{base + (c < extra ? 1 : 0)});
    }
    return plan;
}

std::uint64_t descriptor_count(const ChannelPlan& plan, ByteSize granularity) {
    std::uint64_t count = 0;
    for (ByteSize s : plan.per_channel_sizes) count += ceil_div(s.bytes, granularity.bytes);
    return count;
}

Nanoseconds engine_overheads(const ValidatedScenario& scenario, const TransferRequest& req) {
    const auto& cfg = scenario.config();
    if (scenario.is_rdma()) {
        const auto& rdma = scenario.rdma();
        const RdmaVerb verb = verb_of(cfg.engine);
        Nanoseconds t = rdma.verb_setup(verb);
        if (verb == RdmaVerb::Read) t += rdma.round_trip;
        return t;
    }
    const auto& dma = scenario.dma();
    const auto plan = channel_split(req.size, req.channels);
    const auto descriptors = static_cast<double>(descriptor_count(plan, dma.descriptor_granularity));
    Nanoseconds t = dma.setup_overhead[cfg.mode] + dma.descriptor_overhead * descriptors;
    if (cfg.engine == EngineKind::QdmaQueue) t += dma.queue_overhead;
    return t;
}

Bandwidth steady_rate(const ValidatedScenario& scenario, const TransferRequest& req) {
    check_request(scenario, req);
    return scenario.is_rdma() ? rdma_steady_rate(scenario, req.size) : dma_steady_rate(scenario, req);
}

TransferTiming analytic_transfer_time(const ValidatedScenario& scenario, const TransferRequest& req) {
    check_request(scenario, req);
    capacity_check(scenario.config().endpoint, req);
    if (scenario.is_rdma()) {
        return rdma_transfer_time(scenario, verb_of(scenario.config().engine), req.size);
    }
    TransferTiming out;
    out.steady = steady_rate(scenario, req);
    out.fixed_overhead = engine_overheads(scenario, req) + scenario.config().endpoint.access_latency;
    out.total = out.fixed_overhead + transfer_time(static_cast<double>(req.size.bytes), out.steady);
    out.bandwidth = achieved_rate(req.size, out.total);
    return out;
}

RdmaVerb verb_of(EngineKind engine) {
    return engine == EngineKind::RdmaRead ? RdmaVerb::Read : RdmaVerb::Write;
}

TransferTiming rdma_transfer_time(const ValidatedScenario& scenario, RdmaVerb verb, ByteSize size) {
    if (!scenario.is_rdma()) {
        throw Error(ErrorCode::IncompatibleEngine, scenario.name() + " is not an RDMA scenario");
    }
    if (size.bytes == 0) {
        throw Error(ErrorCode::InvalidRequest, "transfer size must be >= 1 byte");
    }
    const auto& cfg = scenario.config();
    const auto& rdma = scenario.rdma();
    capacity_check(cfg.endpoint, TransferRequest{Direction::HostToCard, size, 1, ByteSize{0}});

    TransferTiming out;
    out.steady = rdma_steady_rate(scenario, size);
    out.fixed_overhead = rdma.verb_setup(verb) + cfg.endpoint.access_latency;
    if (verb == RdmaVerb::Read) out.fixed_overhead += rdma.round_trip;
    out.total = out.fixed_overhead + transfer_time(static_cast<double>(size.bytes), out.steady);
    out.bandwidth = achieved_rate(size, out.total);
    return out;
}

double generation_preset(std::string_view name) {
    static constexpr std::array<std::pair<std::string_view, double>, 7> kGenerations{{
        {"SDR", 10.0},
        {"DDR", 20.0},
        {"QDR", 40.0},
        {"FDR", 56.0},
        {"EDR", 100.0},
        {"HDR", 200.0},
        {"NDR", 400.0},
    }};
    for (const auto& [gen, gbps] : kGenerations) {
        if (gen == name) return gbps;
    }
    throw Error(ErrorCode::UnknownGeneration, "unknown InfiniBand generation '" + std::string(name) + "'");
}

}  // namespace nicsim
