#include "nicsim/fabric.hpp"

#include <algorithm>

#include "nicsim/error.hpp"

namespace nicsim {

void capacity_check(const MemoryEndpointConfig& endpoint, const TransferRequest& req) {
    const std::uint64_t end = req.offset.bytes + req.size.bytes;
    if (end > endpoint.capacity.bytes) {
        throw Error(ErrorCode::CapacityExceeded,
                    "offset + size overflows " + std::string(to_token(endpoint.kind)) + " capacity by " +
                        std::to_string(end - endpoint.capacity.bytes) + " bytes");
    }
}

Bandwidth memory_service_rate(const MemoryEndpointConfig& endpoint, ByteSize chunk) {
    if (chunk.bytes >= endpoint.burst_bytes) return endpoint.peak_bw;
    const double fill = static_cast<double>(chunk.bytes) / endpoint.burst_bytes;
    return Bandwidth{endpoint.peak_bw.gbps * fill};
}

FabricShare fabric_share(const AxiFabricConfig& fabric, Direction direction) {
    return {fabric.cap, fabric.contention_factor(direction)};
}

StageServer::StageServer(std::string name, Bandwidth rate, ArbitrationPolicy policy, int inputs,
                         std::uint32_t quantum)
    : name_(std::move(name)),
      rate_(rate),
      policy_(policy),
      queues_(static_cast<std::size_t>(inputs)),
      quantum_(std::max<std::uint32_t>(quantum, 1)) {
    if (!(rate.gbps > 0.0)) {
        throw Error(ErrorCode::NonPositiveRate, "stage '" + name_ + "' needs a positive rate");
    }
    if (inputs < 1) {
        throw Error(ErrorCode::InvalidConfig, "stage '" + name_ + "' needs at least one input");
    }
}

void StageServer::enqueue(int input, std::uint32_t item) {
    queues_.at(static_cast<std::size_t>(input)).push_back({item, arrivals_++});
    ++pending_;
}

std::pair<int, std::uint32_t> StageServer::pop_next() {
    if (pending_ == 0) {
        throw Error(ErrorCode::InvariantViolation, "stage '" + name_ + "' popped while empty");
    }
    const int n = static_cast<int>(queues_.size());
    int chosen = -1;
    if (policy_ == ArbitrationPolicy::RoundRobin) {
        if (last_served_ >= 0 && granted_ < quantum_ &&
            !queues_[static_cast<std::size_t>(last_served_)].empty()) {
            chosen = last_served_;
        }
        for (int k = 1; chosen < 0 && k <= n; ++k) {
            const int candidate = (last_served_ + k) % n;
            if (!queues_[static_cast<std::size_t>(candidate)].empty()) {
                chosen = candidate;
                break;
            }
        }
    } else {
        std::uint64_t oldest = UINT64_MAX;
        for (int i = 0; i < n; ++i) {
            const auto& q = queues_[static_cast<std::size_t>(i)];
            if (!q.empty() && q.front().arrival < oldest) {
                oldest = q.front().arrival;
                chosen = i;
            }
        }
    }
    auto& q = queues_[static_cast<std::size_t>(chosen)];
    const std::uint32_t item = q.front().item;
    q.pop_front();
    --pending_;
    granted_ = chosen == last_served_ ? granted_ + 1 : 1;
    last_served_ = chosen;
    return {chosen, item};
}

void StageServer::begin_service(Nanoseconds now, Nanoseconds service) {
    const Nanoseconds until = now + service;
    if (busy_ || until < busy_until_) {
        throw Error(ErrorCode::InvariantViolation, "stage '" + name_ + "' scheduled into the past");
    }
    busy_ = true;
    busy_until_ = until;
    busy_time_ += service;
}

}  // namespace nicsim
