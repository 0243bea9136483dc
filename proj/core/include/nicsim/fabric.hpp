#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "nicsim/scenario.hpp"
#include "nicsim/units.hpp"

namespace nicsim {

/// Throws CapacityExceeded (with the overflow in bytes) unless offset + size
/// fits in the endpoint. Direction does not matter.
void capacity_check(const MemoryEndpointConfig& endpoint, const TransferRequest& req);

/// Service rate for a contiguous access of `chunk` bytes: accesses shorter
/// than one burst are penalized linearly, peak otherwise.
Bandwidth memory_service_rate(const MemoryEndpointConfig& endpoint, ByteSize chunk);

struct FabricShare {
    Bandwidth cap;  ///< Aggregate ceiling.
    double factor;  ///< Multiplier on per-channel engine caps.
};

FabricShare fabric_share(const AxiFabricConfig& fabric, Direction direction);

enum class ArbitrationPolicy : std::uint8_t { Fcfs, RoundRobin };

/// Rate-limited server with one input queue per requester. Owned by a
/// single simulation instance.
class StageServer {
public:
    /// `quantum` is how many consecutive items RoundRobin grants one input.
    StageServer(std::string name, Bandwidth rate, ArbitrationPolicy policy, int inputs,
                std::uint32_t quantum = 1);

    const std::string& name() const { return name_; }
    Bandwidth rate() const { return rate_; }
    ArbitrationPolicy policy() const { return policy_; }

    void enqueue(int input, std::uint32_t item);
    bool has_pending() const { return pending_ > 0; }

    /// Removes the next item per policy. Returns (input, item).
    std::pair<int, std::uint32_t> pop_next();

    bool busy() const { return busy_; }
    Nanoseconds busy_until() const { return busy_until_; }
    Nanoseconds busy_time() const { return busy_time_; }

    /// Starts serving at `now` for `service`. busy_until never moves backwards.
    void begin_service(Nanoseconds now, Nanoseconds service);
    void end_service() { busy_ = false; }

private:
    struct Slot {
        std::uint32_t item;
        std::uint64_t arrival;
    };

    std::string name_;
    Bandwidth rate_;
    ArbitrationPolicy policy_;
    std::vector<std::deque<Slot>> queues_;
    std::size_t pending_ = 0;
    std::uint64_t arrivals_ = 0;
    std::uint32_t quantum_;
    std::uint32_t granted_ = 0;
    int last_served_ = -1;
    bool busy_ = false;
    Nanoseconds busy_until_{0.0};
    Nanoseconds busy_time_{0.0};
};

}  // namespace nicsim
