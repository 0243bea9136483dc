#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "nicsim/error.hpp"
#include "nicsim/scenario.hpp"
#include "nicsim/units.hpp"

namespace nicsim {

enum class EventKind : std::uint8_t { TransferStart, DescriptorFetched, TlpInjected, StageDone, Completion };

std::string_view to_token(EventKind kind);

struct Event {
    Nanoseconds time{0.0};
    EventKind kind = EventKind::TransferStart;
    int channel = 0;
    ByteSize payload;

    // Routing details for the simulator; not part of the ordering key.
    int stage = -1;
    std::uint32_t item = 0;
    std::uint64_t seq = 0;
};

/// Min-queue ordered by (time, kind, channel, insertion order).
class EventQueue {
public:
    void push(Event e);

    /// Throws InvariantViolation if the popped time precedes the previous pop.
    Event pop();

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    Nanoseconds last_popped() const { return last_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const;
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    Nanoseconds last_{0.0};
};

enum class ModelKind : std::uint8_t { Analytic, Des };

std::string_view to_token(ModelKind model);
ModelKind parse_model(std::string_view token);

struct SimOptions {
    std::uint64_t seed = 1;
    /// Uniform relative jitter on stage service times, in [0, 1). Off by default.
    double jitter = 0.0;
    /// Consecutive TLPs the link grants one channel before rotating.
    std::uint32_t interleave_quantum = 1;
    /// Optional tab-separated event dump (time_ns, kind, channel, payload_bytes).
    /// Sweeps honour it only when running on a single thread.
    std::ostream* trace = nullptr;
    /// Worker threads for sweeps; 0 picks hardware concurrency.
    unsigned threads = 0;
};

struct StageUsage {
    std::string name;
    Nanoseconds busy{0.0};

    bool operator==(const StageUsage&) const = default;
};

struct PointFailure {
    ErrorCode code;
    std::string message;

    bool operator==(const PointFailure&) const = default;
};

/// Outcome of one (scenario, direction, channels, size) point.
struct SimResult {
    std::string scenario;
    ModelKind model = ModelKind::Des;
    Direction direction = Direction::HostToCard;
    int channels = 1;
    ByteSize size;

    Nanoseconds total_time{0.0};
    Bandwidth bandwidth;
    Nanoseconds fixed_overhead{0.0};
    std::vector<StageUsage> stages;
    std::vector<ByteSize> channel_payload;
    std::vector<ByteSize> channel_wire;
    std::uint64_t events = 0;

    std::optional<PointFailure> failure;

    bool ok() const { return !failure.has_value(); }
    bool operator==(const SimResult&) const = default;
};

/// Replays one transfer as events over rate-limited stage servers.
/// Throws CapacityExceeded / InvalidRequest for bad requests.
SimResult run_transfer(const ValidatedScenario& scenario, const TransferRequest& req,
                       const SimOptions& options = {});

struct SweepPlan {
    std::vector<Direction> directions;
    std::vector<int> channel_counts;
    std::vector<ByteSize> sizes;  ///< Strictly ascending.
};

/// Standard grid for a scenario: both directions, every supported channel
/// count, standard_sizes().
SweepPlan standard_plan(const ValidatedScenario& scenario);

/// Runs every (direction, channels, size) point in that nesting order.
/// Failed points are kept and flagged; the sweep continues. Throws EmptyPlan
/// if any axis is empty.
std::vector<SimResult> run_sweep(const ValidatedScenario& scenario, const SweepPlan& plan,
                                 const SimOptions& options = {});

/// Analytic counterpart of run_transfer, packaged as a SimResult.
SimResult analytic_result(const ValidatedScenario& scenario, const TransferRequest& req);

/// Runs a sweep with either model. Points execute in parallel; ordering is
/// deterministic.
std::vector<SimResult> run_model_sweep(const ValidatedScenario& scenario, const SweepPlan& plan,
                                       ModelKind model, const SimOptions& options = {});

}  // namespace nicsim
