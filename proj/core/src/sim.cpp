#include "nicsim/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <thread>

#include "nicsim/engine.hpp"
#include "nicsim/fabric.hpp"
#include "nicsim/link.hpp"

namespace nicsim {

std::string_view to_token(EventKind kind) {
    switch (kind) {
        case EventKind::TransferStart:     return "start";
        case EventKind::DescriptorFetched: return "descriptor";
        case EventKind::TlpInjected:       return "tlp";
        case EventKind::StageDone:         return "stage_done";
        case EventKind::Completion:        return "completion";
    }
    return "?";
}

std::string_view to_token(ModelKind model) {
    return model == ModelKind::Analytic ? "analytic" : "des";
}

ModelKind parse_model(std::string_view token) {
    if (token == "analytic") return ModelKind::Analytic;
    if (token == "des") return ModelKind::Des;
    throw Error(ErrorCode::ParseError, "unknown model '" + std::string(token) + "'");
}

bool EventQueue::Later::operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.channel != b.channel) return a.channel > b.channel;
    return a.seq > b.seq;
}

void EventQueue::push(Event e) {
    e.seq = next_seq_++;
    heap_.push(e);
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    if (e.time < last_) {
        throw Error(ErrorCode::InvariantViolation, "event time regressed");
    }
    last_ = e.time;
    return e;
}

namespace {

/// Unit emitted by a channel source: a TLP (DMA) or a network packet (RDMA).
struct SourceUnit {
    std::uint32_t payload;
    std::uint32_t wire;
    std::uint64_t run;  ///< Length of the contiguous region the unit belongs to.
};

/// Unit moving through the shared stages.
struct Item {
    int channel;
    std::uint32_t payload;
    std::uint32_t wire;
    std::uint64_t run;
};

enum class Metric : std::uint8_t { Payload, Wire };

struct Stage {
    StageServer server;
    Metric metric;
    bool memory;  ///< Rate follows memory_service_rate(run) instead of the nominal rate.
};

struct Channel {
    Bandwidth rate;
    bool wire_metered = false;
    std::vector<SourceUnit> units;
    std::size_t next = 0;
};

class Simulation {
public:
    Simulation(const ValidatedScenario& scenario, const TransferRequest& req, const SimOptions& options)
        : scenario_(scenario), cfg_(scenario.config()), req_(req), options_(options), rng_(options.seed) {
        result_.scenario = cfg_.name;
        result_.model = ModelKind::Des;
        result_.direction = req.direction;
        result_.channels = req.channels;
        result_.size = req.size;
        result_.channel_payload.assign(static_cast<std::size_t>(req.channels), ByteSize{});
        result_.channel_wire.assign(static_cast<std::size_t>(req.channels), ByteSize{});
        if (scenario.is_rdma()) {
            build_rdma();
        } else {
            build_dma();
        }
    }

    SimResult run() {
        queue_.push(Event{Nanoseconds{0.0}, EventKind::TransferStart, 0, req_.size});
        while (!queue_.empty()) {
            const Event e = queue_.pop();
            ++result_.events;
            trace(e);
            dispatch(e);
        }
        finish();
        return std::move(result_);
    }

private:
    void build_dma() {
        const auto& dma = scenario_.dma();
        const auto share = fabric_share(cfg_.fabric, req_.direction);
        const auto plan = channel_split(req_.size, req_.channels);
        const std::uint32_t mps = cfg_.link.max_payload_bytes;
        const std::uint32_t overhead = cfg_.link.per_tlp_overhead();
        const Bandwidth channel_rate{dma.per_channel_cap(req_.direction).gbps * share.factor};

        std::uint64_t offset = req_.offset.bytes;
        std::vector<std::vector<std::uint64_t>> descriptor_lengths;
        for (ByteSize part : plan.per_channel_sizes) {
            Channel ch;
            ch.rate = channel_rate;
            TransferRequest sub{req_.direction, part, 1, ByteSize{offset}};
            offset += part.bytes;
            std::vector<std::uint64_t> lengths;
            if (part.bytes > 0) {
                for (const auto& d : build_descriptors(sub, dma.descriptor_granularity).entries) {
                    lengths.push_back(d.length.bytes);
                    for (std::uint64_t done = 0; done < d.length.bytes; done += mps) {
                        const auto payload = static_cast<std::uint32_t>(std::min<std::uint64_t>(mps, d.length.bytes - done));
                        ch.units.push_back({payload, payload + overhead, part.bytes});
                    }
                }
            }
            descriptor_lengths.push_back(std::move(lengths));
            channels_.push_back(std::move(ch));
        }

        // The fetch unit walks the descriptor chains round-robin across channels.
        std::size_t deepest = 0;
        for (const auto& l : descriptor_lengths) deepest = std::max(deepest, l.size());
        for (std::size_t k = 0; k < deepest; ++k) {
            for (std::size_t c = 0; c < descriptor_lengths.size(); ++c) {
                if (k < descriptor_lengths[c].size()) {
                    fetch_order_.push_back({static_cast<int>(c), descriptor_lengths[c][k]});
                }
            }
        }
        descriptor_overhead_ = dma.descriptor_overhead;
        completion_overhead_ = dma.setup_overhead[cfg_.mode];
        if (cfg_.engine == EngineKind::QdmaQueue) completion_overhead_ += dma.queue_overhead;

        const int inputs = req_.channels;
        auto link = Stage{StageServer("link", cfg_.link.effective_cap, ArbitrationPolicy::RoundRobin, inputs,
                                      options_.interleave_quantum),
                          Metric::Wire, false};
        auto fabric = Stage{StageServer("fabric", share.cap, ArbitrationPolicy::Fcfs, inputs), Metric::Payload, false};
        auto memory = Stage{StageServer("endpoint", cfg_.endpoint.peak_bw, ArbitrationPolicy::Fcfs, inputs),
                            Metric::Payload, true};
        std::optional<Stage> aggregate;
        if (req_.channels > 1) {
            if (auto cap = dma.aggregate_cap(req_.direction)) {
                aggregate = Stage{StageServer("engine", *cap, ArbitrationPolicy::RoundRobin, inputs),
                                  Metric::Payload, false};
            }
        }
        if (req_.direction == Direction::HostToCard) {
            stages_.push_back(std::move(link));
            if (aggregate) stages_.push_back(std::move(*aggregate));
            stages_.push_back(std::move(fabric));
            stages_.push_back(std::move(memory));
        } else {
            stages_.push_back(std::move(memory));
            stages_.push_back(std::move(fabric));
            if (aggregate) stages_.push_back(std::move(*aggregate));
            stages_.push_back(std::move(link));
        }
    }

    void build_rdma() {
        const auto& rdma = scenario_.rdma();
        Channel ch;
        ch.rate = rdma.wire_rate();
        ch.wire_metered = true;
        // Packets stream into the NIC in MPS-sized pieces; the header rides on the first piece.
        const std::uint32_t mps = cfg_.link.max_payload_bytes;
        for (std::uint64_t done = 0; done < req_.size.bytes; done += rdma.mtu_bytes) {
            const auto payload = static_cast<std::uint32_t>(std::min<std::uint64_t>(rdma.mtu_bytes, req_.size.bytes - done));
            for (std::uint32_t off = 0; off < payload; off += mps) {
                const std::uint32_t part = std::min(mps, payload - off);
                const std::uint32_t header = off == 0 ? rdma.packet_overhead_bytes : 0;
                ch.units.push_back({part, part + header, req_.size.bytes});
            }
        }
        channels_.push_back(std::move(ch));

        verb_ = verb_of(cfg_.engine);
        work_request_delay_ = rdma.verb_setup(verb_);
        if (verb_ == RdmaVerb::Read) data_delay_ = rdma.round_trip;

        auto card = Stage{StageServer("endpoint", cfg_.endpoint.peak_bw, ArbitrationPolicy::Fcfs, 1), Metric::Payload, true};
        auto host = Stage{StageServer("host-memory", rdma.host_memory_bw, ArbitrationPolicy::Fcfs, 1), Metric::Payload, false};
        if (req_.direction == Direction::HostToCard) {
            stages_.push_back(std::move(card));
            stages_.push_back(std::move(host));
        } else {
            stages_.push_back(std::move(host));
            stages_.push_back(std::move(card));
        }
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case EventKind::TransferStart:     on_start(e); break;
            case EventKind::DescriptorFetched: on_descriptor(e); break;
            case EventKind::TlpInjected:       on_injected(e); break;
            case EventKind::StageDone:         on_stage_done(e); break;
            case EventKind::Completion:        on_completion(e); break;
        }
    }

    void on_start(const Event& e) {
        if (scenario_.is_rdma()) {
            queue_.push(Event{e.time + work_request_delay_, EventKind::DescriptorFetched, 0, req_.size});
        } else {
            schedule_fetch(e.time);
        }
    }

    void schedule_fetch(Nanoseconds now) {
        const auto& [channel, length] = fetch_order_[fetched_];
        queue_.push(Event{now + descriptor_overhead_, EventKind::DescriptorFetched, channel, ByteSize{length}});
    }

    void on_descriptor(const Event& e) {
        if (scenario_.is_rdma()) {
            start_sources(e.time + data_delay_);
            return;
        }
        ++fetched_;
        if (fetched_ < fetch_order_.size()) {
            schedule_fetch(e.time);
        } else {
            start_sources(e.time);
        }
    }

    void start_sources(Nanoseconds now) {
        for (std::size_t c = 0; c < channels_.size(); ++c) schedule_unit(static_cast<int>(c), now);
    }

    void schedule_unit(int c, Nanoseconds now) {
        auto& ch = channels_[static_cast<std::size_t>(c)];
        if (ch.next >= ch.units.size()) return;
        const auto& unit = ch.units[ch.next];
        const double bytes = ch.wire_metered ? unit.wire : unit.payload;
        Event e{now + transfer_time(bytes, ch.rate), EventKind::TlpInjected, c, ByteSize{unit.payload}};
        e.item = static_cast<std::uint32_t>(ch.next);
        queue_.push(e);
        ++ch.next;
    }

    void on_injected(const Event& e) {
        const auto c = static_cast<std::size_t>(e.channel);
        const auto& unit = channels_[c].units[e.item];
        result_.channel_wire[c] = result_.channel_wire[c] + ByteSize{unit.wire};
        arrive(0, push_item({e.channel, unit.payload, unit.wire, unit.run}), e.time);
        schedule_unit(e.channel, e.time);
    }

    std::uint32_t push_item(Item item) {
        items_.push_back(item);
        return static_cast<std::uint32_t>(items_.size() - 1);
    }

    void arrive(int stage, std::uint32_t item, Nanoseconds now) {
        auto& s = stages_[static_cast<std::size_t>(stage)];
        s.server.enqueue(items_[item].channel, item);
        if (!s.server.busy()) begin(stage, now);
    }

    void begin(int stage, Nanoseconds now) {
        auto& s = stages_[static_cast<std::size_t>(stage)];
        const auto [input, id] = s.server.pop_next();
        const Item& item = items_[id];
        const Bandwidth rate = s.memory ? memory_service_rate(cfg_.endpoint, ByteSize{item.run}) : s.server.rate();
        Nanoseconds service = transfer_time(s.metric == Metric::Wire ? item.wire : item.payload, rate);
        if (options_.jitter > 0.0) {
            std::uniform_real_distribution<double> u(-options_.jitter, options_.jitter);
            service *= 1.0 + u(rng_);
        }
        s.server.begin_service(now, service);
        Event e{now + service, EventKind::StageDone, input, ByteSize{item.payload}};
        e.stage = stage;
        e.item = id;
        queue_.push(e);
    }

    void on_stage_done(const Event& e) {
        auto& s = stages_[static_cast<std::size_t>(e.stage)];
        s.server.end_service();
        if (static_cast<std::size_t>(e.stage) + 1 < stages_.size()) {
            arrive(e.stage + 1, e.item, e.time);
        } else {
            deliver(e.item, e.time);
        }
        if (s.server.has_pending() && !s.server.busy()) begin(e.stage, e.time);
    }

    void deliver(std::uint32_t id, Nanoseconds now) {
        const Item& item = items_[id];
        auto& done = result_.channel_payload[static_cast<std::size_t>(item.channel)];
        done = done + ByteSize{item.payload};
        delivered_ += item.payload;
        if (delivered_ == req_.size.bytes) {
            const Nanoseconds tail = cfg_.endpoint.access_latency + completion_overhead_;
            queue_.push(Event{now + tail, EventKind::Completion, 0, req_.size});
        }
    }

    void on_completion(const Event& e) {
        result_.total_time = e.time;
        completed_ = true;
    }

    void trace(const Event& e) {
        if (options_.trace == nullptr) return;
        char line[96];
        std::snprintf(line, sizeof line, "%.3f\t%s\t%d\t%llu\n", e.time.count(),
                      std::string(to_token(e.kind)).c_str(), e.channel,
                      static_cast<unsigned long long>(e.payload.bytes));
        *options_.trace << line;
    }

    void finish() {
        if (!completed_) {
            throw Error(ErrorCode::InvariantViolation, "simulation drained without a completion");
        }
        const auto plan = channel_split(req_.size, req_.channels);
        for (std::size_t c = 0; c < plan.per_channel_sizes.size(); ++c) {
            if (result_.channel_payload[c] != plan.per_channel_sizes[c]) {
                throw Error(ErrorCode::InvariantViolation, "channel payload not conserved");
            }
        }
        for (const auto& s : stages_) {
            if (s.server.busy_time() > result_.total_time * (1.0 + 1e-12)) {
                throw Error(ErrorCode::InvariantViolation, "stage '" + s.server.name() + "' over-utilized");
            }
            result_.stages.push_back({s.server.name(), s.server.busy_time()});
        }
        result_.bandwidth = achieved_rate(req_.size, result_.total_time);
        result_.fixed_overhead = engine_overheads(scenario_, req_) + cfg_.endpoint.access_latency;
    }

    const ValidatedScenario& scenario_;
    const ScenarioConfig& cfg_;
    TransferRequest req_;
    SimOptions options_;
    std::mt19937_64 rng_;

    EventQueue queue_;
    std::vector<Channel> channels_;
    std::vector<Stage> stages_;
    std::vector<Item> items_;
    std::vector<std::pair<int, std::uint64_t>> fetch_order_;
    std::size_t fetched_ = 0;

    Nanoseconds descriptor_overhead_{0.0};
    Nanoseconds completion_overhead_{0.0};
    RdmaVerb verb_ = RdmaVerb::Write;
    Nanoseconds work_request_delay_{0.0};
    Nanoseconds data_delay_{0.0};

    std::uint64_t delivered_ = 0;
    bool completed_ = false;
    SimResult result_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check_plan(const SweepPlan& plan) {
    if (plan.directions.empty() || plan.channel_counts.empty() || plan.sizes.empty()) {
        throw Error(ErrorCode::EmptyPlan, "sweep needs at least one direction, channel count and size");
    }
    for (std::size_t i = 1; i < plan.sizes.size(); ++i) {
        if (!(plan.sizes[i - 1] < plan.sizes[i])) {
            throw Error(ErrorCode::InvalidRequest, "sweep sizes must be strictly ascending");
        }
    }
}

SimResult failed_point(const ValidatedScenario& scenario, const TransferRequest& req, ModelKind model,
                       const Error& err) {
    SimResult r;
    r.scenario = scenario.name();
    r.model = model;
    r.direction = req.direction;
    r.channels = req.channels;
    r.size = req.size;
    r.failure = PointFailure{err.code(), err.what()};
    return r;
}

}  // namespace

SimResult run_transfer(const ValidatedScenario& scenario, const TransferRequest& req, const SimOptions& options) {
    check_request(scenario, req);
    capacity_check(scenario.config().endpoint, req);
    if (options.jitter < 0.0 || options.jitter >= 1.0) {
        throw Error(ErrorCode::InvalidRequest, "jitter must be in [0, 1)");
    }
    return Simulation(scenario, req, options).run();
}

SimResult analytic_result(const ValidatedScenario& scenario, const TransferRequest& req) {
    const auto timing = analytic_transfer_time(scenario, req);
    SimResult r;
    r.scenario = scenario.name();
    r.model = ModelKind::Analytic;
    r.direction = req.direction;
    r.channels = req.channels;
    r.size = req.size;
    r.total_time = timing.total;
    r.bandwidth = timing.bandwidth;
    r.fixed_overhead = timing.fixed_overhead;
    r.stages.push_back({"bottleneck", timing.total - timing.fixed_overhead});
    r.channel_payload = channel_split(req.size, req.channels).per_channel_sizes;
    return r;
}

SweepPlan standard_plan(const ValidatedScenario& scenario) {
    SweepPlan plan;
    plan.directions = {Direction::HostToCard, Direction::CardToHost};
    for (int c = 1; c <= scenario.max_channels(); ++c) plan.channel_counts.push_back(c);
    plan.sizes = standard_sizes(scenario.config());
    return plan;
}

std::vector<SimResult> run_model_sweep(const ValidatedScenario& scenario, const SweepPlan& plan, ModelKind model,
                                       const SimOptions& options) {
    check_plan(plan);
    std::vector<TransferRequest> points;
    for (Direction d : plan.directions) {
        for (int c : plan.channel_counts) {
            for (ByteSize s : plan.sizes) points.push_back(TransferRequest{d, s, c, ByteSize{0}});
        }
    }

    unsigned workers = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, points.size()));
    std::vector<SimResult> results(points.size());
    auto run_point = [&](std::size_t i) {
        try {
            if (model == ModelKind::Analytic) {
                results[i] = analytic_result(scenario, points[i]);
            } else {
                SimOptions local = options;
                local.seed = mix_seed(options.seed, i);
                if (workers > 1) local.trace = nullptr;
                results[i] = run_transfer(scenario, points[i], local);
            }
        } catch (const Error& err) {
            results[i] = failed_point(scenario, points[i], model, err);
        }
    };

    if (workers <= 1 || model == ModelKind::Analytic) {
        for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < points.size(); i = next++) run_point(i);
        });
    }
    pool.clear();
    return results;
}

std::vector<SimResult> run_sweep(const ValidatedScenario& scenario, const SweepPlan& plan, const SimOptions& options) {
    return run_model_sweep(scenario, plan, ModelKind::Des, options);
}

}  // namespace nicsim
