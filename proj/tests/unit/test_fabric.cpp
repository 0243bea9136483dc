#include <gtest/gtest.h>

#include "generators.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/error.hpp"
#include "nicsim/fabric.hpp"

using namespace nicsim;

namespace {

MemoryEndpointConfig bram() { return builtin_scenario("bram-xdma").endpoint; }
MemoryEndpointConfig ddr() { return builtin_scenario("ddr-xdma").endpoint; }

}  // namespace

TEST(CapacityCheck, Boundaries) {
    EXPECT_NO_THROW(capacity_check(bram(), {Direction::HostToCard, ByteSize{MiB}, 1, ByteSize{0}}));
    try {
        capacity_check(bram(), {Direction::HostToCard, ByteSize{MiB + 1}, 1, ByteSize{0}});
        FAIL() << "expected CapacityExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CapacityExceeded);
        EXPECT_NE(std::string(e.what()).find("1 byte"), std::string::npos) << e.what();
    }
    EXPECT_NO_THROW(capacity_check(ddr(), {Direction::HostToCard, ByteSize{256 * MiB}, 1, ByteSize{0}}));
    EXPECT_THROW(capacity_check(bram(), {Direction::HostToCard, ByteSize{4096}, 1, ByteSize{MiB - 4095}}), Error);
}

TEST(CapacityCheck, IndependentOfDirection) {
    prop::Gen gen(11);
    for (int i = 0; i < 2000; ++i) {
        const ByteSize size{gen.uniform(1, 2 * MiB)};
        const ByteSize offset{gen.uniform(0, MiB)};
        bool h2c_ok = true;
        bool c2h_ok = true;
        try {
            capacity_check(bram(), {Direction::HostToCard, size, 1, offset});
        } catch (const Error&) {
            h2c_ok = false;
        }
        try {
            capacity_check(bram(), {Direction::CardToHost, size, 1, offset});
        } catch (const Error&) {
            c2h_ok = false;
        }
        ASSERT_EQ(h2c_ok, c2h_ok);
        ASSERT_EQ(h2c_ok, size.bytes + offset.bytes <= MiB);
    }
}

TEST(MemoryServiceRate, Examples) {
    EXPECT_EQ(memory_service_rate(ddr(), ByteSize{512}).gbps, 19.2);
    EXPECT_EQ(memory_service_rate(ddr(), ByteSize{1 << 20}).gbps, 19.2);
    EXPECT_DOUBLE_EQ(memory_service_rate(ddr(), ByteSize{256}).gbps, 9.6);
    EXPECT_EQ(memory_service_rate(bram(), ByteSize{64}).gbps, 16.0);
    EXPECT_EQ(memory_service_rate(bram(), ByteSize{4096}).gbps, 16.0);
}

TEST(MemoryServiceRate, NeverAbovePeak) {
    prop::Gen gen(13);
    for (int i = 0; i < 2000; ++i) {
        const auto ep = gen.fpga_scenario().endpoint;
        const ByteSize chunk{gen.uniform(1, 4096)};
        const double r = memory_service_rate(ep, chunk).gbps;
        ASSERT_LE(r, ep.peak_bw.gbps);
        ASSERT_GT(r, 0.0);
        if (chunk.bytes >= ep.burst_bytes) ASSERT_EQ(r, ep.peak_bw.gbps);
    }
}

TEST(FabricShare, NoContender) {
    const auto share = fabric_share(builtin_scenario("ddr-xdma").fabric, Direction::CardToHost);
    EXPECT_EQ(share.cap.gbps, 16.0);
    EXPECT_EQ(share.factor, 1.0);
}

TEST(FabricShare, MicroblazeFactorsMatchPeakRatios) {
    const auto fabric = builtin_scenario("ddr-microblaze").fabric;
    // Ratios of the measured single-channel peaks with and without the soft core.
    EXPECT_NEAR(fabric_share(fabric, Direction::CardToHost).factor, 9.4 / 12.0, 0.01);
    EXPECT_NEAR(fabric_share(fabric, Direction::HostToCard).factor, 9.5 / 10.8, 0.01);
    EXPECT_EQ(fabric_share(fabric, Direction::HostToCard).cap.gbps, 16.0);
}

TEST(StageServer, FcfsServesInArrivalOrder) {
    StageServer s("x", Bandwidth{1.0}, ArbitrationPolicy::Fcfs, 3);
    s.enqueue(2, 10);
    s.enqueue(0, 11);
    s.enqueue(2, 12);
    s.enqueue(1, 13);
    std::vector<std::uint32_t> order;
    while (s.has_pending()) order.push_back(s.pop_next().second);
    EXPECT_EQ(order, (std::vector<std::uint32_t>{10, 11, 12, 13}));
}

TEST(StageServer, RoundRobinRotatesInputs) {
    StageServer s("x", Bandwidth{1.0}, ArbitrationPolicy::RoundRobin, 3);
    for (std::uint32_t i = 0; i < 3; ++i) s.enqueue(0, i);
    for (std::uint32_t i = 0; i < 3; ++i) s.enqueue(1, 10 + i);
    s.enqueue(2, 20);
    std::vector<int> inputs;
    while (s.has_pending()) inputs.push_back(s.pop_next().first);
    EXPECT_EQ(inputs, (std::vector<int>{0, 1, 2, 0, 1, 0, 1}));
}

TEST(StageServer, RoundRobinQuantum) {
    StageServer s("x", Bandwidth{1.0}, ArbitrationPolicy::RoundRobin, 2, 2);
    for (std::uint32_t i = 0; i < 4; ++i) s.enqueue(0, i);
    for (std::uint32_t i = 0; i < 4; ++i) s.enqueue(1, 10 + i);
    std::vector<int> inputs;
    while (s.has_pending()) inputs.push_back(s.pop_next().first);
    EXPECT_EQ(inputs, (std::vector<int>{0, 0, 1, 1, 0, 0, 1, 1}));
}

TEST(StageServer, BusyAccountingAndGuards) {
    StageServer s("x", Bandwidth{2.0}, ArbitrationPolicy::Fcfs, 1);
    s.begin_service(Nanoseconds{10.0}, Nanoseconds{5.0});
    EXPECT_TRUE(s.busy());
    EXPECT_THROW(s.begin_service(Nanoseconds{12.0}, Nanoseconds{1.0}), Error);
    s.end_service();
    EXPECT_EQ(s.busy_until().count(), 15.0);
    EXPECT_THROW(s.begin_service(Nanoseconds{14.0}, Nanoseconds{0.5}), Error);
    s.begin_service(Nanoseconds{20.0}, Nanoseconds{3.0});
    s.end_service();
    EXPECT_EQ(s.busy_time().count(), 8.0);
    EXPECT_EQ(s.busy_until().count(), 23.0);
}

TEST(Contention, NeverIncreasesBandwidth) {
    prop::Gen gen(21);
    for (int i = 0; i < 400; ++i) {
        auto cfg = gen.fpga_scenario();
        cfg.fabric.contending_master = false;
        const auto base = validate_scenario(cfg);
        cfg.fabric.contending_master = true;
        cfg.fabric.contention_factor_h2c = gen.real(0.05, 1.0);
        cfg.fabric.contention_factor_c2h = gen.real(0.05, 1.0);
        const auto contended = validate_scenario(cfg);
        const TransferRequest req{gen.coin() ? Direction::HostToCard : Direction::CardToHost,
                                  ByteSize{gen.size(base.config().endpoint.capacity.bytes)},
                                  gen.uniform_int(1, base.max_channels())};
        ASSERT_LE(analytic_transfer_time(contended, req).bandwidth.gbps,
                  analytic_transfer_time(base, req).bandwidth.gbps);
    }
}
