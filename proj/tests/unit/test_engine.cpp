#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "generators.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/error.hpp"
#include "nicsim/fabric.hpp"
#include "nicsim/link.hpp"

using namespace nicsim;
using namespace std::chrono_literals;

namespace {

ValidatedScenario preset(std::string_view name) { return validate_scenario(builtin_scenario(name)); }

TransferRequest req(Direction d, std::uint64_t size, int channels = 1) {
    return TransferRequest{d, ByteSize{size}, channels, ByteSize{0}};
}

constexpr auto h2c = Direction::HostToCard;
constexpr auto c2h = Direction::CardToHost;

}  // namespace

// --- descriptors and channel plans ------------------------------------------

TEST(BuildDescriptors, Examples) {
    EXPECT_EQ(build_descriptors(req(h2c, MiB), ByteSize{4096}).entries.size(), 256u);
    EXPECT_EQ(build_descriptors(req(h2c, 4096), ByteSize{4096}).entries.size(), 1u);
    const auto list = build_descriptors(req(h2c, 10000), ByteSize{4096});
    ASSERT_EQ(list.entries.size(), 3u);
    EXPECT_EQ(list.entries[0].length.bytes, 4096u);
    EXPECT_EQ(list.entries[1].length.bytes, 4096u);
    EXPECT_EQ(list.entries[2].length.bytes, 1808u);
}

TEST(BuildDescriptors, DirectionPicksSourceSide) {
    const TransferRequest c2h_req{c2h, ByteSize{8192}, 1, ByteSize{1 << 20}};
    const auto list = build_descriptors(c2h_req, ByteSize{4096}, ByteSize{0x10000});
    EXPECT_EQ(list.entries[1].source_offset.bytes, (1u << 20) + 4096);
    EXPECT_EQ(list.entries[1].dest_offset.bytes, 0x10000u + 4096);
    const TransferRequest h2c_req{h2c, ByteSize{8192}, 1, ByteSize{1 << 20}};
    const auto back = build_descriptors(h2c_req, ByteSize{4096}, ByteSize{0x10000});
    EXPECT_EQ(back.entries[1].source_offset.bytes, 0x10000u + 4096);
    EXPECT_EQ(back.entries[1].dest_offset.bytes, (1u << 20) + 4096);
}

TEST(BuildDescriptors, ConservationAndLayout) {
    prop::Gen gen(31);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t size = gen.size(64 * MiB);
        const ByteSize g{gen.uniform(1, 3) * 4096};
        const auto list = build_descriptors(req(gen.coin() ? h2c : c2h, size), g);
        ASSERT_EQ(list.total_bytes().bytes, size);
        ASSERT_EQ(list.entries.size(), ceil_div(size, g.bytes));
        for (std::size_t k = 0; k + 1 < list.entries.size(); ++k) {
            ASSERT_EQ(list.entries[k].length, g);
            // contiguous and non-overlapping on both sides
            ASSERT_EQ(list.entries[k].source_offset.bytes + g.bytes, list.entries[k + 1].source_offset.bytes);
            ASSERT_EQ(list.entries[k].dest_offset.bytes + g.bytes, list.entries[k + 1].dest_offset.bytes);
        }
    }
}

TEST(ChannelSplit, Examples) {
    const auto four = channel_split(ByteSize{MiB}, 4);
    ASSERT_EQ(four.per_channel_sizes.size(), 4u);
    for (auto s : four.per_channel_sizes) EXPECT_EQ(s.bytes, 262144u);

    const auto ten = channel_split(ByteSize{10}, 4);
    std::vector<std::uint64_t> got;
    for (auto s : ten.per_channel_sizes) got.push_back(s.bytes);
    EXPECT_EQ(got, (std::vector<std::uint64_t>{3, 3, 2, 2}));

    const auto one = channel_split(ByteSize{64}, 1);
    ASSERT_EQ(one.per_channel_sizes.size(), 1u);
    EXPECT_EQ(one.per_channel_sizes[0].bytes, 64u);
}

TEST(ChannelSplit, SumsAndBalance) {
    prop::Gen gen(37);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t size = gen.size(GiB);
        const int ch = gen.uniform_int(1, 4);
        const auto plan = channel_split(ByteSize{size}, ch);
        std::uint64_t total = 0;
        std::uint64_t lo = UINT64_MAX, hi = 0;
        for (auto s : plan.per_channel_sizes) {
            total += s.bytes;
            lo = std::min(lo, s.bytes);
            hi = std::max(hi, s.bytes);
        }
        ASSERT_EQ(total, size);
        ASSERT_LE(hi - lo, 1u);
        ASSERT_EQ(plan.largest().bytes, hi);
    }
    EXPECT_THROW(channel_split(ByteSize{64}, 0), Error);
    EXPECT_THROW(channel_split(ByteSize{64}, 5), Error);
}

// --- overheads ---------------------------------------------------------------

TEST(EngineOverheads, MsixWithOneDescriptor) {
    auto cfg = builtin_scenario("ddr-xdma");
    auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
    dma.setup_overhead = SetupOverheads{4us, 5us};
    dma.descriptor_overhead = 10ns;
    const auto s = validate_scenario(cfg);
    EXPECT_NEAR(engine_overheads(s, req(h2c, 4096)).count(), 5010.0, 1e-9);
}

TEST(EngineOverheads, PolledWithZeroSetupIsDescriptorTermOnly) {
    auto cfg = builtin_scenario("ddr-xdma");
    cfg.mode = OperatingMode::Polled;
    auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
    dma.setup_overhead.polled = 0ns;
    dma.descriptor_overhead = 10ns;
    const auto s = validate_scenario(cfg);
    EXPECT_NEAR(engine_overheads(s, req(h2c, MiB)).count(), 256 * 10.0, 1e-9);
    EXPECT_NEAR(engine_overheads(s, req(h2c, MiB, 3)).count(),
                10.0 * static_cast<double>(descriptor_count(channel_split(ByteSize{MiB}, 3), ByteSize{4096})), 1e-9);
}

TEST(EngineOverheads, QdmaAddsQueueOverhead) {
    auto cfg = builtin_scenario("ddr-xdma");
    const auto xdma = engine_overheads(validate_scenario(cfg), req(c2h, 8192));
    cfg.engine = EngineKind::QdmaQueue;
    const auto qdma = engine_overheads(validate_scenario(cfg), req(c2h, 8192));
    EXPECT_NEAR((qdma - xdma).count(), std::get<DmaEngineConfig>(cfg.engine_params).queue_overhead.count(), 1e-9);
    EXPECT_GT(qdma, xdma);
}

TEST(EngineOverheads, ModesMapToDistinctParameters) {
    auto cfg = builtin_scenario("ddr-xdma");
    cfg.mode = OperatingMode::Polled;
    const auto polled = engine_overheads(validate_scenario(cfg), req(h2c, 4096));
    cfg.mode = OperatingMode::MsixInterrupt;
    const auto msix = engine_overheads(validate_scenario(cfg), req(h2c, 4096));
    const auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
    EXPECT_NEAR((msix - polled).count(), (dma.setup_overhead.msix - dma.setup_overhead.polled).count(), 1e-9);
}

// --- steady rate --------------------------------------------------------------

TEST(SteadyRate, SingleChannelC2hIsEngineBound) {
    auto cfg = builtin_scenario("ddr-xdma");
    std::get<DmaEngineConfig>(cfg.engine_params).per_channel_cap_c2h = Bandwidth{12.0};
    EXPECT_DOUBLE_EQ(steady_rate(validate_scenario(cfg), req(c2h, MiB)).gbps, 12.0);
}

TEST(SteadyRate, UncalibratedFourChannelCeilingIsTheLink) {
    auto cfg = uncalibrated_ddr_xdma();
    cfg.link.max_payload_bytes = 4096;
    const auto r = steady_rate(validate_scenario(cfg), req(c2h, 4 * MiB, 4));
    EXPECT_NEAR(r.gbps, 15.8 * 4096.0 / 4120.0, 1e-9);
    EXPECT_NEAR(r.gbps, 15.7, 0.02);
    // With 256-byte TLPs the same ceiling is 15.8 x 256/280.
    const auto r256 = steady_rate(validate_scenario(uncalibrated_ddr_xdma()), req(c2h, 4 * MiB, 4));
    EXPECT_NEAR(r256.gbps, 15.8 * 256.0 / 280.0, 1e-9);
}

TEST(SteadyRate, CalibratedFourChannelC2hInMeasuredBand) {
    const auto s = preset("ddr-xdma");
    const double peak = analytic_transfer_time(s, req(c2h, 4 * MiB, 4)).bandwidth.gbps;
    EXPECT_GE(peak, 13.0);
    EXPECT_LE(peak, 14.0);
}

TEST(SteadyRate, MicroblazeC2hScalesEngineCap) {
    const auto ddr = preset("ddr-xdma");
    const auto mb = preset("ddr-microblaze");
    const double factor = mb.config().fabric.contention_factor_c2h;
    EXPECT_DOUBLE_EQ(steady_rate(mb, req(c2h, MiB)).gbps, steady_rate(ddr, req(c2h, MiB)).gbps * factor);
    const double peak = analytic_transfer_time(mb, req(c2h, 4 * MiB)).bandwidth.gbps;
    EXPECT_NEAR(peak, 9.4, 9.4 * 0.05);
}

TEST(SteadyRate, BottleneckNeverAboveCeilings) {
    prop::Gen gen(41);
    for (int i = 0; i < 2000; ++i) {
        const auto s = validate_scenario(gen.fpga_scenario());
        const auto& cfg = s.config();
        const TransferRequest r = req(gen.coin() ? h2c : c2h, gen.size(cfg.endpoint.capacity.bytes),
                                      gen.uniform_int(1, s.max_channels()));
        const double rate = steady_rate(s, r).gbps;
        const std::uint64_t g = std::get<DmaEngineConfig>(cfg.engine_params).descriptor_granularity.bytes;
        std::uint64_t wire = 0;
        for (ByteSize share : channel_split(r.size, r.channels).per_channel_sizes)
            for (std::uint64_t done = 0; done < share.bytes; done += g)
                wire += packetize(ByteSize{std::min(g, share.bytes - done)}, cfg.link).wire_bytes.bytes;
        const double link_bound = cfg.link.effective_cap.gbps * static_cast<double>(r.size.bytes) / static_cast<double>(wire);
        ASSERT_LE(rate, link_bound * (1 + 1e-12));
        ASSERT_LE(rate, cfg.fabric.cap.gbps);
        ASSERT_LE(rate, cfg.endpoint.peak_bw.gbps);
        ASSERT_LE(rate, cfg.link.effective_cap.gbps);
    }
}

// --- analytic transfer time ----------------------------------------------------

TEST(AnalyticTransferTime, KneeExample) {
    auto cfg = builtin_scenario("ddr-xdma");
    auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
    dma.setup_overhead.msix = 10us;
    dma.descriptor_overhead = 0ns;
    dma.per_channel_cap_c2h = Bandwidth{12.0};
    cfg.endpoint.access_latency = 0ns;
    const auto t = analytic_transfer_time(validate_scenario(cfg), req(c2h, MiB));
    EXPECT_DOUBLE_EQ(t.steady.gbps, 12.0);
    EXPECT_NEAR(t.total.count(), 10000.0 + 1048576.0 / 12.0, 1e-6);
    EXPECT_NEAR(Microseconds(t.total).count(), 97.4, 0.05);
    EXPECT_NEAR(t.bandwidth.gbps, 10.77, 0.005);
}

TEST(AnalyticTransferTime, SmallTransfersAreOverheadDominated) {
    const auto s = preset("ddr-xdma");
    const auto t = analytic_transfer_time(s, req(h2c, 64));
    EXPECT_NEAR(t.bandwidth.gbps, 64.0 / t.fixed_overhead.count(), 0.01 * 64.0 / t.fixed_overhead.count());
    EXPECT_LT(t.bandwidth.gbps, 0.05);
}

TEST(AnalyticTransferTime, CalibratedBramAtOneMebibyte) {
    const auto s = preset("bram-xdma");
    EXPECT_NEAR(analytic_transfer_time(s, req(c2h, MiB)).bandwidth.gbps, 7.77, 7.77 * 0.05);
    EXPECT_NEAR(analytic_transfer_time(s, req(h2c, MiB)).bandwidth.gbps, 7.54, 7.54 * 0.05);
}

TEST(AnalyticTransferTime, RejectsBadRequests) {
    const auto bram = preset("bram-xdma");
    try {
        analytic_transfer_time(bram, req(h2c, MiB + 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CapacityExceeded);
    }
    EXPECT_THROW(analytic_transfer_time(bram, req(h2c, 0)), Error);
    EXPECT_THROW(analytic_transfer_time(bram, req(h2c, 64, 5)), Error);
}

TEST(AnalyticTransferTime, BandwidthIncreasesAcrossPowerOfTwoSizes) {
    prop::Gen gen(43);
    for (int i = 0; i < 300; ++i) {
        auto cfg = gen.scenario();
        if (auto* dma = std::get_if<DmaEngineConfig>(&cfg.engine_params)) {
            dma->setup_overhead.polled += 1us;
            dma->setup_overhead.msix += 1us;
        } else {
            auto& rdma = std::get<RdmaConfig>(cfg.engine_params);
            rdma.verb_setup_read += 1us;
            rdma.verb_setup_write += 1us;
        }
        const auto s = validate_scenario(cfg);
        const auto d = gen.coin() ? h2c : c2h;
        const int ch = gen.uniform_int(1, s.max_channels());
        double prev = 0.0;
        for (ByteSize size : standard_sizes(cfg)) {
            const auto t = analytic_transfer_time(s, req(d, size.bytes, ch));
            ASSERT_GT(t.bandwidth.gbps, prev) << cfg.name << " " << size.bytes;
            ASSERT_LT(t.bandwidth.gbps, t.steady.gbps);
            prev = t.bandwidth.gbps;
        }
    }
}

TEST(AnalyticTransferTime, MoreChannelsHelpWhenPerChannelCapsBind) {
    prop::Gen gen(47);
    for (int i = 0; i < 300; ++i) {
        auto cfg = gen.fpga_scenario();
        auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
        dma.max_channels = 4;
        dma.aggregate_cap_h2c.reset();
        dma.aggregate_cap_c2h.reset();
        const auto s = validate_scenario(cfg);
        const auto d = gen.coin() ? h2c : c2h;
        const std::uint64_t size = std::uint64_t{64 * KiB} << gen.uniform(0, 4);
        const double one = analytic_transfer_time(s, req(d, size, 1)).bandwidth.gbps;
        const double per = dma.per_channel_cap(d).gbps * s.config().fabric.contention_factor(d);
        if (steady_rate(s, req(d, size, 1)).gbps < per) continue;  // cap not binding
        for (int n = 2; n <= 4; ++n) {
            ASSERT_GE(analytic_transfer_time(s, req(d, size, n)).bandwidth.gbps, one * (1 - 1e-12));
        }
    }
}

TEST(AnalyticTransferTime, UnitContentionFactorReproducesNoContender) {
    prop::Gen gen(53);
    for (int i = 0; i < 300; ++i) {
        auto cfg = gen.fpga_scenario();
        cfg.fabric.contending_master = false;
        const auto base = validate_scenario(cfg);
        cfg.fabric.contending_master = true;
        cfg.fabric.contention_factor_h2c = 1.0;
        cfg.fabric.contention_factor_c2h = 1.0;
        const auto unit = validate_scenario(cfg);
        const TransferRequest r = req(gen.coin() ? h2c : c2h, gen.size(cfg.endpoint.capacity.bytes),
                                      gen.uniform_int(1, base.max_channels()));
        const auto a = analytic_transfer_time(base, r);
        const auto b = analytic_transfer_time(unit, r);
        ASSERT_EQ(a.total.count(), b.total.count());
        ASSERT_EQ(a.bandwidth.gbps, b.bandwidth.gbps);
    }
}

// --- RDMA ---------------------------------------------------------------------

TEST(Rdma, HundredGigabitPortBoundsRate) {
    const auto s = preset("rdma-bf2-write");
    EXPECT_DOUBLE_EQ(s.rdma().wire_rate().gbps, 12.5);
    for (ByteSize size : standard_sizes(s.config())) {
        EXPECT_LT(rdma_transfer_time(s, RdmaVerb::Write, size).bandwidth.gbps, 12.5);
    }
}

TEST(Rdma, ReadTakesAtLeastAsLongAsWrite) {
    prop::Gen gen(59);
    for (int i = 0; i < 500; ++i) {
        const auto s = validate_scenario(gen.rdma_scenario());
        const ByteSize size{gen.size(64 * MiB)};
        const auto r = rdma_transfer_time(s, RdmaVerb::Read, size);
        const auto w = rdma_transfer_time(s, RdmaVerb::Write, size);
        const auto& rdma = s.rdma();
        EXPECT_NEAR((r.total - w.total).count(),
                    (rdma.verb_setup_read + rdma.round_trip - rdma.verb_setup_write).count(), 1e-6);
        if (rdma.verb_setup_read >= rdma.verb_setup_write) ASSERT_GE(r.total, w.total);
    }
    const auto bf2 = preset("rdma-bf2-read");
    for (ByteSize size : standard_sizes(bf2.config())) {
        EXPECT_GE(rdma_transfer_time(bf2, RdmaVerb::Read, size).total,
                  rdma_transfer_time(bf2, RdmaVerb::Write, size).total);
    }
}

TEST(Rdma, WriteFormula) {
    const auto s = preset("rdma-bf2-write");
    const auto& rdma = s.rdma();
    const double size = 4.0 * MiB;
    const double packets = size / 4096.0;
    const double rate = std::min({12.5 * size / (size + packets * 58.0), 25.6, 25.6});
    const double expect = rdma.verb_setup_write.count() + s.config().endpoint.access_latency.count() + size / rate;
    EXPECT_NEAR(rdma_transfer_time(s, RdmaVerb::Write, ByteSize{4 * MiB}).total.count(), expect, 1e-6);
}

TEST(Rdma, FpgaScenarioIsIncompatible) {
    try {
        rdma_transfer_time(preset("ddr-xdma"), RdmaVerb::Read, ByteSize{4096});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IncompatibleEngine);
    }
}

TEST(Rdma, GenerationPresets) {
    EXPECT_EQ(generation_preset("SDR"), 10.0);
    EXPECT_EQ(generation_preset("DDR"), 20.0);
    EXPECT_EQ(generation_preset("QDR"), 40.0);
    EXPECT_EQ(generation_preset("FDR"), 56.0);
    EXPECT_EQ(generation_preset("EDR"), 100.0);
    EXPECT_EQ(generation_preset("HDR"), 200.0);
    EXPECT_EQ(generation_preset("NDR"), 400.0);
    try {
        generation_preset("XDR");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownGeneration);
    }
}
