#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "nicsim/calibrate.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/error.hpp"
#include "nicsim/report.hpp"

using namespace nicsim;

namespace {

constexpr auto h2c = Direction::HostToCard;
constexpr auto c2h = Direction::CardToHost;

SweepRow row(std::string scenario, ModelKind m, Direction d, int ch, std::uint64_t size, double bw) {
    return SweepRow{std::move(scenario), m, d, ch, size, bw, static_cast<double>(size) / bw};
}

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

// --- reference set --------------------------------------------------------------

TEST(ReferenceSet, EmbedsThePublishedValues) {
    const auto refs = published_references();
    EXPECT_EQ(refs.points.size(), 13u);
    EXPECT_EQ(refs.for_scenario("bram-xdma").points.size(), 2u);
    EXPECT_EQ(refs.for_scenario("ddr-xdma").points.size(), 4u);
    EXPECT_EQ(refs.for_scenario("ddr-microblaze").points.size(), 3u);
    EXPECT_EQ(refs.for_scenario("ddr-petalinux").points.size(), 4u);
    for (const auto& p : refs.points) {
        EXPECT_LE(p.bw_low, p.bw_high);
        if (p.scenario == "bram-xdma") {
            ASSERT_TRUE(p.size.has_value());
            EXPECT_EQ(p.size->bytes, MiB);
        } else {
            EXPECT_FALSE(p.size.has_value());
        }
    }
    const auto c2h4 = refs.for_scenario("ddr-xdma").points[2];
    EXPECT_EQ(c2h4.channels, 4);
    EXPECT_EQ(c2h4.bw_low.gbps, 13.0);
    EXPECT_EQ(c2h4.bw_high.gbps, 14.0);
    EXPECT_THROW(reference_range("x", h2c, 1, std::nullopt, 3.0, 2.0, ""), Error);
}

TEST(ReferenceSet, ToleranceRules) {
    const auto point = reference_value("bram-xdma", h2c, 1, ByteSize{MiB}, 7.54, "");
    EXPECT_TRUE(within_tolerance(Bandwidth{7.60}, point, 0.05));
    EXPECT_NEAR(interval_distance(Bandwidth{7.60}, point), 0.06 / 7.54, 1e-12);
    EXPECT_FALSE(within_tolerance(Bandwidth{9.0}, reference_value("x", h2c, 1, std::nullopt, 12.0, ""), 0.05));
    const auto band = reference_range("ddr-xdma", c2h, 4, std::nullopt, 13.0, 14.0, "");
    EXPECT_TRUE(within_tolerance(Bandwidth{13.5}, band, 0.0));
    EXPECT_EQ(interval_distance(Bandwidth{13.5}, band), 0.0);
    EXPECT_TRUE(within_tolerance(Bandwidth{13.0 * 0.95}, band, 0.05));
    EXPECT_FALSE(within_tolerance(Bandwidth{13.0 * 0.94}, band, 0.05));
    EXPECT_TRUE(within_tolerance(Bandwidth{14.0 * 1.05}, band, 0.05));
    EXPECT_FALSE(within_tolerance(Bandwidth{14.0 * 1.06}, band, 0.05));
}

// --- CSV --------------------------------------------------------------------------

TEST(Csv, EmptyReportIsHeaderOnly) {
    const auto path = temp("nicsim_empty.csv");
    emit_csv(SweepReport{}, path);
    EXPECT_EQ(slurp(path), std::string(kCsvHeader) + "\n");
    std::filesystem::remove(path);
}

TEST(Csv, OneRowIsTwoLines) {
    SweepReport rep;
    rep.rows.push_back(row("ddr-xdma", ModelKind::Des, c2h, 4, 1048576, 13.71954321));
    std::ostringstream out;
    write_csv(rep, out);
    EXPECT_EQ(out.str(), std::string(kCsvHeader) + "\nddr-xdma,des,c2h,4,1048576,13.7195,76429.367\n");
}

TEST(Csv, ReadBackMatchesWrittenPrecision) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    SweepReport rep;
    rep.append(run_model_sweep(s, standard_plan(s), ModelKind::Analytic));
    std::stringstream io;
    write_csv(rep, io);
    const auto back = read_csv(io);
    ASSERT_EQ(back.rows.size(), rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].scenario, rep.rows[i].scenario);
        EXPECT_EQ(back.rows[i].size_bytes, rep.rows[i].size_bytes);
        EXPECT_NEAR(back.rows[i].bandwidth_gbps, rep.rows[i].bandwidth_gbps, 5e-5);
    }
    std::stringstream again;
    write_csv(back, again);
    std::stringstream first;
    write_csv(rep, first);
    EXPECT_EQ(again.str(), first.str());
}

TEST(Csv, FullDdrSweepRowCount) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    const auto plan = standard_plan(s);
    SweepReport rep;
    for (ModelKind m : {ModelKind::Analytic, ModelKind::Des}) rep.append(run_model_sweep(s, plan, m));
    EXPECT_EQ(rep.rows.size(), plan.directions.size() * plan.channel_counts.size() * plan.sizes.size() * 2);
}

TEST(Csv, ByteStableAcrossRuns) {
    SimOptions opt;
    opt.seed = 7;
    opt.jitter = 0.05;
    auto render = [&] {
        SweepReport rep;
        const auto s = validate_scenario(builtin_scenario("ddr-microblaze"));
        rep.append(run_model_sweep(s, standard_plan(s), ModelKind::Des, opt));
        std::ostringstream out;
        write_csv(rep, out);
        return out.str();
    };
    EXPECT_EQ(render(), render());
}

TEST(Csv, Errors) {
    std::istringstream bad_header("scenario,model\n");
    EXPECT_THROW(read_csv(bad_header), Error);
    std::istringstream bad_row(std::string(kCsvHeader) + "\nx,des,h2c,1,64\n");
    EXPECT_THROW(read_csv(bad_row), Error);
    try {
        emit_csv(SweepReport{}, "/nonexistent-dir/out.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

// --- comparison -----------------------------------------------------------------

TEST(Compare, PeakUsesMaxOverSizes) {
    ReferenceSet refs;
    refs.points.push_back(reference_value("ddr-xdma", h2c, 1, std::nullopt, 10.8, ""));
    SweepReport rep;
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 1, 4096, 2.0));
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 1, MiB, 10.7));
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 2, MiB, 30.0));
    const auto cmp = compare_to_reference(rep, refs, 0.05);
    ASSERT_EQ(cmp.lines.size(), 1u);
    EXPECT_EQ(cmp.lines[0].value.gbps, 10.7);
    EXPECT_TRUE(cmp.passed());
}

TEST(Compare, SizedReferenceUsesThatSize) {
    ReferenceSet refs;
    refs.points.push_back(reference_value("bram-xdma", c2h, 1, ByteSize{MiB}, 7.77, ""));
    SweepReport rep;
    rep.rows.push_back(row("bram-xdma", ModelKind::Des, c2h, 1, MiB / 2, 7.76));
    rep.rows.push_back(row("bram-xdma", ModelKind::Des, c2h, 1, MiB, 9.0));
    const auto cmp = compare_to_reference(rep, refs, 0.05);
    EXPECT_EQ(cmp.lines.at(0).value.gbps, 9.0);
    EXPECT_FALSE(cmp.passed());
}

TEST(Compare, MissingCoverageListsReferences) {
    SweepReport rep;
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 1, MiB, 10.8));
    try {
        compare_to_reference(rep, published_references().for_scenario("ddr-xdma"), 0.05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingCoverage);
        EXPECT_NE(std::string(e.what()).find("ddr-xdma c2h 4ch"), std::string::npos) << e.what();
    }
}

TEST(Compare, ShippedCalibrationPassesBothModels) {
    SweepReport analytic, des;
    for (const auto& cfg : builtin_scenarios()) {
        const auto s = validate_scenario(cfg);
        analytic.append(run_model_sweep(s, standard_plan(s), ModelKind::Analytic));
        des.append(run_model_sweep(s, standard_plan(s), ModelKind::Des));
    }
    const auto a = compare_to_reference(analytic, published_references(), 0.05);
    const auto d = compare_to_reference(des, published_references(), 0.07);
    EXPECT_EQ(a.lines.size(), 13u);
    EXPECT_TRUE(a.passed());
    EXPECT_TRUE(d.passed());
    std::ostringstream out;
    write_comparison(a, out);
    EXPECT_NE(out.str().find("all references pass"), std::string::npos);
}

// --- SVG -----------------------------------------------------------------------------

TEST(Plot, SingleSeries) {
    SweepReport rep;
    for (std::uint64_t s = 64; s <= MiB; s *= 2) rep.rows.push_back(row("bram-xdma", ModelKind::Des, h2c, 1, s, 1.0));
    const auto svg = render_svg(rep, "bram");
    const std::regex polyline("<polyline");
    const std::regex legend("class=\"legend-entry\"");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), polyline), std::sregex_iterator()), 1);
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), legend), std::sregex_iterator()), 1);
    EXPECT_NE(svg.find(">1M</text>"), std::string::npos);
    EXPECT_EQ(svg.find("href"), std::string::npos);
}

TEST(Plot, CeilingGuides) {
    SweepReport rep;
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 1, 4096, 1.0));
    rep.rows.push_back(row("ddr-xdma", ModelKind::Analytic, h2c, 1, 8192, 2.0));
    const auto svg = render_svg(rep);
    std::vector<double> guides;
    const std::regex guide("class=\"ceiling\" data-gbps=\"([0-9.]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), guide); it != std::sregex_iterator(); ++it) {
        guides.push_back(std::stod((*it)[1]));
    }
    EXPECT_EQ(guides, (std::vector<double>{15.8, 16.0, 19.2}));
}

TEST(Plot, OnePolylinePerSeries) {
    const auto s = validate_scenario(builtin_scenario("ddr-xdma"));
    SweepReport rep;
    for (ModelKind m : {ModelKind::Analytic, ModelKind::Des}) rep.append(run_model_sweep(s, standard_plan(s), m));
    const auto svg = render_svg(rep);
    const std::regex polyline("<polyline");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), polyline), std::sregex_iterator()), 16);
}

TEST(Plot, Errors) {
    try {
        render_svg(SweepReport{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyReport);
    }
    SweepReport rep;
    rep.rows.push_back(row("x", ModelKind::Des, h2c, 1, 64, 1.0));
    try {
        emit_plot(rep, "/nonexistent-dir/p.svg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

// --- calibration -------------------------------------------------------------------

TEST(Calibrate, EmptyReferencesAreRejected) {
    try {
        fit_parameters(uncalibrated_ddr_xdma(), default_calibration_spec("ddr-xdma"), ReferenceSet{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoReferencePoints);
    }
}

TEST(Calibrate, DdrResidualsWithinFivePercent) {
    const auto fit = fit_parameters(uncalibrated_ddr_xdma(), default_calibration_spec("ddr-xdma"),
                                    published_references());
    ASSERT_EQ(fit.residuals.size(), 4u);
    for (const auto& r : fit.residuals) EXPECT_LE(r.distance, 0.05) << describe(r.ref);
    EXPECT_LE(fit.objective, fit.best_grid_objective);
}

TEST(Calibrate, ReproducesShippedConstants) {
    const auto fits = calibrate_builtin(published_references());
    ASSERT_EQ(fits.size(), 4u);
    for (const auto& fit : fits) {
        const auto shipped = builtin_scenario(fit.fitted.name);
        for (const auto& b : fit.bounds) {
            EXPECT_EQ(get_param(fit.fitted, b.param), get_param(shipped, b.param))
                << fit.fitted.name << " " << to_token(b.param);
        }
        EXPECT_EQ(validate_scenario(fit.fitted), validate_scenario(shipped)) << fit.fitted.name;
    }
}

TEST(Calibrate, DefaultsFileMatchesShippedCalibration) {
    const auto path = std::filesystem::path(NICSIM_SOURCE_DIR) / "data" / "calibrated_defaults.toml";
    EXPECT_EQ(slurp(path), calibration_defaults_toml(calibrate_builtin(published_references())));
}

TEST(Calibrate, BramFitIsALocalMinimumOnABruteForceGrid) {
    const ReferenceSet refs = published_references().for_scenario("bram-xdma");
    const auto fit = fit_parameters(uncalibrated_bram_xdma(), default_calibration_spec("bram-xdma"), refs);

    // Independent objective: recompute each reference by hand from the analytic model.
    auto objective = [&](double cap_h2c, double cap_c2h) {
        auto cfg = uncalibrated_bram_xdma();
        auto& dma = std::get<DmaEngineConfig>(cfg.engine_params);
        dma.per_channel_cap_h2c = Bandwidth{cap_h2c};
        dma.per_channel_cap_c2h = Bandwidth{cap_c2h};
        const auto s = validate_scenario(cfg);
        const double h = analytic_transfer_time(s, {h2c, ByteSize{MiB}, 1, ByteSize{0}}).bandwidth.gbps;
        const double c = analytic_transfer_time(s, {c2h, ByteSize{MiB}, 1, ByteSize{0}}).bandwidth.gbps;
        return std::max(std::abs(h - 7.54) / 7.54, std::abs(c - 7.77) / 7.77);
    };
    const double h = fit.values[0];
    const double c = fit.values[1];
    const double at_fit = objective(h, c);
    EXPECT_NEAR(at_fit, fit.objective, 1e-12);
    EXPECT_LT(at_fit, 1e-6);
    for (double dh : {-0.05, -0.01, 0.0, 0.01, 0.05}) {
        for (double dc : {-0.05, -0.01, 0.0, 0.01, 0.05}) {
            EXPECT_LE(at_fit, objective(h + dh, c + dc) + 1e-15);
        }
    }
    // Re-simulate: the DES agrees with the fitted analytic values.
    const auto s = validate_scenario(fit.fitted);
    EXPECT_NEAR(run_transfer(s, {h2c, ByteSize{MiB}, 1, ByteSize{0}}).bandwidth.gbps, 7.54, 7.54 * 0.01);
    EXPECT_NEAR(run_transfer(s, {c2h, ByteSize{MiB}, 1, ByteSize{0}}).bandwidth.gbps, 7.77, 7.77 * 0.01);
}

TEST(Calibrate, ObjectiveAtResultNotAboveAnyGridPoint) {
    CalibrationSpec spec = default_calibration_spec("ddr-microblaze");
    const auto seed = uncalibrated_ddr_microblaze(builtin_scenario("ddr-xdma"));
    const auto refs = published_references();
    const auto fit = fit_parameters(seed, spec, refs);
    const int n = spec.grid_points;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            auto cfg = seed;
            const auto& a = spec.free_params[0];
            const auto& b = spec.free_params[1];
            set_param(cfg, a.param, a.low + (a.high - a.low) * i / (n - 1));
            set_param(cfg, b.param, b.low + (b.high - b.low) * j / (n - 1));
            ASSERT_LE(fit.objective, calibration_objective(cfg, refs));
        }
    }
}

TEST(Calibrate, FlatParameterIsUnidentifiable) {
    // BRAM references are single-channel, so an aggregate cap cannot be recovered.
    CalibrationSpec spec;
    spec.free_params = {{FreeParam::PerChannelCapH2c, 1.0, 20.0}, {FreeParam::AggregateCapC2h, 1.0, 20.0}};
    try {
        fit_parameters(uncalibrated_bram_xdma(), spec, published_references());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Unidentifiable);
    }
}

TEST(Calibrate, SpecValidation) {
    const auto refs = published_references();
    CalibrationSpec spec = default_calibration_spec("bram-xdma");
    spec.grid_points = 8;
    EXPECT_THROW(fit_parameters(uncalibrated_bram_xdma(), spec, refs), Error);
    spec = default_calibration_spec("bram-xdma");
    spec.free_params[0].low = 0.0;
    EXPECT_THROW(fit_parameters(uncalibrated_bram_xdma(), spec, refs), Error);
    spec = default_calibration_spec("bram-xdma");
    spec.free_params[0].high = INFINITY;
    EXPECT_THROW(fit_parameters(uncalibrated_bram_xdma(), spec, refs), Error);
    // Contention factors do not exist without a contending master.
    spec.free_params = {{FreeParam::ContentionFactorC2h, 0.1, 1.0}};
    try {
        fit_parameters(uncalibrated_bram_xdma(), spec, refs);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
    EXPECT_THROW(get_param(builtin_scenario("rdma-bf2-read"), FreeParam::PerChannelCapH2c), Error);
}

TEST(Calibrate, ParamTokensRoundTrip) {
    for (FreeParam p : {FreeParam::SetupOverheadPolled, FreeParam::SetupOverheadMsix, FreeParam::PerChannelCapH2c,
                        FreeParam::PerChannelCapC2h, FreeParam::ContentionFactorH2c, FreeParam::ContentionFactorC2h,
                        FreeParam::DescriptorOverhead, FreeParam::AggregateCapH2c, FreeParam::AggregateCapC2h}) {
        EXPECT_EQ(parse_free_param(to_token(p)), p);
    }
    EXPECT_THROW(parse_free_param("gain"), Error);
}
