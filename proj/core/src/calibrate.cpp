#include "nicsim/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "nicsim/config_io.hpp"
#include "nicsim/engine.hpp"
#include "nicsim/error.hpp"

namespace nicsim {

namespace {

constexpr std::array<std::pair<FreeParam, std::string_view>, 9> kParamTokens{{
    {FreeParam::SetupOverheadPolled, "setup_overhead_polled_us"},
    {FreeParam::SetupOverheadMsix, "setup_overhead_msix_us"},
    {FreeParam::PerChannelCapH2c, "per_channel_cap_h2c_gbps"},
    {FreeParam::PerChannelCapC2h, "per_channel_cap_c2h_gbps"},
    {FreeParam::ContentionFactorH2c, "contention_factor_h2c"},
    {FreeParam::ContentionFactorC2h, "contention_factor_c2h"},
    {FreeParam::DescriptorOverhead, "descriptor_overhead_ns"},
    {FreeParam::AggregateCapH2c, "aggregate_cap_h2c_gbps"},
    {FreeParam::AggregateCapC2h, "aggregate_cap_c2h_gbps"},
}};

DmaEngineConfig& dma_params(ScenarioConfig& cfg, FreeParam p) {
    auto* dma = std::get_if<DmaEngineConfig>(&cfg.engine_params);
    if (dma == nullptr) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(to_token(p)) + " does not exist in RDMA scenario " + cfg.name);
    }
    return *dma;
}

void require_contender(const ScenarioConfig& cfg, FreeParam p) {
    if (!cfg.fabric.contending_master) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(to_token(p)) + " needs a contending master in " + cfg.name);
    }
}

}  // namespace

std::string_view to_token(FreeParam p) {
    for (const auto& [param, token] : kParamTokens) {
        if (param == p) return token;
    }
    return "?";
}

FreeParam parse_free_param(std::string_view token) {
    for (const auto& [param, t] : kParamTokens) {
        if (t == token) return param;
    }
    throw Error(ErrorCode::ParseError, "unknown calibration parameter '" + std::string(token) + "'");
}

double get_param(const ScenarioConfig& cfg, FreeParam p) {
    ScenarioConfig copy = cfg;
    switch (p) {
        case FreeParam::SetupOverheadPolled: return Microseconds(dma_params(copy, p).setup_overhead.polled).count();
        case FreeParam::SetupOverheadMsix:   return Microseconds(dma_params(copy, p).setup_overhead.msix).count();
        case FreeParam::PerChannelCapH2c:    return dma_params(copy, p).per_channel_cap_h2c.gbps;
        case FreeParam::PerChannelCapC2h:    return dma_params(copy, p).per_channel_cap_c2h.gbps;
        case FreeParam::DescriptorOverhead:  return dma_params(copy, p).descriptor_overhead.count();
        case FreeParam::AggregateCapH2c:
            return dma_params(copy, p).aggregate_cap_h2c.value_or(Bandwidth{std::numeric_limits<double>::infinity()}).gbps;
        case FreeParam::AggregateCapC2h:
            return dma_params(copy, p).aggregate_cap_c2h.value_or(Bandwidth{std::numeric_limits<double>::infinity()}).gbps;
        case FreeParam::ContentionFactorH2c:
            require_contender(cfg, p);
            return cfg.fabric.contention_factor_h2c;
        case FreeParam::ContentionFactorC2h:
            require_contender(cfg, p);
            return cfg.fabric.contention_factor_c2h;
    }
    return 0.0;
}

void set_param(ScenarioConfig& cfg, FreeParam p, double value) {
    switch (p) {
        case FreeParam::SetupOverheadPolled:
            dma_params(cfg, p).setup_overhead.polled = Microseconds{value};
            break;
        case FreeParam::SetupOverheadMsix:
            dma_params(cfg, p).setup_overhead.msix = Microseconds{value};
            break;
        case FreeParam::PerChannelCapH2c:   dma_params(cfg, p).per_channel_cap_h2c = Bandwidth{value}; break;
        case FreeParam::PerChannelCapC2h:   dma_params(cfg, p).per_channel_cap_c2h = Bandwidth{value}; break;
        case FreeParam::DescriptorOverhead: dma_params(cfg, p).descriptor_overhead = Nanoseconds{value}; break;
        case FreeParam::AggregateCapH2c:    dma_params(cfg, p).aggregate_cap_h2c = Bandwidth{value}; break;
        case FreeParam::AggregateCapC2h:    dma_params(cfg, p).aggregate_cap_c2h = Bandwidth{value}; break;
        case FreeParam::ContentionFactorH2c:
            require_contender(cfg, p);
            cfg.fabric.contention_factor_h2c = value;
            break;
        case FreeParam::ContentionFactorC2h:
            require_contender(cfg, p);
            cfg.fabric.contention_factor_c2h = value;
            break;
    }
}

CalibrationSpec default_calibration_spec(std::string_view scenario) {
    CalibrationSpec spec;
    if (scenario == "bram-xdma") {
        spec.free_params = {{FreeParam::PerChannelCapH2c, 1.0, 20.0}, {FreeParam::PerChannelCapC2h, 1.0, 20.0}};
    } else if (scenario == "ddr-xdma") {
        spec.free_params = {{FreeParam::PerChannelCapH2c, 1.0, 20.0},
                            {FreeParam::PerChannelCapC2h, 1.0, 20.0},
                            {FreeParam::AggregateCapH2c, 1.0, 20.0}};
    } else if (scenario == "ddr-microblaze") {
        spec.free_params = {{FreeParam::ContentionFactorH2c, 0.05, 1.0}, {FreeParam::ContentionFactorC2h, 0.05, 1.0}};
    } else if (scenario == "ddr-petalinux") {
        spec.free_params = {{FreeParam::ContentionFactorH2c, 0.05, 1.0},
                            {FreeParam::ContentionFactorC2h, 0.05, 1.0},
                            {FreeParam::AggregateCapC2h, 1.0, 20.0}};
    } else {
        throw Error(ErrorCode::NoReferencePoints, "no calibration defined for '" + std::string(scenario) + "'");
    }
    return spec;
}

Bandwidth evaluate_reference(const ValidatedScenario& scenario, const ReferencePoint& ref) {
    if (ref.size) {
        return analytic_transfer_time(scenario, TransferRequest{ref.direction, *ref.size, ref.channels, ByteSize{0}})
            .bandwidth;
    }
    Bandwidth best{0.0};
    for (ByteSize s : standard_sizes(scenario.config())) {
        best = std::max(best,
                        analytic_transfer_time(scenario, TransferRequest{ref.direction, s, ref.channels, ByteSize{0}})
                            .bandwidth);
    }
    return best;
}

double calibration_objective(const ScenarioConfig& cfg, const ReferenceSet& refs) {
    try {
        const auto scenario = validate_scenario(cfg);
        double worst = 0.0;
        for (const auto& ref : refs.points) {
            if (ref.scenario != cfg.name) continue;
            worst = std::max(worst, interval_distance(evaluate_reference(scenario, ref), ref));
        }
        return worst;
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

FitResult fit_parameters(const ScenarioConfig& seed, const CalibrationSpec& spec, const ReferenceSet& refs) {
    const ReferenceSet own = refs.for_scenario(seed.name);
    if (own.empty()) {
        throw Error(ErrorCode::NoReferencePoints, "no reference points for '" + seed.name + "'");
    }
    if (spec.free_params.empty()) {
        throw Error(ErrorCode::InvalidConfig, "calibration needs at least one free parameter");
    }
    if (spec.grid_points < 16 || spec.descent_passes < 3 || !(spec.shrink > 0.0 && spec.shrink < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "calibration needs >= 16 grid points, >= 3 passes, shrink in (0,1)");
    }
    for (const auto& b : spec.free_params) {
        if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low > 0.0) || !(b.low < b.high)) {
            throw Error(ErrorCode::InvalidConfig, "bounds for " + std::string(to_token(b.param)) +
                                                      " must be finite, positive and ordered");
        }
        (void)get_param(seed, b.param);  // existence check
    }

    const std::size_t dims = spec.free_params.size();
    const auto n = static_cast<std::size_t>(spec.grid_points);
    FitResult fit;
    fit.bounds = spec.free_params;

    auto grid_value = [&](std::size_t axis, std::size_t k) {
        const auto& b = spec.free_params[axis];
        return b.low + (b.high - b.low) * static_cast<double>(k) / static_cast<double>(n - 1);
    };
    auto score = [&](const std::vector<double>& x) {
        ScenarioConfig cfg = seed;
        for (std::size_t i = 0; i < dims; ++i) set_param(cfg, spec.free_params[i].param, x[i]);
        ++fit.evaluations;
        return calibration_objective(cfg, own);
    };

    // Coarse grid, mixed-radix walk; first strict minimum wins.
    std::vector<std::size_t> index(dims, 0);
    std::vector<double> x(dims), best_x;
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (std::size_t i = 0; i < dims; ++i) x[i] = grid_value(i, index[i]);
        const double f = score(x);
        if (f < best) {
            best = f;
            best_x = x;
        }
        std::size_t axis = 0;
        while (axis < dims && ++index[axis] == n) index[axis++] = 0;
        if (axis == dims) break;
    }
    fit.best_grid_objective = best;

    // Coordinate descent; only strict improvements are accepted.
    std::vector<double> step(dims);
    for (std::size_t i = 0; i < dims; ++i) {
        step[i] = (spec.free_params[i].high - spec.free_params[i].low) / static_cast<double>(n - 1);
    }
    x = best_x;
    for (int pass = 0; pass < spec.descent_passes; ++pass) {
        for (std::size_t i = 0; i < dims; ++i) {
            const auto& b = spec.free_params[i];
            for (int moves = 0; moves < 64; ++moves) {
                bool moved = false;
                for (double dir : {1.0, -1.0}) {
                    std::vector<double> cand = x;
                    cand[i] = std::clamp(x[i] + dir * step[i], b.low, b.high);
                    if (cand[i] == x[i]) continue;
                    const double f = score(cand);
                    if (f < best) {
                        best = f;
                        x = cand;
                        moved = true;
                        break;
                    }
                }
                if (!moved) break;
            }
            step[i] *= spec.shrink;
        }
    }

    // A parameter that cannot move the objective anywhere in its range is not
    // identifiable from these references.
    for (std::size_t i = 0; i < dims; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> probe = x;
            probe[i] = grid_value(i, k);
            const double f = score(probe);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        if (hi - lo <= 1e-12) {
            throw Error(ErrorCode::Unidentifiable, std::string(to_token(spec.free_params[i].param)) +
                                                       " does not influence the objective for " + seed.name);
        }
    }

    fit.values = x;
    fit.objective = best;
    fit.fitted = seed;
    for (std::size_t i = 0; i < dims; ++i) set_param(fit.fitted, spec.free_params[i].param, x[i]);
    const auto validated = validate_scenario(fit.fitted);
    for (const auto& ref : own.points) {
        const Bandwidth v = evaluate_reference(validated, ref);
        fit.residuals.push_back({ref, v, interval_distance(v, ref)});
    }
    return fit;
}

std::vector<FitResult> calibrate_builtin(const ReferenceSet& refs) {
    std::vector<FitResult> fits;
    fits.push_back(fit_parameters(uncalibrated_bram_xdma(), default_calibration_spec("bram-xdma"), refs));
    fits.push_back(fit_parameters(uncalibrated_ddr_xdma(), default_calibration_spec("ddr-xdma"), refs));
    const ScenarioConfig ddr = fits.back().fitted;
    fits.push_back(fit_parameters(uncalibrated_ddr_microblaze(ddr), default_calibration_spec("ddr-microblaze"), refs));
    fits.push_back(fit_parameters(uncalibrated_ddr_petalinux(ddr), default_calibration_spec("ddr-petalinux"), refs));
    return fits;
}

std::string calibration_defaults_toml(const std::vector<FitResult>& fits) {
    std::ostringstream os;
    os << "# Calibrated defaults written by `nicsim calibrate`.\n"
       << "# Objective: max relative distance to each reference interval (analytic model).\n";
    for (const auto& fit : fits) {
        os << "\n[" << fit.fitted.name << "]\n";
        for (std::size_t i = 0; i < fit.bounds.size(); ++i) {
            os << to_token(fit.bounds[i].param) << " = " << toml::format_double(fit.values[i]) << "  # bounds ["
               << toml::format_double(fit.bounds[i].low) << ", " << toml::format_double(fit.bounds[i].high) << "]\n";
        }
        os << "objective = " << toml::format_double(fit.objective) << '\n';
        os << "evaluations = " << fit.evaluations << '\n';
        for (const auto& r : fit.residuals) {
            char line[96];
            std::snprintf(line, sizeof line, "%.4f GB/s, residual %.6f", r.value.gbps, r.distance);
            os << "# " << describe(r.ref) << " -> " << line << '\n';
        }
    }
    return os.str();
}

}  // namespace nicsim
