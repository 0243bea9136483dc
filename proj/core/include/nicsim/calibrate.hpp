#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nicsim/reference.hpp"
#include "nicsim/scenario.hpp"

namespace nicsim {

/// Scenario parameters the calibrator may move. Rates in GB/s, overheads in
/// microseconds (setup) or nanoseconds (descriptor), factors dimensionless.
enum class FreeParam : std::uint8_t {
    SetupOverheadPolled,
    SetupOverheadMsix,
    PerChannelCapH2c,
    PerChannelCapC2h,
    ContentionFactorH2c,
    ContentionFactorC2h,
    DescriptorOverhead,
    AggregateCapH2c,
    AggregateCapC2h,
};

std::string_view to_token(FreeParam p);
FreeParam parse_free_param(std::string_view token);

/// Throws InvalidConfig if the parameter does not exist in `cfg` (e.g.
/// contention factors without a contending master, any DMA knob on RDMA).
double get_param(const ScenarioConfig& cfg, FreeParam p);
void set_param(ScenarioConfig& cfg, FreeParam p, double value);

struct ParamBounds {
    FreeParam param;
    double low;
    double high;
};

struct CalibrationSpec {
    std::vector<ParamBounds> free_params;
    int grid_points = 16;     ///< Per axis, >= 16.
    int descent_passes = 24;  ///< Coordinate-descent passes, >= 3.
    double shrink = 0.5;      ///< Step multiplier after each pass.
};

/// Calibration setup shipped for a builtin FPGA scenario.
CalibrationSpec default_calibration_spec(std::string_view scenario);

/// Analytic bandwidth for one reference: at its size, or max over
/// standard_sizes() when it is a peak reference.
Bandwidth evaluate_reference(const ValidatedScenario& scenario, const ReferencePoint& ref);

/// Max relative interval distance over the references of cfg.name.
/// Invalid configurations score +infinity.
double calibration_objective(const ScenarioConfig& cfg, const ReferenceSet& refs);

struct Residual {
    ReferencePoint ref;
    Bandwidth value;
    double distance;
};

struct FitResult {
    ScenarioConfig fitted;
    std::vector<ParamBounds> bounds;
    std::vector<double> values;  ///< Fitted value per free param, in spec order.
    double objective = 0.0;
    double best_grid_objective = 0.0;
    std::vector<Residual> residuals;
    std::size_t evaluations = 0;
};

/// Grid search over the bounds followed by shrinking coordinate descent.
/// Deterministic. Throws NoReferencePoints or Unidentifiable (a parameter
/// that leaves the objective flat across its whole range).
FitResult fit_parameters(const ScenarioConfig& seed, const CalibrationSpec& spec, const ReferenceSet& refs);

/// Fits bram-xdma, ddr-xdma, then ddr-microblaze and ddr-petalinux on top of
/// the fitted ddr-xdma.
std::vector<FitResult> calibrate_builtin(const ReferenceSet& refs);

/// Defaults file: fitted values plus per-reference residuals.
std::string calibration_defaults_toml(const std::vector<FitResult>& fits);

}  // namespace nicsim
