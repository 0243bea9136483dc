// nicsim: sweep, calibrate and compare PCIe/RDMA transfer scenarios.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nicsim/calibrate.hpp"
#include "nicsim/config_io.hpp"
#include "nicsim/error.hpp"
#include "nicsim/report.hpp"
#include "nicsim/scenario.hpp"
#include "nicsim/sim.hpp"

namespace {

using namespace nicsim;

constexpr int kExitOk = 0;
constexpr int kExitCompareFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::vector<std::string> scenarios;
    std::vector<std::string> configs;
    std::string model = "analytic";
    std::string channels;
    std::string direction = "both";
    std::string sizes;
    std::uint64_t seed = 1;
    double jitter = 0.0;
    unsigned threads = 0;
    std::string out;
    std::string in;
    std::string trace;
    std::string title;
    std::string show;
    std::optional<double> tolerance;
};

std::vector<ValidatedScenario> selected_scenarios(const Options& opt, bool default_all) {
    std::vector<ValidatedScenario> out;
    for (const auto& name : opt.scenarios) {
        if (name == "all") {
            for (auto& cfg : builtin_scenarios()) out.push_back(validate_scenario(std::move(cfg)));
        } else {
            out.push_back(validate_scenario(builtin_scenario(name)));
        }
    }
    for (const auto& path : opt.configs) out.push_back(validate_scenario(load_scenario_file(path)));
    if (out.empty()) {
        if (!default_all) throw Error(ErrorCode::InvalidConfig, "no scenario given (use --scenario or --config)");
        for (auto& cfg : builtin_scenarios()) out.push_back(validate_scenario(std::move(cfg)));
    }
    return out;
}

std::vector<ModelKind> selected_models(const std::string& token) {
    if (token == "both") return {ModelKind::Analytic, ModelKind::Des};
    return {parse_model(token)};
}

std::vector<int> parse_channel_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidRequest, "bad channel count '" + item + "'");
        }
    }
    return out;
}

SweepPlan plan_for(const ValidatedScenario& scenario, const Options& opt) {
    SweepPlan plan = standard_plan(scenario);
    if (opt.direction != "both") plan.directions = {parse_direction(opt.direction)};
    if (!opt.channels.empty()) plan.channel_counts = parse_channel_list(opt.channels);
    if (!opt.sizes.empty()) plan.sizes = parse_size_list(opt.sizes);
    return plan;
}

SweepReport run_sweeps(const Options& opt, std::ostream* trace) {
    SimOptions sim;
    sim.seed = opt.seed;
    sim.jitter = opt.jitter;
    sim.threads = trace != nullptr ? 1 : opt.threads;
    sim.trace = trace;

    SweepReport report;
    for (const auto& scenario : selected_scenarios(opt, true)) {
        const SweepPlan plan = plan_for(scenario, opt);
        for (ModelKind model : selected_models(opt.model)) {
            const auto results = run_model_sweep(scenario, plan, model, sim);
            for (const auto& r : results) {
                if (!r.ok()) {
                    std::cerr << "warning: " << r.scenario << ' ' << to_token(r.direction) << ' ' << r.channels
                              << "ch " << r.size.bytes << " B skipped: " << r.failure->message << '\n';
                }
            }
            report.append(results);
        }
    }
    return report;
}

SweepReport input_report(const Options& opt) {
    if (!opt.in.empty()) return load_csv(opt.in);
    return run_sweeps(opt, nullptr);
}

int cmd_scenarios(const Options& opt) {
    if (!opt.show.empty()) {
        std::cout << scenario_to_toml(validate_scenario(builtin_scenario(opt.show)).config());
        return kExitOk;
    }
    for (const auto& cfg : builtin_scenarios()) {
        const auto s = validate_scenario(cfg);
        std::printf("%-16s %-10s %-6s %-9s channels=%d sizes=%s..%s\n", s.name().c_str(),
                    std::string(to_token(cfg.engine)).c_str(), std::string(to_token(cfg.mode)).c_str(),
                    std::string(to_token(cfg.endpoint.kind)).c_str(), s.max_channels(),
                    short_size_label(standard_sizes(cfg).front()).c_str(),
                    short_size_label(standard_sizes(cfg).back()).c_str());
    }
    return kExitOk;
}

int cmd_sweep(const Options& opt) {
    std::ofstream trace_file;
    if (!opt.trace.empty()) {
        trace_file.open(opt.trace);
        if (!trace_file) throw Error(ErrorCode::IoError, "cannot write " + opt.trace);
    }
    const SweepReport report = run_sweeps(opt, opt.trace.empty() ? nullptr : &trace_file);
    if (opt.out.empty() || opt.out == "-") {
        write_csv(report, std::cout);
    } else {
        emit_csv(report, opt.out);
        std::cerr << report.rows.size() << " rows written to " << opt.out << '\n';
    }
    return kExitOk;
}

int cmd_calibrate(const Options& opt) {
    const ReferenceSet refs = published_references();
    std::vector<FitResult> fits;
    if (opt.scenarios.empty() && opt.configs.empty()) {
        fits = calibrate_builtin(refs);
    } else {
        for (const auto& name : opt.scenarios) {
            const ScenarioConfig seed = builtin_scenario(name);
            fits.push_back(fit_parameters(seed, default_calibration_spec(name), refs));
        }
        for (const auto& path : opt.configs) {
            const ScenarioConfig seed = load_scenario_file(path);
            fits.push_back(fit_parameters(seed, default_calibration_spec(seed.name), refs));
        }
    }
    const std::string text = calibration_defaults_toml(fits);
    if (opt.out.empty() || opt.out == "-") {
        std::cout << text;
    } else {
        std::ofstream file(opt.out);
        if (!file) throw Error(ErrorCode::IoError, "cannot write " + opt.out);
        file << text;
        for (const auto& fit : fits) {
            std::fprintf(stderr, "%-16s objective %.6f after %zu evaluations\n", fit.fitted.name.c_str(),
                         fit.objective, fit.evaluations);
        }
    }
    return kExitOk;
}

int cmd_compare(const Options& opt) {
    const SweepReport report = input_report(opt);
    std::set<std::string> present;
    for (const auto& row : report.rows) present.insert(row.scenario);

    ReferenceSet refs;
    for (const auto& ref : published_references().points) {
        if (present.count(ref.scenario) != 0) refs.points.push_back(ref);
    }
    if (refs.points.empty()) throw Error(ErrorCode::NoReferencePoints, "no reference points for these scenarios");

    bool ok = true;
    for (ModelKind model : {ModelKind::Analytic, ModelKind::Des}) {
        SweepReport part;
        for (const auto& row : report.rows) {
            if (row.model == model) part.rows.push_back(row);
        }
        if (part.empty()) continue;
        const double tol = opt.tolerance.value_or(model == ModelKind::Analytic ? 0.05 : 0.07);
        const ComparisonReport cmp = compare_to_reference(part, refs, tol);
        write_comparison(cmp, std::cout);
        ok = ok && cmp.passed();
    }
    return ok ? kExitOk : kExitCompareFailed;
}

int cmd_plot(const Options& opt) {
    if (opt.out.empty()) throw Error(ErrorCode::InvalidConfig, "plot needs --out FILE.svg");
    const SweepReport report = input_report(opt);
    emit_plot(report, opt.out, opt.title);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PCIe DMA and RDMA transfer simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    std::optional<double> tolerance;
    app.add_option("--scenario", opt.scenarios, "Builtin scenario name, or 'all' (repeatable)");
    app.add_option("--config", opt.configs, "Scenario TOML file (repeatable)");
    app.add_option("--model", opt.model, "analytic | des | both")
        ->check(CLI::IsMember({"analytic", "des", "both"}));
    app.add_option("--channels", opt.channels, "Comma-separated channel counts (default: all supported)");
    app.add_option("--direction", opt.direction, "h2c | c2h | both")->check(CLI::IsMember({"h2c", "c2h", "both"}));
    app.add_option("--sizes", opt.sizes, "Sizes: '4K,1M' or '64..1MiB:x2' (default: standard grid)");
    app.add_option("--seed", opt.seed, "Seed for DES jitter");
    app.add_option("--jitter", opt.jitter, "Relative DES service-time jitter in [0, 1)");
    app.add_option("--threads", opt.threads, "Sweep worker threads (0 = all cores)");
    app.add_option("--out", opt.out, "Output file ('-' or omitted: stdout where applicable)");

    auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios");
    scenarios->add_option("--show", opt.show, "Print one scenario as TOML");

    auto* sweep = app.add_subcommand("sweep", "Run a bandwidth sweep and write CSV");
    sweep->add_option("--trace", opt.trace, "Write the DES event trace to FILE (forces one thread)");

    app.add_subcommand("calibrate", "Fit free parameters against the reference set");

    auto* compare = app.add_subcommand("compare", "Check sweep results against the reference set");
    compare->add_option("--in", opt.in, "Sweep CSV to check (default: run a fresh sweep)");
    compare->add_option("--tolerance", tolerance, "Relative tolerance (default 0.05 analytic, 0.07 des)");

    auto* plot = app.add_subcommand("plot", "Render a sweep as SVG");
    plot->add_option("--in", opt.in, "Sweep CSV to plot (default: run a fresh sweep)");
    plot->add_option("--title", opt.title, "Plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    opt.tolerance = tolerance;

    try {
        if (*scenarios) return cmd_scenarios(opt);
        if (*sweep) return cmd_sweep(opt);
        if (*compare) return cmd_compare(opt);
        if (*plot) return cmd_plot(opt);
        return cmd_calibrate(opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
