#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nicsim/reference.hpp"
#include "nicsim/sim.hpp"

namespace nicsim {

struct SweepRow {
    std::string scenario;
    ModelKind model = ModelKind::Analytic;
    Direction direction = Direction::HostToCard;
    int channels = 1;
    std::uint64_t size_bytes = 0;
    double bandwidth_gbps = 0.0;
    double total_time_ns = 0.0;

    bool operator==(const SweepRow&) const = default;
};

struct SweepReport {
    std::vector<SweepRow> rows;

    /// Appends successful points; failed points are skipped.
    void append(const std::vector<SimResult>& results);
    bool empty() const { return rows.empty(); }
};

/// `scenario,model,direction,channels,size_bytes,bandwidth_gbps,total_time_ns`
inline constexpr const char* kCsvHeader = "scenario,model,direction,channels,size_bytes,bandwidth_gbps,total_time_ns";

/// Header plus one row per entry, in report order; bandwidth to 4 decimals,
/// time to 3.
void write_csv(const SweepReport& report, std::ostream& out);
void emit_csv(const SweepReport& report, const std::filesystem::path& path);

SweepReport read_csv(std::istream& in);
SweepReport load_csv(const std::filesystem::path& path);

struct ComparisonLine {
    ReferencePoint ref;
    ModelKind model;
    Bandwidth value;
    double deviation;  ///< interval_distance of value
    bool pass;
};

struct ComparisonReport {
    double tolerance = 0.0;
    std::vector<ComparisonLine> lines;

    bool passed() const;
};

/// Checks every reference against every model present in the report. Peak
/// references use the max over the series' sizes. Throws MissingCoverage
/// listing references no row covers.
ComparisonReport compare_to_reference(const SweepReport& report, const ReferenceSet& refs, double tolerance);

void write_comparison(const ComparisonReport& report, std::ostream& out);

/// Self-contained SVG: log2 size axis, GB/s axis, one polyline per
/// (direction, channels, model), ceiling guides at 15.8 / 16 / 19.2 GB/s.
std::string render_svg(const SweepReport& report, const std::string& title = {});
void emit_plot(const SweepReport& report, const std::filesystem::path& path, const std::string& title = {});

}  // namespace nicsim
