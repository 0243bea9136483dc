#include "nicsim/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "nicsim/error.hpp"

namespace nicsim {

void SweepReport::append(const std::vector<SimResult>& results) {
    for (const auto& r : results) {
        if (!r.ok()) continue;
        rows.push_back(SweepRow{r.scenario, r.model, r.direction, r.channels, r.size.bytes, r.bandwidth.gbps,
                                r.total_time.count()});
    }
}

void write_csv(const SweepReport& report, std::ostream& out) {
    out << kCsvHeader << '\n';
    char buf[256];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%llu,%.4f,%.3f\n", row.scenario.c_str(),
                      std::string(to_token(row.model)).c_str(), std::string(to_token(row.direction)).c_str(),
                      row.channels, static_cast<unsigned long long>(row.size_bytes), row.bandwidth_gbps,
                      row.total_time_ns);
        out << buf;
    }
}

void emit_csv(const SweepReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_csv(report, out);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
    T value{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || p != field.data() + field.size()) {
        throw Error(ErrorCode::ParseError, "csv line " + std::to_string(line) + ": bad number '" +
                                               std::string(field) + "'");
    }
    return value;
}

}  // namespace

SweepReport read_csv(std::istream& in) {
    SweepReport report;
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error(ErrorCode::ParseError, "csv header must be: " + std::string(kCsvHeader));
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            f.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (f.size() != 7) {
            throw Error(ErrorCode::ParseError, "csv line " + std::to_string(line_no) + ": expected 7 fields");
        }
        SweepRow row;
        row.scenario = std::string(f[0]);
        row.model = parse_model(f[1]);
        row.direction = parse_direction(f[2]);
        row.channels = parse_number<int>(f[3], line_no);
        row.size_bytes = parse_number<std::uint64_t>(f[4], line_no);
        row.bandwidth_gbps = parse_number<double>(f[5], line_no);
        row.total_time_ns = parse_number<double>(f[6], line_no);
        report.rows.push_back(std::move(row));
    }
    return report;
}

SweepReport load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return read_csv(in);
}

bool ComparisonReport::passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const ComparisonLine& l) { return l.pass; });
}

ComparisonReport compare_to_reference(const SweepReport& report, const ReferenceSet& refs, double tolerance) {
    ComparisonReport out;
    out.tolerance = tolerance;
    std::vector<std::string> missing;
    for (const auto& ref : refs.points) {
        bool covered = false;
        for (ModelKind model : {ModelKind::Analytic, ModelKind::Des}) {
            std::optional<double> value;
            for (const auto& row : report.rows) {
                if (row.model != model || row.scenario != ref.scenario || row.direction != ref.direction ||
                    row.channels != ref.channels) {
                    continue;
                }
                if (ref.size && row.size_bytes != ref.size->bytes) continue;
                value = std::max(value.value_or(0.0), row.bandwidth_gbps);
            }
            if (!value) continue;
            covered = true;
            const Bandwidth v{*value};
            out.lines.push_back({ref, model, v, interval_distance(v, ref), within_tolerance(v, ref, tolerance)});
        }
        if (!covered) missing.push_back(describe(ref));
    }
    if (!missing.empty()) {
        std::string msg = "no sweep rows for:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw Error(ErrorCode::MissingCoverage, msg);
    }
    return out;
}

void write_comparison(const ComparisonReport& report, std::ostream& out) {
    char buf[320];
    for (const auto& line : report.lines) {
        std::snprintf(buf, sizeof buf, "%s  %-8s  %-52s  got %7.4f GB/s  off %6.2f%%\n", line.pass ? "PASS" : "FAIL",
                      std::string(to_token(line.model)).c_str(), describe(line.ref).c_str(), line.value.gbps,
                      100.0 * line.deviation);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%s (tolerance %.1f%%)\n", report.passed() ? "all references pass" : "FAILED",
                  100.0 * report.tolerance);
    out << buf;
}

namespace {

constexpr std::array<double, 3> kCeilings{15.8, 16.0, 19.2};
constexpr std::array<const char*, 3> kCeilingNames{"PCIe link 15.8", "AXI fabric 16", "DDR4 19.2"};
constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                               "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default:  out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const SweepReport& report, const std::string& title) {
    if (report.empty()) throw Error(ErrorCode::EmptyReport, "nothing to plot");

    constexpr double width = 960, height = 560;
    constexpr double left = 70, right = 230, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::uint64_t min_size = UINT64_MAX, max_size = 0;
    double max_bw = 0.0;
    bool many_scenarios = false;
    for (const auto& row : report.rows) {
        min_size = std::min(min_size, row.size_bytes);
        max_size = std::max(max_size, row.size_bytes);
        max_bw = std::max(max_bw, row.bandwidth_gbps);
        many_scenarios |= row.scenario != report.rows.front().scenario;
    }
    double x_lo = std::floor(std::log2(static_cast<double>(min_size)));
    double x_hi = std::ceil(std::log2(static_cast<double>(max_size)));
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    const double y_hi = std::max(20.0, 2.0 * std::ceil(max_bw / 2.0));

    auto px = [&](double bytes) { return left + (std::log2(bytes) - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double gbps) { return top + plot_h - gbps / y_hi * plot_h; };

    using Key = std::tuple<std::string, int, int, int>;  // scenario, direction, channels, model
    std::map<Key, std::vector<std::pair<double, double>>> series;
    for (const auto& row : report.rows) {
        Key key{row.scenario, static_cast<int>(row.direction), row.channels, static_cast<int>(row.model)};
        series[key].emplace_back(static_cast<double>(row.size_bytes), row.bandwidth_gbps);
    }

    std::ostringstream os;
    char buf[256];
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\" "
                  "font-family=\"sans-serif\" font-size=\"12\">\n",
                  width, height, width, height);
    os << buf;
    os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">",
                      left + plot_w / 2);
        os << buf << xml_escape(title) << "</text>\n";
    }

    // Axes and grid.
    os << "<g class=\"axes\" stroke=\"#444\" fill=\"none\">\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\"/>\n", left, top, plot_w,
                  plot_h);
    os << buf << "</g>\n<g class=\"xticks\">\n";
    for (double k = x_lo; k <= x_hi; k += 1.0) {
        const double x = px(std::exp2(k));
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">",
                      x, top, x, top + plot_h, x, top + plot_h + 16);
        os << buf << short_size_label(ByteSize{static_cast<std::uint64_t>(std::exp2(k))}) << "</text>\n";
    }
    os << "</g>\n<g class=\"yticks\">\n";
    for (double g = 0.0; g <= y_hi + 1e-9; g += 2.0) {
        const double y = py(g);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#eee\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.0f</text>\n",
                      left, y, left + plot_w, y, left - 6, y + 4, g);
        os << buf;
    }
    os << "</g>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">transfer size (bytes)</text>\n",
                  left + plot_w / 2, height - 18);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text transform=\"translate(20 %.1f) rotate(-90)\" text-anchor=\"middle\">bandwidth (GB/s)</text>\n",
                  top + plot_h / 2);
    os << buf;

    os << "<g class=\"ceilings\" stroke-dasharray=\"6 4\" stroke=\"#888\">\n";
    for (std::size_t i = 0; i < kCeilings.size(); ++i) {
        const double y = py(kCeilings[i]);
        std::snprintf(buf, sizeof buf,
                      "<line class=\"ceiling\" data-gbps=\"%.1f\" x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" stroke=\"none\" fill=\"#666\" font-size=\"10\">%s</text>\n",
                      kCeilings[i], left, y, left + plot_w, y, left + 4, y - 3, kCeilingNames[i]);
        os << buf;
    }
    os << "</g>\n<g class=\"series\" fill=\"none\" stroke-width=\"1.8\">\n";

    std::size_t index = 0;
    std::ostringstream legend;
    for (auto& [key, pts] : series) {
        std::sort(pts.begin(), pts.end());
        const auto& [scenario, dir, channels, model] = key;
        std::string label = std::string(to_token(static_cast<Direction>(dir))) + " " + std::to_string(channels) +
                            "ch " + std::string(to_token(static_cast<ModelKind>(model)));
        if (many_scenarios) label = scenario + " " + label;
        const char* color = kPalette[index % kPalette.size()];
        const char* dash = static_cast<ModelKind>(model) == ModelKind::Des ? " stroke-dasharray=\"4 2\"" : "";

        os << "<polyline data-series=\"" << xml_escape(label) << "\" stroke=\"" << color << "\"" << dash
           << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(pts[i].first), py(pts[i].second));
            os << buf;
        }
        os << "\"/>\n";

        const double ly = top + 10 + 18.0 * static_cast<double>(index);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"%s/>"
                      "<text x=\"%.1f\" y=\"%.1f\">",
                      left + plot_w + 16, ly, left + plot_w + 40, ly, color, dash, left + plot_w + 46, ly + 4);
        legend << "<g class=\"legend-entry\">" << buf << xml_escape(label) << "</text></g>\n";
        ++index;
    }
    os << "</g>\n<g class=\"legend\">\n" << legend.str() << "</g>\n</svg>\n";
    return os.str();
}

void emit_plot(const SweepReport& report, const std::filesystem::path& path, const std::string& title) {
    const std::string svg = render_svg(report, title);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << svg;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace nicsim
