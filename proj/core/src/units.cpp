#include "nicsim/units.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "nicsim/error.hpp"

namespace nicsim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

bool approx_equal(Bandwidth a, Bandwidth b, double rel_tol) {
    const double scale = std::max(std::abs(a.gbps), std::abs(b.gbps));
    return std::abs(a.gbps - b.gbps) <= rel_tol * scale;
}

ByteSize parse_byte_size(std::string_view text) {
    text = trim(text);
    std::uint64_t value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) {
        throw Error(ErrorCode::ParseError, "not a byte size: '" + std::string(text) + "'");
    }
    std::string_view suffix = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    std::uint64_t scale = 1;
    if (suffix.empty() || suffix == "B") {
        scale = 1;
    } else if (suffix == "K" || suffix == "KiB" || suffix == "k") {
        scale = KiB;
    } else if (suffix == "M" || suffix == "MiB") {
        scale = MiB;
    } else if (suffix == "G" || suffix == "GiB") {
        scale = GiB;
    } else {
        throw Error(ErrorCode::ParseError, "unknown size suffix '" + std::string(suffix) + "'");
    }
    return ByteSize{value * scale};
}

std::vector<ByteSize> parse_size_list(std::string_view text) {
    std::vector<ByteSize> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;

        const auto dots = item.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_byte_size(item));
            continue;
        }
        std::string_view lo_text = item.substr(0, dots);
        std::string_view rest = item.substr(dots + 2);
        std::uint64_t factor = 2;
        if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
            std::string_view step = trim(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
            if (step.size() < 2 || step.front() != 'x') {
                throw Error(ErrorCode::ParseError, "range step must look like 'x2'");
            }
            step.remove_prefix(1);
            auto [p, ec] = std::from_chars(step.data(), step.data() + step.size(), factor);
            if (ec != std::errc{} || p != step.data() + step.size() || factor < 2) {
                throw Error(ErrorCode::ParseError, "range factor must be an integer >= 2");
            }
        }
        const ByteSize lo = parse_byte_size(lo_text);
        const ByteSize hi = parse_byte_size(rest);
        if (lo.bytes == 0 || hi < lo) {
            throw Error(ErrorCode::ParseError, "empty or zero-based size range");
        }
        for (std::uint64_t s = lo.bytes; s <= hi.bytes; s *= factor) {
            out.push_back(ByteSize{s});
            if (s > hi.bytes / factor) break;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string short_size_label(ByteSize size) {
    const std::uint64_t b = size.bytes;
    if (b >= GiB && b % GiB == 0) return std::to_string(b / GiB) + "G";
    if (b >= MiB && b % MiB == 0) return std::to_string(b / MiB) + "M";
    if (b >= KiB && b % KiB == 0) return std::to_string(b / KiB) + "K";
    return std::to_string(b);
}

std::vector<ByteSize> power_of_two_sizes(ByteSize lo, ByteSize hi) {
    std::vector<ByteSize> out;
    std::uint64_t s = 1;
    while (s < lo.bytes) s <<= 1;
    for (; s <= hi.bytes; s <<= 1) out.push_back(ByteSize{s});
    return out;
}

}  // namespace nicsim
