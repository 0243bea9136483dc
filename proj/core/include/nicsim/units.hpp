#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nicsim {

/// Byte count. Sizes are binary (KiB/MiB); rates are decimal GB/s.
struct ByteSize {
    std::uint64_t bytes = 0;

    constexpr auto operator<=>(const ByteSize&) const = default;
};

constexpr ByteSize operator+(ByteSize a, ByteSize b) { return {a.bytes + b.bytes}; }

inline constexpr std::uint64_t KiB = 1024;
inline constexpr std::uint64_t MiB = 1024 * KiB;
inline constexpr std::uint64_t GiB = 1024 * MiB;

/// Decimal gigabytes per second. 1 GB/s moves exactly one byte per nanosecond,
/// which is why the timing code divides bytes by gbps to get nanoseconds.
struct Bandwidth {
    double gbps = 0.0;

    constexpr auto operator<=>(const Bandwidth&) const = default;
};

/// Relative comparison used for rate equality (tolerance 1e-9).
bool approx_equal(Bandwidth a, Bandwidth b, double rel_tol = 1e-9);

constexpr Bandwidth min(Bandwidth a, Bandwidth b) { return a.gbps <= b.gbps ? a : b; }

using Nanoseconds = std::chrono::duration<double, std::nano>;
using Microseconds = std::chrono::duration<double, std::micro>;

/// Time to move `bytes` at `rate`.
constexpr Nanoseconds transfer_time(double bytes, Bandwidth rate) {
    return Nanoseconds{bytes / rate.gbps};
}

/// Rate that moves `bytes` in `elapsed`.
constexpr Bandwidth achieved_rate(ByteSize size, Nanoseconds elapsed) {
    return Bandwidth{static_cast<double>(size.bytes) / elapsed.count()};
}

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Parses "4096", "4K", "4KiB", "1M", "1MiB", "2G", "2GiB" (all suffixes binary).
ByteSize parse_byte_size(std::string_view text);

/// Parses a size list: comma separated values and/or geometric ranges
/// "64..1MiB:x2" (factor defaults to 2). Result is ascending and deduplicated.
std::vector<ByteSize> parse_size_list(std::string_view text);

/// Compact axis label: 64, 512, 1K, 64K, 1M, 2G. Non-multiples keep raw bytes.
std::string short_size_label(ByteSize size);

/// Powers of two from `lo` to `hi` inclusive (both rounded to powers of two).
std::vector<ByteSize> power_of_two_sizes(ByteSize lo, ByteSize hi);

}  // namespace nicsim
