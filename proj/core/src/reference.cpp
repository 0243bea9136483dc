#include "nicsim/reference.hpp"

#include <algorithm>
#include <cstdio>

#include "nicsim/error.hpp"

namespace nicsim {

ReferencePoint reference_value(std::string scenario, Direction d, int channels, std::optional<ByteSize> size,
                               double gbps, std::string label) {
    return reference_range(std::move(scenario), d, channels, size, gbps, gbps, std::move(label));
}

ReferencePoint reference_range(std::string scenario, Direction d, int channels, std::optional<ByteSize> size,
                               double low_gbps, double high_gbps, std::string label) {
    if (!(low_gbps > 0.0) || low_gbps > high_gbps) {
        throw Error(ErrorCode::InvalidConfig, "reference needs 0 < low <= high");
    }
    return ReferencePoint{std::move(scenario), d,        channels, size, Bandwidth{low_gbps}, Bandwidth{high_gbps},
                          std::move(label)};
}

ReferenceSet ReferenceSet::for_scenario(std::string_view name) const {
    ReferenceSet out;
    std::copy_if(points.begin(), points.end(), std::back_inserter(out.points),
                 [&](const ReferencePoint& p) { return p.scenario == name; });
    return out;
}

ReferenceSet published_references() {
    constexpr auto h2c = Direction::HostToCard;
    constexpr auto c2h = Direction::CardToHost;
    const std::optional<ByteSize> peak;
    const std::optional<ByteSize> one_mib = ByteSize{MiB};

    ReferenceSet refs;
    refs.points = {
        reference_value("bram-xdma", h2c, 1, one_mib, 7.54, "BRAM H2C single channel at 1 MiB"),
        reference_value("bram-xdma", c2h, 1, one_mib, 7.77, "BRAM C2H single channel at 1 MiB"),

        reference_value("ddr-xdma", h2c, 1, peak, 10.8, "DDR H2C single-channel peak"),
        reference_value("ddr-xdma", c2h, 1, peak, 12.0, "DDR C2H single-channel peak"),
        reference_range("ddr-xdma", c2h, 4, peak, 13.0, 14.0, "DDR C2H interleaved peak"),
        reference_range("ddr-xdma", h2c, 4, peak, 9.0, 10.0, "DDR H2C multi-channel saturation"),

        reference_value("ddr-microblaze", h2c, 1, peak, 9.5, "MicroBlaze H2C single-channel peak"),
        reference_value("ddr-microblaze", c2h, 1, peak, 9.4, "MicroBlaze C2H single-channel peak"),
        reference_range("ddr-microblaze", c2h, 4, peak, 13.0, 14.0, "MicroBlaze C2H aggregated peak"),

        reference_value("ddr-petalinux", h2c, 1, peak, 9.2, "PetaLinux H2C single-channel peak"),
        reference_range("ddr-petalinux", c2h, 3, peak, 12.0, 13.0, "PetaLinux C2H three-channel roof"),
        reference_range("ddr-petalinux", c2h, 4, peak, 12.0, 13.0, "PetaLinux C2H four-channel roof"),
        reference_range("ddr-petalinux", c2h, 2, peak, 10.5, 12.0, "PetaLinux C2H two-channel band"),
    };
    return refs;
}

double interval_distance(Bandwidth value, const ReferencePoint& ref) {
    if (value.gbps < ref.bw_low.gbps) return (ref.bw_low.gbps - value.gbps) / ref.bw_low.gbps;
    if (value.gbps > ref.bw_high.gbps) return (value.gbps - ref.bw_high.gbps) / ref.bw_high.gbps;
    return 0.0;
}

bool within_tolerance(Bandwidth value, const ReferencePoint& ref, double tolerance) {
    return value.gbps >= ref.bw_low.gbps * (1.0 - tolerance) && value.gbps <= ref.bw_high.gbps * (1.0 + tolerance);
}

std::string describe(const ReferencePoint& ref) {
    char buf[160];
    const std::string where = ref.size ? "@" + short_size_label(*ref.size) : std::string("peak");
    if (ref.is_interval()) {
        std::snprintf(buf, sizeof buf, "%s %s %dch %s [%.2f, %.2f] GB/s", ref.scenario.c_str(),
                      std::string(to_token(ref.direction)).c_str(), ref.channels, where.c_str(), ref.bw_low.gbps,
                      ref.bw_high.gbps);
    } else {
        std::snprintf(buf, sizeof buf, "%s %s %dch %s %.2f GB/s", ref.scenario.c_str(),
                      std::string(to_token(ref.direction)).c_str(), ref.channels, where.c_str(), ref.bw_low.gbps);
    }
    return buf;
}

}  // namespace nicsim
