#include "nicsim/config_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nicsim/error.hpp"

namespace nicsim {

namespace toml {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool is_bare_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-';
        if (!ok) return false;
    }
    return true;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

/// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

Value parse_value(std::string_view text, std::size_t line) {
    if (text.empty()) fail(line, "missing value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') fail(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            if (text[i] == '\\' && i + 2 < text.size()) {
                const char esc = text[++i];
                out.push_back(esc == 'n' ? '\n' : esc == 't' ? '\t' : esc);
            } else {
                out.push_back(text[i]);
            }
        }
        return out;
    }
    if (text == "true") return true;
    if (text == "false") return false;

    std::string digits;
    for (char c : text) {
        if (c != '_') digits.push_back(c);
    }
    const bool looks_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                             digits == "nan" || digits == "+inf" || digits == "-inf";
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (!digits.empty() && digits.front() == '+') ++first;
    if (looks_float) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || p != last) fail(line, "bad float '" + std::string(text) + "'");
        return v;
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) fail(line, "bad value '" + std::string(text) + "'");
    return v;
}

}  // namespace

Document parse(std::string_view text) {
    Document doc;
    doc.tables[""];
    std::string current;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "malformed table header");
            std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!is_bare_key(name)) fail(line_no, "unsupported table name '" + std::string(name) + "'");
            current = std::string(name);
            if (doc.tables.count(current) && !doc.tables[current].empty()) {
                fail(line_no, "duplicate table [" + current + "]");
            }
            doc.tables[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        if (!is_bare_key(key)) fail(line_no, "unsupported key '" + std::string(key) + "'");
        auto& table = doc.tables[current];
        if (table.count(std::string(key))) fail(line_no, "duplicate key '" + std::string(key) + "'");
        table.emplace(std::string(key), parse_value(trim(line.substr(eq + 1)), line_no));
    }
    return doc;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string out(buf, p);
    if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
    return out;
}

std::string format_value(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(x);
            } else {
                std::string out = "\"";
                for (char c : x) {
                    if (c == '"' || c == '\\') out.push_back('\\');
                    out.push_back(c);
                }
                return out + "\"";
            }
        },
        v);
}

}  // namespace toml

namespace {

/// Typed, consumption-tracking view of one table.
class TableReader {
public:
    TableReader(const std::map<std::string, toml::Value>& table, std::string name)
        : table_(table), name_(std::move(name)) {}

    template <typename Fn>
    void with(const char* key, Fn&& fn) {
        auto it = table_.find(key);
        if (it == table_.end()) return;
        used_.insert(key);
        fn(it->second, qualified(key));
    }

    void real(const char* key, double& out) {
        with(key, [&](const toml::Value& v, const std::string& k) {
            if (const auto* d = std::get_if<double>(&v)) {
                out = *d;
            } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
                out = static_cast<double>(*i);
            } else {
                throw Error(ErrorCode::ParseError, k + " must be a number");
            }
        });
    }

    void rate(const char* key, Bandwidth& out) { real(key, out.gbps); }

    void rate(const char* key, std::optional<Bandwidth>& out) {
        double v = 0.0;
        bool seen = false;
        with(key, [&](const toml::Value&, const std::string&) { seen = true; });
        if (!seen) return;
        real(key, v);
        out = Bandwidth{v};
    }

    void nanos(const char* key, Nanoseconds& out) {
        double v = out.count();
        real(key, v);
        out = Nanoseconds{v};
    }

    template <typename Int>
    void integer(const char* key, Int& out) {
        with(key, [&](const toml::Value& v, const std::string& k) {
            const auto* i = std::get_if<std::int64_t>(&v);
            if (i == nullptr || *i < 0) throw Error(ErrorCode::ParseError, k + " must be a non-negative integer");
            out = static_cast<Int>(*i);
        });
    }

    void bytes(const char* key, ByteSize& out) { integer(key, out.bytes); }

    void boolean(const char* key, bool& out) {
        with(key, [&](const toml::Value& v, const std::string& k) {
            const auto* b = std::get_if<bool>(&v);
            if (b == nullptr) throw Error(ErrorCode::ParseError, k + " must be true or false");
            out = *b;
        });
    }

    void text(const char* key, std::string& out) {
        with(key, [&](const toml::Value& v, const std::string& k) {
            const auto* s = std::get_if<std::string>(&v);
            if (s == nullptr) throw Error(ErrorCode::ParseError, k + " must be a string");
            out = *s;
        });
    }

    bool has(const char* key) const { return table_.count(key) != 0; }

    void reject_unknown() const {
        for (const auto& [key, _] : table_) {
            if (!used_.count(key)) throw Error(ErrorCode::ParseError, "unknown key " + qualified(key));
        }
    }

private:
    std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    const std::map<std::string, toml::Value>& table_;
    std::string name_;
    std::set<std::string> used_;
};

void emit(std::ostringstream& os, const char* key, const toml::Value& v) {
    os << key << " = " << toml::format_value(v) << '\n';
}

void emit_rate(std::ostringstream& os, const char* key, Bandwidth bw) { emit(os, key, bw.gbps); }
void emit_nanos(std::ostringstream& os, const char* key, Nanoseconds t) { emit(os, key, t.count()); }
void emit_int(std::ostringstream& os, const char* key, std::uint64_t v) {
    emit(os, key, static_cast<std::int64_t>(v));
}

}  // namespace

ScenarioConfig scenario_from_toml(std::string_view text) {
    const toml::Document doc = toml::parse(text);
    for (const auto& [name, _] : doc.tables) {
        if (name != "" && name != "link" && name != "fabric" && name != "endpoint" && name != "dma" && name != "rdma") {
            throw Error(ErrorCode::ParseError, "unknown table [" + name + "]");
        }
    }
    const auto table = [&](const std::string& name) -> const std::map<std::string, toml::Value>& {
        static const std::map<std::string, toml::Value> empty;
        auto it = doc.tables.find(name);
        return it == doc.tables.end() ? empty : it->second;
    };

    ScenarioConfig cfg;
    TableReader root(table(""), "");
    if (!root.has("name") || !root.has("engine")) {
        throw Error(ErrorCode::ParseError, "scenario file needs 'name' and 'engine'");
    }
    root.text("name", cfg.name);
    std::string token;
    root.text("engine", token);
    cfg.engine = parse_engine(token);
    token = std::string(to_token(cfg.mode));
    root.text("mode", token);
    cfg.mode = parse_mode(token);
    root.reject_unknown();

    TableReader link(table("link"), "link");
    link.integer("lanes", cfg.link.lanes);
    link.rate("per_lane_gbps", cfg.link.per_lane);
    link.rate("effective_cap_gbps", cfg.link.effective_cap);
    link.integer("max_payload_bytes", cfg.link.max_payload_bytes);
    link.integer("tlp_header_bytes", cfg.link.tlp_header_bytes);
    link.integer("tlp_framing_bytes", cfg.link.tlp_framing_bytes);
    link.reject_unknown();

    TableReader fabric(table("fabric"), "fabric");
    fabric.rate("cap_gbps", cfg.fabric.cap);
    fabric.boolean("contending_master", cfg.fabric.contending_master);
    fabric.real("contention_factor_h2c", cfg.fabric.contention_factor_h2c);
    fabric.real("contention_factor_c2h", cfg.fabric.contention_factor_c2h);
    fabric.reject_unknown();

    TableReader ep(table("endpoint"), "endpoint");
    token = std::string(to_token(cfg.endpoint.kind));
    ep.text("kind", token);
    cfg.endpoint.kind = parse_memory_kind(token);
    ep.bytes("capacity_bytes", cfg.endpoint.capacity);
    ep.rate("peak_gbps", cfg.endpoint.peak_bw);
    ep.nanos("access_latency_ns", cfg.endpoint.access_latency);
    ep.integer("burst_bytes", cfg.endpoint.burst_bytes);
    ep.reject_unknown();

    const bool has_dma = doc.tables.count("dma") != 0;
    const bool has_rdma = doc.tables.count("rdma") != 0;
    if (has_dma == has_rdma) {
        throw Error(ErrorCode::ParseError, "scenario file needs exactly one of [dma] or [rdma]");
    }
    if (has_dma) {
        DmaEngineConfig dma;
        TableReader t(table("dma"), "dma");
        t.integer("max_channels", dma.max_channels);
        t.rate("per_channel_cap_h2c_gbps", dma.per_channel_cap_h2c);
        t.rate("per_channel_cap_c2h_gbps", dma.per_channel_cap_c2h);
        t.rate("aggregate_cap_h2c_gbps", dma.aggregate_cap_h2c);
        t.rate("aggregate_cap_c2h_gbps", dma.aggregate_cap_c2h);
        t.bytes("descriptor_granularity_bytes", dma.descriptor_granularity);
        t.nanos("descriptor_overhead_ns", dma.descriptor_overhead);
        t.nanos("setup_overhead_polled_ns", dma.setup_overhead.polled);
        t.nanos("setup_overhead_msix_ns", dma.setup_overhead.msix);
        t.nanos("queue_overhead_ns", dma.queue_overhead);
        t.reject_unknown();
        cfg.engine_params = dma;
    } else {
        RdmaConfig rdma;
        TableReader t(table("rdma"), "rdma");
        t.real("link_gbps", rdma.link_gbps);
        t.integer("mtu_bytes", rdma.mtu_bytes);
        t.integer("packet_overhead_bytes", rdma.packet_overhead_bytes);
        t.nanos("verb_setup_read_ns", rdma.verb_setup_read);
        t.nanos("verb_setup_write_ns", rdma.verb_setup_write);
        t.nanos("round_trip_ns", rdma.round_trip);
        t.rate("host_memory_gbps", rdma.host_memory_bw);
        t.reject_unknown();
        cfg.engine_params = rdma;
    }
    return cfg;
}

std::string scenario_to_toml(const ScenarioConfig& cfg) {
    std::ostringstream os;
    emit(os, "name", cfg.name);
    emit(os, "engine", std::string(to_token(cfg.engine)));
    emit(os, "mode", std::string(to_token(cfg.mode)));

    os << "\n[link]\n";
    emit_int(os, "lanes", static_cast<std::uint64_t>(cfg.link.lanes));
    emit_rate(os, "per_lane_gbps", cfg.link.per_lane);
    emit_rate(os, "effective_cap_gbps", cfg.link.effective_cap);
    emit_int(os, "max_payload_bytes", cfg.link.max_payload_bytes);
    emit_int(os, "tlp_header_bytes", cfg.link.tlp_header_bytes);
    emit_int(os, "tlp_framing_bytes", cfg.link.tlp_framing_bytes);

    os << "\n[fabric]\n";
    emit_rate(os, "cap_gbps", cfg.fabric.cap);
    emit(os, "contending_master", cfg.fabric.contending_master);
    emit(os, "contention_factor_h2c", cfg.fabric.contention_factor_h2c);
    emit(os, "contention_factor_c2h", cfg.fabric.contention_factor_c2h);

    os << "\n[endpoint]\n";
    emit(os, "kind", std::string(to_token(cfg.endpoint.kind)));
    emit_int(os, "capacity_bytes", cfg.endpoint.capacity.bytes);
    emit_rate(os, "peak_gbps", cfg.endpoint.peak_bw);
    emit_nanos(os, "access_latency_ns", cfg.endpoint.access_latency);
    emit_int(os, "burst_bytes", cfg.endpoint.burst_bytes);

    if (const auto* dma = std::get_if<DmaEngineConfig>(&cfg.engine_params)) {
        os << "\n[dma]\n";
        emit_int(os, "max_channels", static_cast<std::uint64_t>(dma->max_channels));
        emit_rate(os, "per_channel_cap_h2c_gbps", dma->per_channel_cap_h2c);
        emit_rate(os, "per_channel_cap_c2h_gbps", dma->per_channel_cap_c2h);
        if (dma->aggregate_cap_h2c) emit_rate(os, "aggregate_cap_h2c_gbps", *dma->aggregate_cap_h2c);
        if (dma->aggregate_cap_c2h) emit_rate(os, "aggregate_cap_c2h_gbps", *dma->aggregate_cap_c2h);
        emit_int(os, "descriptor_granularity_bytes", dma->descriptor_granularity.bytes);
        emit_nanos(os, "descriptor_overhead_ns", dma->descriptor_overhead);
        emit_nanos(os, "setup_overhead_polled_ns", dma->setup_overhead.polled);
        emit_nanos(os, "setup_overhead_msix_ns", dma->setup_overhead.msix);
        emit_nanos(os, "queue_overhead_ns", dma->queue_overhead);
    } else {
        const auto& rdma = std::get<RdmaConfig>(cfg.engine_params);
        os << "\n[rdma]\n";
        emit(os, "link_gbps", rdma.link_gbps);
        emit_int(os, "mtu_bytes", rdma.mtu_bytes);
        emit_int(os, "packet_overhead_bytes", rdma.packet_overhead_bytes);
        emit_nanos(os, "verb_setup_read_ns", rdma.verb_setup_read);
        emit_nanos(os, "verb_setup_write_ns", rdma.verb_setup_write);
        emit_nanos(os, "round_trip_ns", rdma.round_trip);
        emit_rate(os, "host_memory_gbps", rdma.host_memory_bw);
    }
    return os.str();
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_toml(buf.str());
}

void save_scenario_file(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << scenario_to_toml(cfg);
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace nicsim
