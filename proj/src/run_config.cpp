#include "qpsn/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace qpsn::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw)
{
    const std::string text = trim(raw);
    if (text == "inf" || text == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw ConfigError("trailing characters in number '" + text + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("not a number: '" + text + "'");
    }
}

std::int64_t parse_int(const std::string& raw)
{
    const std::string text = trim(raw);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        // Accept integral values written in floating notation, e.g. 1.25e5.
        const double d = parse_double(text);
        if (!std::isfinite(d) || d != std::floor(d) || std::abs(d) > 9.0e18) {
            throw ConfigError("not an integer: '" + text + "'");
        }
        return static_cast<std::int64_t>(d);
    }
    return v;
}

template <typename T>
std::vector<T> to_vector(const std::vector<std::int64_t>& v)
{
    std::vector<T> out;
    for (auto x : v) {
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
            throw ConfigError("list entry out of range");
        }
        out.push_back(static_cast<T>(x));
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct Entry {
    KeyInfo info;
    Setter set;
};

const std::vector<Entry>& registry()
{
    static const std::vector<Entry> entries = {
        {{"seed", "random seed (Monte-Carlo and any stochastic switching)"},
         [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v)); }},
        {{"out", "output CSV path (stdout when empty)"}, [](RunConfig& c, const std::string& v) { c.out = trim(v); }},
        {{"trials", "Monte-Carlo frames for mc-k"},
         [](RunConfig& c, const std::string& v) { c.trials = parse_int(v); }},

        {{"alpha_db_per_km", "fiber attenuation, dB/km"},
         [](RunConfig& c, const std::string& v) { c.qkd.alpha_db_per_km = parse_double(v); }},
        {{"eta_det", "detector efficiency"}, [](RunConfig& c, const std::string& v) { c.qkd.eta_det = parse_double(v); }},
        {{"p_dark", "dark-count probability per gate"},
         [](RunConfig& c, const std::string& v) { c.qkd.p_dark = parse_double(v); }},
        {{"f_ec", "error-correction inefficiency f"}, [](RunConfig& c, const std::string& v) { c.qkd.f = parse_double(v); }},
        {{"e_d", "misalignment error"}, [](RunConfig& c, const std::string& v) { c.qkd.e_d = parse_double(v); }},
        {{"availability", "probability P that a switch's outgoing channel is free"},
         [](RunConfig& c, const std::string& v) { c.qkd.P = parse_double(v); }},
        {{"tq_over_tp", "payload duration over header processing time"},
         [](RunConfig& c, const std::string& v) { c.qkd.tq_over_tp = parse_double(v); }},
        {{"switches", "intermediate switch count n (mc-k)"},
         [](RunConfig& c, const std::string& v) { c.qkd.n = static_cast<int>(parse_int(v)); }},
        {{"qkd_lengths", "key-rate length grid, km"},
         [](RunConfig& c, const std::string& v) { c.qkd_lengths = parse_double_list(v); }},
        {{"n_list", "switch counts for qkd-sweep"},
         [](RunConfig& c, const std::string& v) { c.n_list = to_vector<int>(parse_int_list(v)); }},

        {{"total_length", "end-to-end length for a single entdist run, km"},
         [](RunConfig& c, const std::string& v) { c.ent.total_length_km = parse_double(v); }},
        {{"t1_ns", "memory relaxation time T1, ns"},
         [](RunConfig& c, const std::string& v) { c.ent.T1_ns = parse_double(v); }},
        {{"t2_ns", "memory dephasing time T2, ns"},
         [](RunConfig& c, const std::string& v) { c.ent.T2_ns = parse_double(v); }},
        {{"processing_time", "header processing time per relay, ns"},
         [](RunConfig& c, const std::string& v) { c.ent.processing_time = parse_int(v); }},
        {{"emission_period", "time between emitted pairs, ns"},
         [](RunConfig& c, const std::string& v) { c.ent.emission_period = parse_int(v); }},
        {{"qubits_per_frame", "pairs per frame"},
         [](RunConfig& c, const std::string& v) { c.ent.qubits_per_frame = static_cast<int>(parse_int(v)); }},
        {{"p_per_km", "fiber depolarization coefficient p_L, per km"},
         [](RunConfig& c, const std::string& v) { c.ent.p_per_km = parse_double(v); }},
        {{"lengths", "entdist length grid, km"},
         [](RunConfig& c, const std::string& v) { c.lengths = parse_double_list(v); }},
        {{"hops_list", "relay counts for the length-hops sweep"},
         [](RunConfig& c, const std::string& v) { c.hops_list = to_vector<int>(parse_int_list(v)); }},
        {{"t_grid", "T1 = T2 grid, ns"}, [](RunConfig& c, const std::string& v) { c.t_grid = parse_double_list(v); }},
        {{"proc_grid", "processing-time grid, ns"},
         [](RunConfig& c, const std::string& v) { c.proc_grid = parse_int_list(v); }},
        {{"hops", "relays per arm for the T and processing-time sweeps and single runs"},
         [](RunConfig& c, const std::string& v) { c.hops = static_cast<int>(parse_int(v)); }},
        {{"compare_hops", "relays used by the scenario comparison"},
         [](RunConfig& c, const std::string& v) { c.compare_hops = static_cast<int>(parse_int(v)); }},
        {{"hop_km", "fiber per hop for the processing-time sweep, km"},
         [](RunConfig& c, const std::string& v) { c.hop_km = parse_double(v); }},
    };
    return entries;
}

}  // namespace

RunConfig::RunConfig()
{
    for (int L = 0; L <= 200; L += 10) qkd_lengths.push_back(L);
    for (int L = 0; L <= 550; L += 10) lengths.push_back(L);
    for (int e = 8; e <= 18; ++e) t_grid.push_back(std::pow(10.0, e / 2.0));  // 1e4 .. 1e9
    proc_grid = {0, 10'000, 25'000, 50'000, 75'000, 100'000, 125'000, 150'000, 200'000};
}

const std::vector<KeyInfo>& config_keys()
{
    static const std::vector<KeyInfo> keys = [] {
        std::vector<KeyInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return keys;
}

std::string flag_for(const std::string& key)
{
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return flag;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value)
{
    for (const auto& e : registry()) {
        if (e.info.key == key) {
            try {
                e.set(config, value);
            } catch (const ConfigError& err) {
                throw ConfigError(key + ": " + err.what());
            }
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config_stream(RunConfig& config, std::istream& in, const std::string& origin)
{
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        try {
            apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& err) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": " + err.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    apply_config_stream(config, in, path);
}

std::vector<double> parse_double_list(const std::string& raw)
{
    const std::string text = trim(raw);
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw ConfigError("range must be start:stop:step with step > 0 and stop >= start");
        }
        const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) out.push_back(parse_double(item));
    }
    if (out.empty()) {
        throw ConfigError("empty list");
    }
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& raw)
{
    std::vector<std::int64_t> out;
    for (double v : parse_double_list(raw)) {
        if (!std::isfinite(v) || v != std::floor(v)) {
            throw ConfigError("list entries must be integers");
        }
        out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
}

}  // namespace qpsn::cli
