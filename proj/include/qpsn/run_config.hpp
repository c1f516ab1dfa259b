#pragma once

// Run configuration shared by the CLI subcommands. A config file is plain
// text, one `key = value` per line, `#` starts a comment. Every key can also
// be given on the command line as `--key-with-hyphens value`; flags win.
//
// Lists are comma separated (`0,1,2,3`) or an inclusive range
// `start:stop:step` (`0:550:10`). Durations are nanoseconds; `inf` is accepted
// for T1/T2.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpsn/entdist.hpp"
#include "qpsn/qkd_model.hpp"

namespace qpsn::cli {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out;
    std::int64_t trials = 100'000;

    // BB84 key rate: length and switch count come from the grids below.
    qkd::QkdParams qkd;
    std::vector<double> qkd_lengths;  // km
    std::vector<int> n_list{0, 1, 2, 3};

    // Entanglement distribution.
    ent::EntParams ent;
    std::vector<double> lengths;      // km
    std::vector<int> hops_list{0, 1, 2, 3};
    std::vector<double> t_grid;       // ns, T1 = T2
    std::vector<sim::Nanos> proc_grid;
    int hops = 3;                     // relays for the T and processing-time sweeps
    int compare_hops = 1;             // relays for the scenario comparison
    double hop_km = 20.0;

    RunConfig();
};

struct KeyInfo {
    std::string key;
    std::string help;
};

/// Every recognized key, in documentation order.
const std::vector<KeyInfo>& config_keys();

/// "eta_det" -> "--eta-det"
std::string flag_for(const std::string& key);

/// Throws ConfigError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies every `key = value` line; errors name the line number.
void apply_config_stream(RunConfig& config, std::istream& in, const std::string& origin = "<config>");
void apply_config_file(RunConfig& config, const std::string& path);

std::vector<double> parse_double_list(const std::string& text);
std::vector<std::int64_t> parse_int_list(const std::string& text);

}  // namespace qpsn::cli
