#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ramimo/combining.hpp"
#include "ramimo/scenario.hpp"
#include "ramimo/sweep.hpp"
#include "ramimo/types.hpp"

// Run configuration: a flat, sectioned key=value text format with explicit
// units in key names. Unknown sections or keys are rejected. Every key has a
// default, so a minimal file only states what it changes.

namespace ramimo {

struct RunConfig {
    Scenario scenario;
    SystemParams system;                 // amp_gain/compression come from the grids
    std::vector<double> alpha_grid;
    std::vector<double> rho_grid{0.0, -1e3, -1e4, -1e5};
    int num_realizations = 100;
    std::vector<CombinerFlavor> flavors{CombinerFlavor::da, CombinerFlavor::dua};
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string csv_name = "sweep.csv";
    std::string sidecar_name = "sweep_meta.json";

    RunConfig();
};

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw config_error("log grid needs 0 < lo < hi and at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(n));
    const double step = (std::log10(hi) - std::log10(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + i * step);
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

inline std::vector<double> zero_plus_log_grid(double lo, double hi, int n) {
    std::vector<double> grid{0.0};
    const std::vector<double> tail = log_grid(lo, hi, n);
    grid.insert(grid.end(), tail.begin(), tail.end());
    return grid;
}

inline RunConfig::RunConfig() : alpha_grid(zero_plus_log_grid(1.0, 1e5, 25)) {}

inline std::string flavor_name(CombinerFlavor flavor) {
    return flavor == CombinerFlavor::da ? "DA" : "DuA";
}

inline CombinerFlavor flavor_from_name(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "da") return CombinerFlavor::da;
    if (lower == "dua") return CombinerFlavor::dua;
    throw config_error("unknown combiner flavor '" + name + "' (expected da or dua)");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> tokens;
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

inline double parse_double(const std::string& token, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE)
        throw config_error("key '" + key + "': cannot parse number '" + token + "'");
    return value;
}

inline std::vector<double> parse_doubles(const std::vector<std::string>& tokens,
                                         const std::string& key) {
    std::vector<double> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(parse_double(t, key));
    return out;
}

template <class Int>
Int parse_integer(const std::string& token, const std::string& key) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw config_error("key '" + key + "': cannot parse integer '" + token + "'");
    return value;
}

inline void expect_count(const std::vector<std::string>& tokens, std::size_t count,
                         const std::string& key) {
    if (tokens.size() != count)
        throw config_error("key '" + key + "': expected " + std::to_string(count) +
                           " value(s), got " + std::to_string(tokens.size()));
}

// alpha_grid forms:
//   list of numbers                 ->  0 1 10 100
//   log <lo> <hi> <points>          ->  log-spaced inclusive
//   zero_plus_log <lo> <hi> <points>->  {0} followed by the log grid
inline std::vector<double> parse_alpha_grid(const std::vector<std::string>& tokens,
                                            const std::string& key) {
    if (tokens.empty()) throw config_error("key '" + key + "': empty grid");
    const std::string& head = tokens.front();
    if (head == "list")
        return parse_doubles({tokens.begin() + 1, tokens.end()}, key);
    if (head == "log" || head == "zero_plus_log") {
        expect_count(tokens, 4, key);
        const double lo = parse_double(tokens[1], key);
        const double hi = parse_double(tokens[2], key);
        const int n = parse_integer<int>(tokens[3], key);
        return head == "log" ? log_grid(lo, hi, n) : zero_plus_log_grid(lo, hi, n);
    }
    return parse_doubles(tokens, key);
}

}  // namespace detail

inline void validate_run_config(const RunConfig& config, const std::string& origin);

/// Parses the sectioned key=value format. `origin` is used in messages.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "config") {
    RunConfig config;
    std::optional<double> p_dbm;
    std::optional<double> p_mw;
    double noise_density_dbw_per_hz = -204.0;
    double bandwidth_hz = 1e8;
    double noise_figure_db = 5.0;

    std::set<std::string> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw_line;
    int line_number = 0;
    while (std::getline(in, raw_line)) {
        ++line_number;
        std::string line = raw_line;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error(origin + ":" + std::to_string(line_number) +
                                   ": malformed section header '" + line + "'");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "scenario" && section != "system" && section != "sweep" &&
                section != "output")
                throw config_error(origin + ": unknown section '" + section + "'");
            continue;
        }

        const auto equals = line.find('=');
        if (equals == std::string::npos)
            throw config_error(origin + ":" + std::to_string(line_number) +
                               ": expected key = value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, equals));
        const std::string value = detail::trim(line.substr(equals + 1));
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (!seen.insert(qualified).second)
            throw config_error(origin + ": duplicate key '" + qualified + "'");
        const std::vector<std::string> tokens = detail::split_tokens(value);
        auto one = [&]() {
            detail::expect_count(tokens, 1, qualified);
            return tokens.front();
        };

        if (section.empty()) {
            if (key == "seed") {
                config.seed = detail::parse_integer<std::uint64_t>(one(), qualified);
            } else {
                throw config_error(origin + ": unknown key '" + qualified + "'");
            }
        } else if (section == "scenario") {
            if (key == "bs_position_m") {
                detail::expect_count(tokens, 3, qualified);
                const auto v = detail::parse_doubles(tokens, qualified);
                config.scenario.bs_position = {v[0], v[1], v[2]};
            } else if (key == "repeater_position_m") {
                detail::expect_count(tokens, 3, qualified);
                const auto v = detail::parse_doubles(tokens, qualified);
                config.scenario.repeater_position = {v[0], v[1], v[2]};
            } else if (key == "ue_region_x_m") {
                detail::expect_count(tokens, 2, qualified);
                const auto v = detail::parse_doubles(tokens, qualified);
                config.scenario.ue_region.x_min = v[0];
                config.scenario.ue_region.x_max = v[1];
            } else if (key == "ue_region_y_m") {
                detail::expect_count(tokens, 2, qualified);
                const auto v = detail::parse_doubles(tokens, qualified);
                config.scenario.ue_region.y_min = v[0];
                config.scenario.ue_region.y_max = v[1];
            } else if (key == "ue_height_m") {
                config.scenario.ue_height = detail::parse_double(one(), qualified);
            } else if (key == "pathloss_offset_db") {
                config.scenario.pathloss_offset_db = detail::parse_double(one(), qualified);
            } else if (key == "pathloss_exponent_db_per_decade") {
                config.scenario.pathloss_exponent_db_per_decade =
                    detail::parse_double(one(), qualified);
            } else {
                throw config_error(origin + ": unknown key '" + qualified + "'");
            }
        } else if (section == "system") {
            if (key == "num_bs_antennas") {
                config.system.num_bs_antennas = detail::parse_integer<int>(one(), qualified);
            } else if (key == "num_ues") {
                config.system.num_ues = detail::parse_integer<int>(one(), qualified);
            } else if (key == "p_dbm") {
                p_dbm = detail::parse_double(one(), qualified);
            } else if (key == "p_mw") {
                p_mw = detail::parse_double(one(), qualified);
            } else if (key == "bandwidth_hz") {
                bandwidth_hz = detail::parse_double(one(), qualified);
            } else if (key == "noise_density_dbw_per_hz") {
                noise_density_dbw_per_hz = detail::parse_double(one(), qualified);
            } else if (key == "noise_figure_db") {
                noise_figure_db = detail::parse_double(one(), qualified);
            } else {
                throw config_error(origin + ": unknown key '" + qualified + "'");
            }
        } else if (section == "sweep") {
            if (key == "alpha_grid") {
                config.alpha_grid = detail::parse_alpha_grid(tokens, qualified);
            } else if (key == "rho_grid") {
                config.rho_grid = detail::parse_doubles(tokens, qualified);
            } else if (key == "num_realizations") {
                config.num_realizations = detail::parse_integer<int>(one(), qualified);
            } else if (key == "flavors") {
                if (tokens.empty()) throw config_error(origin + ": key '" + qualified + "': empty");
                config.flavors.clear();
                for (const auto& t : tokens) config.flavors.push_back(flavor_from_name(t));
            } else {
                throw config_error(origin + ": unknown key '" + qualified + "'");
            }
        } else {  // output
            if (key == "out_dir") {
                config.out_dir = value;
            } else if (key == "csv_name") {
                config.csv_name = value;
            } else if (key == "sidecar_name") {
                config.sidecar_name = value;
            } else {
                throw config_error(origin + ": unknown key '" + qualified + "'");
            }
        }
    }

    if (p_dbm && p_mw)
        throw config_error(origin + ": specify exactly one of 'system.p_dbm' and 'system.p_mw'");
    if (p_dbm) config.system.ue_power_w = dbm_to_watts(*p_dbm);
    if (p_mw) config.system.ue_power_w = *p_mw * 1e-3;
    if (bandwidth_hz <= 0.0)
        throw config_error(origin + ": key 'system.bandwidth_hz' must be > 0");
    config.system.repeater_noise_var_w =
        noise_variance_watts(noise_density_dbw_per_hz, bandwidth_hz, noise_figure_db);
    config.system.bs_noise_var_w = config.system.repeater_noise_var_w;

    validate_run_config(config, origin);
    return config;
}

inline void validate_run_config(const RunConfig& config, const std::string& origin) {
    auto fail = [&](const std::string& key, const std::string& what) {
        throw config_error(origin + ": key '" + key + "': " + what);
    };
    if (config.system.num_bs_antennas < 1) fail("system.num_bs_antennas", "must be >= 1");
    if (config.system.num_ues < 1) fail("system.num_ues", "must be >= 1");
    if (!(config.system.ue_power_w > 0.0)) fail("system.p_mw", "UE power must be > 0");
    if (!(config.scenario.ue_region.area() > 0.0))
        fail("scenario.ue_region_x_m", "UE region must have positive area");
    if (config.scenario.ue_height < 0.0) fail("scenario.ue_height_m", "must be >= 0");
    if (config.alpha_grid.empty()) fail("sweep.alpha_grid", "must be non-empty");
    for (double a : config.alpha_grid)
        if (!(a >= 0.0)) fail("sweep.alpha_grid", "values must be >= 0");
    if (config.rho_grid.empty()) fail("sweep.rho_grid", "must be non-empty");
    for (double r : config.rho_grid)
        if (!(r <= 0.0)) fail("sweep.rho_grid", "values must be <= 0");
    if (config.num_realizations < 1) fail("sweep.num_realizations", "must be >= 1");
    if (config.flavors.empty()) fail("sweep.flavors", "must be non-empty");
    if (config.out_dir.empty()) fail("output.out_dir", "must be non-empty");
    if (config.csv_name.empty()) fail("output.csv_name", "must be non-empty");
    if (config.sidecar_name.empty()) fail("output.sidecar_name", "must be non-empty");
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

inline SweepSpec to_sweep_spec(const RunConfig& config, int num_threads = 0) {
    SweepSpec spec;
    spec.alpha_grid = config.alpha_grid;
    spec.rho_grid = config.rho_grid;
    spec.num_realizations = config.num_realizations;
    spec.scenario = config.scenario;
    spec.base_params = config.system;
    spec.flavors = config.flavors;
    spec.master_seed = config.seed;
    spec.num_threads = num_threads;
    return spec;
}

}  // namespace ramimo
