#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ramimo/bussgang.hpp"
#include "ramimo/combining.hpp"
#include "ramimo/config.hpp"
#include "ramimo/sweep.hpp"

namespace ramimo {

/// Locale-independent decimal formatting with `digits` significant digits.
inline std::string format_significant(double value, int digits = 12) {
    if (value == 0.0) return "0";  // also normalizes -0
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                      std::chars_format::general, digits);
    return std::string(buffer, result.ptr);
}

/// CSV of a sweep result. Columns: alpha, rho, flavor,
/// mean_sum_se_bits_per_hz, std_sum_se, num_realizations; one row per grid
/// cell, rows sorted by (rho, flavor, alpha); 12 significant digits.
inline std::string sweep_result_csv(const SweepResult& result) {
    std::string out = "alpha,rho,flavor,mean_sum_se_bits_per_hz,std_sum_se,num_realizations\n";
    for (const SweepCell& cell : result.cells) {
        out += format_significant(cell.alpha);
        out += ',';
        out += format_significant(cell.rho);
        out += ',';
        out += flavor_name(cell.flavor);
        out += ',';
        out += format_significant(cell.mean_sum_se);
        out += ',';
        out += format_significant(cell.std_sum_se);
        out += ',';
        out += std::to_string(result.num_realizations);
        out += '\n';
    }
    return out;
}

inline nlohmann::json complex_to_json(const cxd& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}

inline nlohmann::json vector_to_json(const CVec& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
    return out;
}

inline nlohmann::json matrix_to_json(const CMat& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        out.push_back(row);
    }
    return out;
}

inline nlohmann::json channels_to_json(const ChannelRealization& channels) {
    nlohmann::json positions = nlohmann::json::array();
    for (const Vec3& p : channels.ue_positions)
        positions.push_back(nlohmann::json::array({p.x, p.y, p.z}));
    return {{"ue_repeater", vector_to_json(channels.ue_repeater)},
            {"repeater_bs", vector_to_json(channels.repeater_bs)},
            {"ue_bs", matrix_to_json(channels.ue_bs)},
            {"ue_positions", positions}};
}

inline nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json flavors = nlohmann::json::array();
    for (CombinerFlavor f : config.flavors) flavors.push_back(flavor_name(f));
    return {
        {"seed", config.seed},
        {"scenario",
         {{"bs_position_m",
           {config.scenario.bs_position.x, config.scenario.bs_position.y,
            config.scenario.bs_position.z}},
          {"repeater_position_m",
           {config.scenario.repeater_position.x, config.scenario.repeater_position.y,
            config.scenario.repeater_position.z}},
          {"ue_region_x_m", {config.scenario.ue_region.x_min, config.scenario.ue_region.x_max}},
          {"ue_region_y_m", {config.scenario.ue_region.y_min, config.scenario.ue_region.y_max}},
          {"ue_height_m", config.scenario.ue_height},
          {"pathloss_offset_db", config.scenario.pathloss_offset_db},
          {"pathloss_exponent_db_per_decade", config.scenario.pathloss_exponent_db_per_decade}}},
        {"system",
         {{"num_bs_antennas", config.system.num_bs_antennas},
          {"num_ues", config.system.num_ues},
          {"ue_power_w", config.system.ue_power_w},
          {"repeater_noise_var_w", config.system.repeater_noise_var_w},
          {"bs_noise_var_w", config.system.bs_noise_var_w}}},
        {"sweep",
         {{"alpha_grid", config.alpha_grid},
          {"rho_grid", config.rho_grid},
          {"num_realizations", config.num_realizations},
          {"flavors", flavors}}},
        {"output",
         {{"out_dir", config.out_dir},
          {"csv_name", config.csv_name},
          {"sidecar_name", config.sidecar_name}}}};
}

/// Reads back the resolved-config JSON written by to_json (the sidecar's
/// "config" object re-parses into an equivalent configuration).
inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig config;
    config.seed = j.at("seed").get<std::uint64_t>();
    const auto& sc = j.at("scenario");
    const auto read_vec3 = [](const nlohmann::json& a) {
        return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    };
    config.scenario.bs_position = read_vec3(sc.at("bs_position_m"));
    config.scenario.repeater_position = read_vec3(sc.at("repeater_position_m"));
    config.scenario.ue_region.x_min = sc.at("ue_region_x_m").at(0).get<double>();
    config.scenario.ue_region.x_max = sc.at("ue_region_x_m").at(1).get<double>();
    config.scenario.ue_region.y_min = sc.at("ue_region_y_m").at(0).get<double>();
    config.scenario.ue_region.y_max = sc.at("ue_region_y_m").at(1).get<double>();
    config.scenario.ue_height = sc.at("ue_height_m").get<double>();
    config.scenario.pathloss_offset_db = sc.at("pathloss_offset_db").get<double>();
    config.scenario.pathloss_exponent_db_per_decade =
        sc.at("pathloss_exponent_db_per_decade").get<double>();
    const auto& sys = j.at("system");
    config.system.num_bs_antennas = sys.at("num_bs_antennas").get<int>();
    config.system.num_ues = sys.at("num_ues").get<int>();
    config.system.ue_power_w = sys.at("ue_power_w").get<double>();
    config.system.repeater_noise_var_w = sys.at("repeater_noise_var_w").get<double>();
    config.system.bs_noise_var_w = sys.at("bs_noise_var_w").get<double>();
    const auto& sw = j.at("sweep");
    config.alpha_grid = sw.at("alpha_grid").get<std::vector<double>>();
    config.rho_grid = sw.at("rho_grid").get<std::vector<double>>();
    config.num_realizations = sw.at("num_realizations").get<int>();
    config.flavors.clear();
    for (const auto& name : sw.at("flavors")) config.flavors.push_back(flavor_from_name(name));
    const auto& out = j.at("output");
    config.out_dir = out.at("out_dir").get<std::string>();
    config.csv_name = out.at("csv_name").get<std::string>();
    config.sidecar_name = out.at("sidecar_name").get<std::string>();
    return config;
}

inline nlohmann::json sweep_sidecar_json(const RunConfig& config, const SweepResult& result,
                                         double wall_seconds) {
    return {{"config", to_json(config)},
            {"num_cells", result.cells.size()},
            {"num_realizations", result.num_realizations},
            {"wall_time_seconds", wall_seconds},
            {"build", {{"compiler", __VERSION__}, {"cxx_standard", static_cast<long>(__cplusplus)}}}};
}

/// Full dump of one realization: channels plus, per grid point, the Bussgang
/// gain, a distortion-covariance eigenvalue summary, and per-UE SE for every
/// configured flavor.
inline nlohmann::json realization_dump_json(const RunConfig& config, std::uint64_t index) {
    const SeedPolicy seeds{config.seed};
    const ChannelRealization channels =
        draw_realization(config.scenario, config.system, index, seeds);
    nlohmann::json grid = nlohmann::json::array();
    for (double rho : config.rho_grid) {
        for (double alpha : config.alpha_grid) {
            const SystemParams params = at_operating_point(config.system, {alpha, rho});
            const BussgangModel model = build_bussgang_model(channels, params);
            Eigen::SelfAdjointEigenSolver<CMat> eig(model.distortion_cov,
                                                    Eigen::EigenvaluesOnly);
            nlohmann::json entry = {
                {"alpha", alpha},
                {"rho", rho},
                {"repeater_input_power_w", model.repeater_input_power_w},
                {"bussgang_gain", matrix_to_json(model.gain)},
                {"distortion_cov_eigenvalues",
                 {{"min", eig.eigenvalues().minCoeff()},
                  {"max", eig.eigenvalues().maxCoeff()},
                  {"trace", model.distortion_cov.trace().real()}}}};
            for (CombinerFlavor flavor : config.flavors) {
                const CombinerSet combiners = make_combiners(channels, params, model, flavor);
                const SeReport report = evaluate_se(combiners, model);
                nlohmann::json se = nlohmann::json::array();
                for (Eigen::Index k = 0; k < report.per_ue_bits.size(); ++k)
                    se.push_back(report.per_ue_bits[k]);
                entry["per_ue_se_" + flavor_name(flavor)] = se;
            }
            grid.push_back(std::move(entry));
        }
    }
    return {{"realization", index},
            {"seed", config.seed},
            {"channels", channels_to_json(channels)},
            {"grid", std::move(grid)}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw std::runtime_error("cannot create directory '" + path.parent_path().string() +
                                     "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace ramimo
