#pragma once

#include <cmath>
#include <stdexcept>

#include "ramimo/types.hpp"

// Physical units, deployment geometry and large-scale fading. Everything
// downstream of this header works in linear SI units (watts, meters);
// dB/dBm appear only at configuration boundaries.

namespace ramimo {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double node_distance(const Vec3& a, const Vec3& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

inline double db_to_linear(double value_db) { return std::pow(10.0, value_db / 10.0); }

inline double linear_to_db(double value) {
    if (value <= 0.0) throw std::domain_error("linear_to_db: value must be > 0");
    return 10.0 * std::log10(value);
}

inline double dbm_to_watts(double value_dbm) { return db_to_linear(value_dbm - 30.0); }

inline double watts_to_dbm(double watts) { return linear_to_db(watts) + 30.0; }

/// Receiver noise variance from a noise power density (dBW/Hz), a bandwidth
/// and a noise figure. Returns watts.
inline double noise_variance_watts(double density_dbw_per_hz, double bandwidth_hz,
                                   double noise_figure_db) {
    if (bandwidth_hz <= 0.0) throw std::domain_error("noise_variance_watts: bandwidth must be > 0");
    return db_to_linear(density_dbw_per_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

/// Axis-aligned rectangle in the horizontal plane.
struct Rect {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Scalar physical parameters of one uplink setup. amp_gain is the repeater
/// amplitude gain (0 models the no-repeater baseline); compression is the
/// coefficient of the cubic PA term r = u + compression*|u|^2*u, in 1/W.
struct SystemParams {
    int num_bs_antennas = 64;
    int num_ues = 4;
    double ue_power_w = 0.2;
    double repeater_noise_var_w = noise_variance_watts(-204.0, 1e8, 5.0);
    double bs_noise_var_w = noise_variance_watts(-204.0, 1e8, 5.0);
    double amp_gain = 1.0;
    double compression = 0.0;
};

inline void validate(const SystemParams& params) {
    if (params.num_bs_antennas < 1) throw std::domain_error("num_bs_antennas must be >= 1");
    if (params.num_ues < 1) throw std::domain_error("num_ues must be >= 1");
    if (!(params.ue_power_w > 0.0)) throw std::domain_error("ue_power_w must be > 0");
    if (!(params.repeater_noise_var_w > 0.0))
        throw std::domain_error("repeater_noise_var_w must be > 0");
    if (!(params.bs_noise_var_w > 0.0)) throw std::domain_error("bs_noise_var_w must be > 0");
    if (!(params.amp_gain >= 0.0)) throw std::domain_error("amp_gain must be >= 0");
    if (!(params.compression <= 0.0)) throw std::domain_error("compression must be <= 0");
}

/// Deployment geometry and the pathloss law. The slope/offset are fields so
/// sensitivity studies need no code changes.
struct Scenario {
    Vec3 bs_position{0.0, 0.0, 25.0};
    Vec3 repeater_position{200.0, 0.0, 15.0};
    Rect ue_region{200.0, 300.0, -50.0, 50.0};
    double ue_height = 1.5;
    double pathloss_offset_db = -34.53;
    double pathloss_exponent_db_per_decade = 38.0;

    double pathloss_db(double distance_m) const {
        if (!(distance_m > 0.0)) throw std::domain_error("pathloss_db: distance must be > 0");
        return pathloss_offset_db - pathloss_exponent_db_per_decade * std::log10(distance_m);
    }

    double pathloss_linear(double distance_m) const { return db_to_linear(pathloss_db(distance_m)); }
};

inline void validate(const Scenario& scenario) {
    if (!(scenario.ue_region.area() > 0.0))
        throw std::domain_error("ue_region must have positive area");
    if (scenario.ue_height < 0.0 || scenario.bs_position.z < 0.0 ||
        scenario.repeater_position.z < 0.0)
        throw std::domain_error("node heights must be >= 0");
}

}  // namespace ramimo
