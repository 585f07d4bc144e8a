#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ramimo/scenario.hpp"
#include "ramimo/seed.hpp"
#include "ramimo/types.hpp"

namespace ramimo {

/// One independent draw of all channels: i.i.d. Rayleigh small-scale fading
/// scaled by the link's large-scale pathloss.
struct ChannelRealization {
    CVec ue_repeater;         // K: UE i -> repeater coefficients
    CVec repeater_bs;         // M: repeater -> BS, one pathloss shared by all antennas
    CMat ue_bs;               // M x K: direct UE -> BS, column k is UE k's channel
    std::vector<Vec3> ue_positions;

    int num_ues() const { return static_cast<int>(ue_repeater.size()); }
    int num_bs_antennas() const { return static_cast<int>(repeater_bs.size()); }
};

/// Circularly-symmetric complex Gaussian draw: real and imaginary parts are
/// independent N(0, variance/2), so E|x|^2 = variance, E|x|^4 = 2 variance^2.
inline cxd sample_cn(double variance, std::mt19937_64& rng) {
    if (variance < 0.0) throw std::domain_error("sample_cn: variance must be >= 0");
    if (variance == 0.0) return cxd(0.0, 0.0);
    std::normal_distribution<double> component(0.0, std::sqrt(variance / 2.0));
    const double re = component(rng);
    const double im = component(rng);
    return cxd(re, im);
}

/// Draws one channel realization. Pure function of its arguments: the same
/// (scenario, params, realization, seeds) always yields the same result, so
/// distinct realizations can be drawn concurrently in any order.
inline ChannelRealization draw_realization(const Scenario& scenario, const SystemParams& params,
                                           std::uint64_t realization, const SeedPolicy& seeds) {
    validate(scenario);
    validate(params);
    const int num_ues = params.num_ues;
    const int num_antennas = params.num_bs_antennas;

    ChannelRealization out;
    out.ue_positions.resize(num_ues);
    {
        auto rng = seeds.engine(realization, Stream::ue_positions);
        std::uniform_real_distribution<double> ux(scenario.ue_region.x_min, scenario.ue_region.x_max);
        std::uniform_real_distribution<double> uy(scenario.ue_region.y_min, scenario.ue_region.y_max);
        for (auto& pos : out.ue_positions) {
            pos.x = ux(rng);
            pos.y = uy(rng);
            pos.z = scenario.ue_height;
        }
    }
    {
        auto rng = seeds.engine(realization, Stream::ue_repeater_fading);
        out.ue_repeater.resize(num_ues);
        for (int k = 0; k < num_ues; ++k) {
            const double gain =
                scenario.pathloss_linear(node_distance(out.ue_positions[k], scenario.repeater_position));
            out.ue_repeater[k] = std::sqrt(gain) * sample_cn(1.0, rng);
        }
    }
    {
        auto rng = seeds.engine(realization, Stream::repeater_bs_fading);
        const double gain =
            scenario.pathloss_linear(node_distance(scenario.repeater_position, scenario.bs_position));
        const double amplitude = std::sqrt(gain);
        out.repeater_bs.resize(num_antennas);
        for (int m = 0; m < num_antennas; ++m) out.repeater_bs[m] = amplitude * sample_cn(1.0, rng);
    }
    {
        auto rng = seeds.engine(realization, Stream::ue_bs_fading);
        out.ue_bs.resize(num_antennas, num_ues);
        for (int k = 0; k < num_ues; ++k) {
            const double gain =
                scenario.pathloss_linear(node_distance(out.ue_positions[k], scenario.bs_position));
            const double amplitude = std::sqrt(gain);
            for (int m = 0; m < num_antennas; ++m)
                out.ue_bs(m, k) = amplitude * sample_cn(1.0, rng);
        }
    }
    return out;
}

}  // namespace ramimo
