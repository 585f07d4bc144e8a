#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "ramimo/channel.hpp"

using namespace ramimo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("sample_cn variance and fourth moment") {
    std::mt19937_64 rng(7);
    CHECK(sample_cn(0.0, rng) == cxd(0.0, 0.0));
    CHECK_THROWS_AS(sample_cn(-1.0, rng), std::domain_error);

    const std::size_t draws = 1'000'000;
    double power = 0.0, fourth = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double a2 = std::norm(sample_cn(1.0, rng));
        power += a2;
        fourth += a2 * a2;
    }
    power /= draws;
    fourth /= draws;
    CHECK(power > 0.99);
    CHECK(power < 1.01);
    CHECK(fourth > 1.98);
    CHECK(fourth < 2.02);

    double power4 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) power4 += std::norm(sample_cn(4.0, rng));
    power4 /= draws;
    CHECK(power4 > 3.96);
    CHECK(power4 < 4.04);
}

TEST_CASE("substreams are deterministic and order independent") {
    const SeedPolicy seeds{42};
    CHECK(seeds.substream_seed(3, Stream::symbols, 9) == seeds.substream_seed(3, Stream::symbols, 9));
    CHECK(seeds.substream_seed(3, Stream::symbols) != seeds.substream_seed(4, Stream::symbols));
    CHECK(seeds.substream_seed(3, Stream::symbols) != seeds.substream_seed(3, Stream::noise));
    CHECK(SeedPolicy{43}.substream_seed(3, Stream::symbols) !=
          seeds.substream_seed(3, Stream::symbols));
}

TEST_CASE("draw_realization is a pure function of (scenario, params, index, seed)") {
    const Scenario scenario;
    SystemParams params;
    params.num_bs_antennas = 8;
    params.num_ues = 3;
    const SeedPolicy seeds{123};

    const ChannelRealization a = draw_realization(scenario, params, 5, seeds);
    const ChannelRealization b = draw_realization(scenario, params, 5, seeds);
    CHECK(a.ue_repeater == b.ue_repeater);
    CHECK(a.repeater_bs == b.repeater_bs);
    CHECK(a.ue_bs == b.ue_bs);
    REQUIRE(a.ue_positions.size() == b.ue_positions.size());
    for (std::size_t k = 0; k < a.ue_positions.size(); ++k) {
        CHECK(a.ue_positions[k].x == b.ue_positions[k].x);
        CHECK(a.ue_positions[k].y == b.ue_positions[k].y);
    }

    const ChannelRealization c = draw_realization(scenario, params, 6, seeds);
    CHECK(a.ue_repeater != c.ue_repeater);
}

TEST_CASE("ue positions stay in the configured region at the configured height") {
    Scenario scenario;
    scenario.ue_region = {120.0, 180.0, -20.0, 20.0};
    SystemParams params;
    params.num_ues = 6;
    params.num_bs_antennas = 2;
    const SeedPolicy seeds{9};
    for (std::uint64_t r = 0; r < 50; ++r) {
        const ChannelRealization ch = draw_realization(scenario, params, r, seeds);
        for (const Vec3& pos : ch.ue_positions) {
            CHECK(pos.x >= 120.0);
            CHECK(pos.x <= 180.0);
            CHECK(pos.y >= -20.0);
            CHECK(pos.y <= 20.0);
            CHECK(pos.z == scenario.ue_height);
        }
    }
}

TEST_CASE("channel power matches the link pathloss") {
    // UE pinned (up to a vanishing region) at (250, 0, 1.5); repeater at
    // (200, 0, 15) so the UE-repeater distance is sqrt(50^2 + 13.5^2).
    Scenario scenario;
    scenario.ue_region = {250.0 - 1e-9, 250.0 + 1e-9, -1e-9, 1e-9};
    SystemParams params;
    params.num_ues = 1;
    params.num_bs_antennas = 4;
    const SeedPolicy seeds{2024};

    const int realizations = 10'000;
    double ue_repeater_power = 0.0;
    Eigen::VectorXd repeater_bs_power = Eigen::VectorXd::Zero(params.num_bs_antennas);
    for (int r = 0; r < realizations; ++r) {
        const ChannelRealization ch = draw_realization(scenario, params, r, seeds);
        ue_repeater_power += std::norm(ch.ue_repeater[0]);
        for (int m = 0; m < params.num_bs_antennas; ++m)
            repeater_bs_power[m] += std::norm(ch.repeater_bs[m]);
    }
    ue_repeater_power /= realizations;
    repeater_bs_power /= realizations;

    const double expected_ue_repeater =
        scenario.pathloss_linear(std::hypot(50.0, 13.5));
    CHECK_THAT(ue_repeater_power, WithinRel(expected_ue_repeater, 0.03));

    const double expected_repeater_bs = scenario.pathloss_linear(
        node_distance(scenario.repeater_position, scenario.bs_position));
    for (int m = 0; m < params.num_bs_antennas; ++m)
        CHECK_THAT(repeater_bs_power[m], WithinRel(expected_repeater_bs, 0.03));
}

TEST_CASE("distinct links are uncorrelated") {
    const Scenario scenario;
    SystemParams params;
    params.num_ues = 2;
    params.num_bs_antennas = 2;
    const SeedPolicy seeds{77};

    const int realizations = 20'000;
    cxd h_g(0, 0), h_hbar(0, 0), g_hbar(0, 0);
    double h_power = 0.0, g_power = 0.0, hbar_power = 0.0;
    for (int r = 0; r < realizations; ++r) {
        const ChannelRealization ch = draw_realization(scenario, params, r, seeds);
        h_g += ch.ue_repeater[0] * std::conj(ch.repeater_bs[0]);
        h_hbar += ch.ue_repeater[0] * std::conj(ch.ue_bs(0, 0));
        g_hbar += ch.repeater_bs[0] * std::conj(ch.ue_bs(1, 1));
        h_power += std::norm(ch.ue_repeater[0]);
        g_power += std::norm(ch.repeater_bs[0]);
        hbar_power += std::norm(ch.ue_bs(0, 0));
    }
    const double n = realizations;
    // normalized cross-correlations should be O(1/sqrt(N))
    const double bound = 5.0 / std::sqrt(n);
    CHECK(std::abs(h_g / n) / std::sqrt(h_power / n * g_power / n) < bound);
    CHECK(std::abs(h_hbar / n) / std::sqrt(h_power / n * hbar_power / n) < bound);
    CHECK(std::abs(g_hbar / n) / std::sqrt(g_power / n * hbar_power / n) < bound);
}
