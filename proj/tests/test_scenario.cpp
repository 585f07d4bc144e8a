#include <catch2/catch_amalgamated.hpp>

#include "ramimo/scenario.hpp"

using namespace ramimo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pathloss law matches its defining constants") {
    const Scenario scenario;
    CHECK_THAT(scenario.pathloss_db(1.0), WithinAbs(-34.53, 1e-12));
    CHECK_THAT(scenario.pathloss_db(100.0), WithinAbs(-110.53, 1e-12));
    CHECK_THAT(scenario.pathloss_db(10.0), WithinAbs(-72.53, 1e-12));
    CHECK_THROWS_AS(scenario.pathloss_db(0.0), std::domain_error);
    CHECK_THROWS_AS(scenario.pathloss_db(-1.0), std::domain_error);
}

TEST_CASE("pathloss is strictly decreasing in distance") {
    const Scenario scenario;
    double previous = scenario.pathloss_db(0.5);
    for (double d = 1.0; d < 2000.0; d *= 1.7) {
        const double current = scenario.pathloss_db(d);
        CHECK(current < previous);
        previous = current;
    }
}

TEST_CASE("linear pathloss is positive and below one beyond the offset knee") {
    const Scenario scenario;
    for (double d : {9.0, 20.0, 100.0, 350.0}) {
        const double linear = scenario.pathloss_linear(d);
        CHECK(linear > 0.0);
        CHECK(linear < 1.0);
    }
    // -34.53 - 38*log10(d) is still positive dB below ~8.15 m
    CHECK(scenario.pathloss_db(8.0) > 0.0);
    CHECK(scenario.pathloss_linear(8.0) > 1.0);
}

TEST_CASE("dB conversions") {
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK_THAT(db_to_linear(10.0), WithinRel(10.0, 1e-15));
    // high-precision reference for 10^(-11.053)
    CHECK_THAT(db_to_linear(-110.53), WithinRel(8.8511560983083547e-12, 1e-15));
    CHECK_THAT(linear_to_db(db_to_linear(-7.25)), WithinAbs(-7.25, 1e-12));
    CHECK_THROWS_AS(linear_to_db(0.0), std::domain_error);
    CHECK_THAT(dbm_to_watts(23.010299956639813), WithinRel(0.2, 1e-12));
    CHECK_THAT(watts_to_dbm(0.2), WithinAbs(23.010299956639813, 1e-12));
}

TEST_CASE("noise variance from density, bandwidth and noise figure") {
    // -204 dBW/Hz over 100 MHz with a 5 dB noise figure is -89 dBm
    const double variance = noise_variance_watts(-204.0, 1e8, 5.0);
    CHECK_THAT(watts_to_dbm(variance), WithinAbs(-89.0, 0.01));
    CHECK_THAT(variance, WithinRel(1.2589254117941672e-12, 1e-12));

    // bandwidth term vanishes at 1 Hz; 10^(-20.4) reference
    CHECK_THAT(noise_variance_watts(-204.0, 1.0, 0.0),
               WithinRel(3.9810717055349725e-21, 1e-15));

    CHECK_THAT(watts_to_dbm(noise_variance_watts(-204.0, 1e8, 0.0)), WithinAbs(-94.0, 1e-9));
    CHECK_THROWS_AS(noise_variance_watts(-204.0, 0.0, 5.0), std::domain_error);
    CHECK_THROWS_AS(noise_variance_watts(-204.0, -1.0, 5.0), std::domain_error);
}

TEST_CASE("noise variance is linear in bandwidth") {
    for (double bw : {1e6, 3.7e7, 1e8}) {
        const double base = noise_variance_watts(-204.0, bw, 5.0);
        const double doubled = noise_variance_watts(-204.0, 2.0 * bw, 5.0);
        CHECK_THAT(doubled / base, WithinRel(2.0, 1e-12));
        CHECK_THAT(linear_to_db(doubled) - linear_to_db(base),
                   WithinAbs(10.0 * std::log10(2.0), 1e-12));
    }
}

TEST_CASE("node distance") {
    CHECK(node_distance({0, 0, 0}, {0, 0, 0}) == 0.0);
    CHECK_THAT(node_distance({0, 0, 25}, {200, 0, 15}), WithinRel(200.24984394500786, 1e-15));
    CHECK(node_distance({0, 0, 0}, {3, 4, 0}) == 5.0);
}

TEST_CASE("parameter validation") {
    SystemParams params;
    CHECK_NOTHROW(validate(params));

    SystemParams bad = params;
    bad.ue_power_w = 0.0;
    CHECK_THROWS_AS(validate(bad), std::domain_error);
    bad = params;
    bad.compression = 0.5;
    CHECK_THROWS_AS(validate(bad), std::domain_error);
    bad = params;
    bad.amp_gain = -1.0;
    CHECK_THROWS_AS(validate(bad), std::domain_error);
    bad = params;
    bad.num_ues = 0;
    CHECK_THROWS_AS(validate(bad), std::domain_error);
    bad = params;
    bad.repeater_noise_var_w = -1e-12;
    CHECK_THROWS_AS(validate(bad), std::domain_error);

    Scenario scenario;
    CHECK_NOTHROW(validate(scenario));
    scenario.ue_region = {10.0, 10.0, -50.0, 50.0};
    CHECK_THROWS_AS(validate(scenario), std::domain_error);
}

TEST_CASE("default parameters carry the reference noise budget") {
    const SystemParams params;
    CHECK_THAT(watts_to_dbm(params.repeater_noise_var_w), WithinAbs(-89.0, 0.01));
    CHECK_THAT(watts_to_dbm(params.bs_noise_var_w), WithinAbs(-89.0, 0.01));
    CHECK(params.ue_power_w == 0.2);
}
