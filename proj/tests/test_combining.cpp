#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ramimo/combining.hpp"
#include "test_support.hpp"

using namespace ramimo;
using namespace ramimo::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CVec random_unit_vector(int size, std::mt19937_64& rng) {
    CVec v(size);
    for (int i = 0; i < size; ++i) v[i] = sample_cn(1.0, rng);
    return v / v.norm();
}

}  // namespace

TEST_CASE("single-UE combiner with white distortion is a matched filter") {
    std::mt19937_64 rng(70);
    CMat gain(4, 1);
    for (int m = 0; m < 4; ++m) gain(m, 0) = sample_cn(1.0, rng);
    const CMat distortion = 0.37 * CMat::Identity(4, 4);
    const CVec v = da_combiner(gain, distortion, 0);
    // collinear with b_1
    const double cosine = std::abs(v.dot(gain.col(0))) / (v.norm() * gain.col(0).norm());
    CHECK_THAT(cosine, WithinRel(1.0, 1e-12));
}

TEST_CASE("two-antenna combiner solves the 2x2 system by hand") {
    CMat gain(2, 2);
    gain << 1.0, 0.0, 0.0, 1.0;
    const CMat distortion = CMat::Identity(2, 2);
    // A_1 = b_2 b_2^H + I = diag(1, 2); v_1 = A^{-1} e_1 = (1, 0)
    const CVec v = da_combiner(gain, distortion, 0);
    CHECK_THAT(std::abs(v[0] - cxd(1.0, 0.0)), WithinAbs(0.0, 1e-14));
    CHECK_THAT(std::abs(v[1]), WithinAbs(0.0, 1e-14));
}

TEST_CASE("DA combiner is optimal among random and perturbed candidates") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ch = random_channels(6, 3, rng);
        const auto params = paper_params(6, 3, 1e3, -1e4);
        const BussgangModel model = build_bussgang_model(ch, params);
        for (int k = 0; k < 3; ++k) {
            const CVec best = da_combiner(model.gain, model.distortion_cov, k);
            const double best_se = se_for_combiner(best, model.gain, model.distortion_cov, k);
            for (int candidate = 0; candidate < 50; ++candidate) {
                const CVec random_v = random_unit_vector(6, rng);
                CHECK(best_se >=
                      se_for_combiner(random_v, model.gain, model.distortion_cov, k) - 1e-12);
                const CVec perturbed = best + 0.01 * best.norm() * random_unit_vector(6, rng);
                CHECK(best_se >=
                      se_for_combiner(perturbed, model.gain, model.distortion_cov, k) - 1e-12);
            }
        }
    }
}

TEST_CASE("DuA equals DA when the true compression is zero") {
    std::mt19937_64 rng(72);
    const auto ch = random_channels(5, 3, rng);
    const auto params = paper_params(5, 3, 2e3, 0.0);
    const BussgangModel model = build_bussgang_model(ch, params);
    for (int k = 0; k < 3; ++k) {
        const CVec da = da_combiner(model.gain, model.distortion_cov, k);
        const CVec dua = dua_combiner(ch, params, k);
        CHECK(da == dua);
    }
}

TEST_CASE("silent repeater: both flavors reduce to the direct-path combiner") {
    std::mt19937_64 rng(73);
    const auto ch = random_channels(5, 2, rng);
    const auto params = paper_params(5, 2, 0.0, -1e4);
    const BussgangModel model = build_bussgang_model(ch, params);
    for (int k = 0; k < 2; ++k) {
        const CVec da = da_combiner(model.gain, model.distortion_cov, k);
        const CVec dua = dua_combiner(ch, params, k);
        CHECK(da == dua);

        // explicit direct-path formula
        const double p = params.ue_power_w;
        CMat a = params.bs_noise_var_w * CMat::Identity(5, 5);
        for (int i = 0; i < 2; ++i) {
            if (i == k) continue;
            a += p * ch.ue_bs.col(i) * ch.ue_bs.col(i).adjoint();
        }
        const CVec expected = a.ldlt().solve(std::sqrt(p) * ch.ue_bs.col(k));
        CHECK((da - expected).norm() <= 1e-9 * expected.norm());
    }
}

TEST_CASE("DA dominates DuA under the true model") {
    std::mt19937_64 rng(74);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ch = random_channels(6, 3, rng);
        const double alpha = std::pow(10.0, 1.0 + static_cast<double>(rng() % 4));
        const auto params = paper_params(6, 3, alpha, -1e4);
        const BussgangModel model = build_bussgang_model(ch, params);
        const auto da = make_combiners(ch, params, model, CombinerFlavor::da);
        const auto dua = make_combiners(ch, params, model, CombinerFlavor::dua);
        CHECK(evaluate_se(da, model).sum_bits >= evaluate_se(dua, model).sum_bits - 1e-12);
    }
}

TEST_CASE("se_for_combiner formula cases") {
    // orthogonal combiner -> SE 0
    CMat gain(2, 1);
    gain << 1.0, 0.0;
    const CMat distortion = CMat::Identity(2, 2);
    CVec v(2);
    v << 0.0, 1.0;
    CHECK(se_for_combiner(v, gain, distortion, 0) == 0.0);

    // scalar reduction: log2(1 + |b|^2 / c)
    CMat b(1, 1);
    b << cxd(1.5, -0.5);
    CMat c(1, 1);
    c << 0.4;
    CVec v1(1);
    v1 << cxd(0.3, 0.7);
    CHECK_THAT(se_for_combiner(v1, b, c, 0), WithinRel(std::log2(1.0 + std::norm(b(0, 0)) / 0.4), 1e-12));

    // scale invariance
    std::mt19937_64 rng(75);
    const auto ch = random_channels(4, 2, rng);
    const auto params = paper_params(4, 2, 1e2, -1e3);
    const BussgangModel model = build_bussgang_model(ch, params);
    const CVec w = da_combiner(model.gain, model.distortion_cov, 1);
    const double se1 = se_for_combiner(w, model.gain, model.distortion_cov, 1);
    const double se2 = se_for_combiner((2.0 * w).eval(), model.gain, model.distortion_cov, 1);
    CHECK_THAT(se2, WithinRel(se1, 1e-12));
}

TEST_CASE("se_optimal agrees with the explicit combiner path") {
    std::mt19937_64 rng(76);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ch = random_channels(5, 3, rng);
        const double alpha = (trial % 5 == 0) ? 0.0 : std::pow(10.0, static_cast<double>(rng() % 5));
        const double rho = (trial % 2 == 0) ? 0.0 : -1e4;
        const auto params = paper_params(5, 3, alpha, rho);
        const BussgangModel model = build_bussgang_model(ch, params);
        for (int k = 0; k < 3; ++k) {
            const CVec v = da_combiner(model.gain, model.distortion_cov, k);
            const double direct = se_optimal(model.gain, model.distortion_cov, k);
            const double via_combiner = se_for_combiner(v, model.gain, model.distortion_cov, k);
            CHECK_THAT(direct, WithinRel(via_combiner, 1e-9));
        }
    }
}

TEST_CASE("se_optimal closed cases") {
    // K=1, C_eta = I, ||b||^2 = 3 -> log2(4) = 2
    CMat gain(3, 1);
    gain << 1.0, 1.0, 1.0;
    CHECK_THAT(se_optimal(gain, CMat::Identity(3, 3), 0), WithinRel(2.0, 1e-12));

    // silent repeater, single UE, single antenna: log2(1 + p |hbar|^2 / sigma^2)
    const auto ch = scalar_channels(0.7, 0.9, cxd(0.6, 0.8));
    const auto params = make_params(1, 1, 0.2, 1e-12, 1e-3, 0.0, 0.0);
    const BussgangModel model = build_bussgang_model(ch, params);
    const double expected = std::log2(1.0 + 0.2 * 1.0 / 1e-3);
    CHECK_THAT(se_optimal(model.gain, model.distortion_cov, 0), WithinRel(expected, 1e-12));
}

TEST_CASE("per-UE SE is invariant under per-UE phase rotation") {
    std::mt19937_64 rng(77);
    const auto ch = random_channels(5, 3, rng);
    const auto params = paper_params(5, 3, 1e3, -1e4);
    const BussgangModel model = build_bussgang_model(ch, params);

    ChannelRealization rotated = ch;
    const cxd phase = std::polar(1.0, -2.1);
    rotated.ue_repeater[0] *= phase;
    rotated.ue_bs.col(0) *= phase;
    const BussgangModel rotated_model = build_bussgang_model(rotated, params);

    for (CombinerFlavor flavor : {CombinerFlavor::da, CombinerFlavor::dua}) {
        const auto before = evaluate_se(make_combiners(ch, params, model, flavor), model);
        const auto after =
            evaluate_se(make_combiners(rotated, params, rotated_model, flavor), rotated_model);
        for (int k = 0; k < 3; ++k)
            CHECK_THAT(after.per_ue_bits[k], WithinRel(before.per_ue_bits[k], 1e-10));
    }
}

TEST_CASE("error paths") {
    CMat gain(2, 2);
    gain << 1.0, 0.0, 0.0, 1.0;
    const CMat distortion = CMat::Identity(2, 2);
    CHECK_THROWS_AS(da_combiner(gain, distortion, 2), std::domain_error);
    CHECK_THROWS_AS(da_combiner(gain, distortion, -1), std::domain_error);

    CMat bad = gain;
    bad(0, 0) = cxd(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(da_combiner(bad, distortion, 0), std::domain_error);
    CHECK_THROWS_AS(se_optimal(bad, distortion, 0), std::domain_error);

    CVec zero = CVec::Zero(2);
    CHECK_THROWS_AS(se_for_combiner(zero, gain, distortion, 0), std::domain_error);

    // zero denominator is only possible without BS noise
    CMat lone(2, 1);
    lone << 1.0, 0.0;
    CVec v(2);
    v << 1.0, 0.0;
    CHECK_THROWS_AS(se_for_combiner(v, lone, CMat::Zero(2, 2), 0), std::domain_error);
}
