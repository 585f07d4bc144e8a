#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

#include "ramimo/bussgang.hpp"
#include "ramimo/channel.hpp"
#include "ramimo/seed.hpp"
#include "ramimo/types.hpp"

// Brute-force estimators of every expectation behind the closed forms. They
// are the independent oracle: nothing here reuses the analytic expressions.
// Samples are generated in fixed-size batches with one RNG substream per
// batch index, so an estimate depends only on (inputs, N, seed), and batches
// are merged with compensated summation.

namespace ramimo {

struct McEstimate {
    CMat value;
    std::size_t num_samples = 0;
    double standard_error = 0.0;  // Frobenius-aggregated, shrinks as 1/sqrt(N)
};

struct ScalarMoment {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Sample means of |u~|^2, |u~|^4, |u~|^6 at the repeater input.
struct RepeaterMoments {
    ScalarMoment m2, m4, m6;
    std::size_t num_samples = 0;
};

namespace detail {

constexpr std::size_t kMcBatch = 8192;

template <class T>
struct KahanSum {
    T sum;
    T compensation;

    explicit KahanSum(const T& zero) : sum(zero), compensation(zero) {}

    void add(const T& x) {
        const T y = x - compensation;
        const T t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
};

// One batch of transmit symbols and receiver noise, drawn per sample in the
// order (s_1..s_K, n, w_1..w_M) so that a single batch reproduces repeated
// simulate_y calls on the same engine.
struct SampleBatch {
    CMat symbols;         // K x B
    CVec repeater_noise;  // B
    CMat bs_noise;        // M x B

    void draw(const SystemParams& params, std::size_t count, std::mt19937_64& rng,
              bool with_bs_noise) {
        const int num_ues = params.num_ues;
        const int num_antennas = params.num_bs_antennas;
        symbols.resize(num_ues, static_cast<Eigen::Index>(count));
        repeater_noise.resize(static_cast<Eigen::Index>(count));
        if (with_bs_noise) bs_noise.resize(num_antennas, static_cast<Eigen::Index>(count));
        for (std::size_t b = 0; b < count; ++b) {
            for (int k = 0; k < num_ues; ++k) symbols(k, b) = sample_cn(1.0, rng);
            repeater_noise[b] = sample_cn(params.repeater_noise_var_w, rng);
            if (with_bs_noise)
                for (int m = 0; m < num_antennas; ++m)
                    bs_noise(m, b) = sample_cn(params.bs_noise_var_w, rng);
        }
    }

    // repeater input u~ = sqrt(p) h^T s + n for every sample, as a row vector
    Eigen::RowVectorXcd repeater_input(const ChannelRealization& channels,
                                       const SystemParams& params) const {
        return std::sqrt(params.ue_power_w) * (channels.ue_repeater.transpose() * symbols) +
               repeater_noise.transpose();
    }

    // received y = g*r + sqrt(p)*Hbar*s + w with r the distorted PA output
    CMat received(const ChannelRealization& channels, const SystemParams& params,
                  const Eigen::RowVectorXcd& repeater_in) const {
        const double alpha = params.amp_gain;
        Eigen::RowVectorXcd amplified = alpha * repeater_in;
        Eigen::RowVectorXcd pa_out =
            amplified.array() +
            params.compression * amplified.array().abs2() * amplified.array();
        return channels.repeater_bs * pa_out +
               std::sqrt(params.ue_power_w) * (channels.ue_bs * symbols) + bs_noise;
    }
};

template <class BatchFn>
void for_each_batch(std::size_t num_samples, std::uint64_t seed, const SystemParams& params,
                    bool with_bs_noise, BatchFn&& fn) {
    if (num_samples < 1) throw std::domain_error("mc estimate: need at least one sample");
    const SeedPolicy seeds{seed};
    SampleBatch batch;
    std::size_t done = 0;
    for (std::uint64_t index = 0; done < num_samples; ++index) {
        const std::size_t count = std::min(kMcBatch, num_samples - done);
        auto rng = seeds.engine(0, Stream::symbols, index);
        batch.draw(params, count, rng, with_bs_noise);
        fn(batch, count);
        done += count;
    }
}

inline double standard_error_from(double mean_sq_norm_of_samples, double mean_norm_sq,
                                  std::size_t num_samples) {
    const double variance = std::max(0.0, mean_sq_norm_of_samples - mean_norm_sq);
    return std::sqrt(variance / static_cast<double>(num_samples));
}

}  // namespace detail

/// Simulates one received vector: draws s, n, w from the engine (in that
/// order), pushes the symbols through repeater, PA and direct paths.
/// Returns (y, s).
inline std::pair<CVec, CVec> simulate_y(const ChannelRealization& channels,
                                        const SystemParams& params, std::mt19937_64& rng) {
    check_dimensions(channels, params);
    const int num_ues = params.num_ues;
    const int num_antennas = params.num_bs_antennas;
    CVec symbols(num_ues);
    for (int k = 0; k < num_ues; ++k) symbols[k] = sample_cn(1.0, rng);
    const cxd repeater_noise = sample_cn(params.repeater_noise_var_w, rng);
    CVec bs_noise(num_antennas);
    for (int m = 0; m < num_antennas; ++m) bs_noise[m] = sample_cn(params.bs_noise_var_w, rng);

    const cxd repeater_in =
        std::sqrt(params.ue_power_w) * channels.ue_repeater.cwiseProduct(symbols).sum() +
        repeater_noise;
    const cxd amplified = params.amp_gain * repeater_in;
    const cxd pa_out = amplified + params.compression * std::norm(amplified) * amplified;
    CVec received = channels.repeater_bs * pa_out +
                    std::sqrt(params.ue_power_w) * (channels.ue_bs * symbols) + bs_noise;
    return {std::move(received), std::move(symbols)};
}

/// Estimates the Bussgang gain B = E{y s^H} as (1/N) sum y s^H.
inline McEstimate estimate_bussgang(const ChannelRealization& channels, const SystemParams& params,
                                    std::size_t num_samples, std::uint64_t seed) {
    check_dimensions(channels, params);
    detail::KahanSum<CMat> acc(CMat::Zero(params.num_bs_antennas, params.num_ues));
    detail::KahanSum<double> sq_norms(0.0);
    detail::for_each_batch(num_samples, seed, params, true,
                           [&](const detail::SampleBatch& batch, std::size_t count) {
                               const auto repeater_in = batch.repeater_input(channels, params);
                               const CMat received = batch.received(channels, params, repeater_in);
                               acc.add(received * batch.symbols.adjoint());
                               for (std::size_t b = 0; b < count; ++b)
                                   sq_norms.add(received.col(b).squaredNorm() *
                                                batch.symbols.col(b).squaredNorm());
                           });
    McEstimate out;
    out.num_samples = num_samples;
    out.value = acc.sum / static_cast<double>(num_samples);
    out.standard_error = detail::standard_error_from(
        sq_norms.sum / static_cast<double>(num_samples), out.value.squaredNorm(), num_samples);
    return out;
}

/// Estimates the received auto-correlation C_y = E{y y^H}. Exactly Hermitian
/// by construction (only the lower triangle is accumulated, then mirrored).
inline McEstimate estimate_received_cov(const ChannelRealization& channels,
                                        const SystemParams& params, std::size_t num_samples,
                                        std::uint64_t seed) {
    check_dimensions(channels, params);
    const int num_antennas = params.num_bs_antennas;
    detail::KahanSum<CMat> acc(CMat::Zero(num_antennas, num_antennas));
    detail::KahanSum<double> sq_norms(0.0);
    CMat batch_sum(num_antennas, num_antennas);
    detail::for_each_batch(num_samples, seed, params, true,
                           [&](const detail::SampleBatch& batch, std::size_t count) {
                               const auto repeater_in = batch.repeater_input(channels, params);
                               const CMat received = batch.received(channels, params, repeater_in);
                               batch_sum.setZero();
                               batch_sum.selfadjointView<Eigen::Lower>().rankUpdate(received);
                               acc.add(batch_sum.selfadjointView<Eigen::Lower>());
                               for (std::size_t b = 0; b < count; ++b) {
                                   const double n2 = received.col(b).squaredNorm();
                                   sq_norms.add(n2 * n2);
                               }
                           });
    McEstimate out;
    out.num_samples = num_samples;
    out.value = acc.sum / static_cast<double>(num_samples);
    out.standard_error = detail::standard_error_from(
        sq_norms.sum / static_cast<double>(num_samples), out.value.squaredNorm(), num_samples);
    return out;
}

/// Sample means of |u~|^2, |u~|^4, |u~|^6 (no BS-side quantities involved).
inline RepeaterMoments estimate_repeater_moments(const ChannelRealization& channels,
                                                 const SystemParams& params,
                                                 std::size_t num_samples, std::uint64_t seed) {
    check_dimensions(channels, params);
    detail::KahanSum<double> s2(0.0), s4(0.0), s6(0.0);
    detail::KahanSum<double> q2(0.0), q4(0.0), q6(0.0);
    detail::for_each_batch(num_samples, seed, params, false,
                           [&](const detail::SampleBatch& batch, std::size_t count) {
                               const auto repeater_in = batch.repeater_input(channels, params);
                               for (std::size_t b = 0; b < count; ++b) {
                                   const double a2 = std::norm(repeater_in[b]);
                                   const double a4 = a2 * a2;
                                   const double a6 = a4 * a2;
                                   s2.add(a2);
                                   s4.add(a4);
                                   s6.add(a6);
                                   q2.add(a2 * a2);
                                   q4.add(a4 * a4);
                                   q6.add(a6 * a6);
                               }
                           });
    const double n = static_cast<double>(num_samples);
    RepeaterMoments out;
    out.num_samples = num_samples;
    out.m2 = {s2.sum / n, detail::standard_error_from(q2.sum / n, (s2.sum / n) * (s2.sum / n),
                                                      num_samples)};
    out.m4 = {s4.sum / n, detail::standard_error_from(q4.sum / n, (s4.sum / n) * (s4.sum / n),
                                                      num_samples)};
    out.m6 = {s6.sum / n, detail::standard_error_from(q6.sum / n, (s6.sum / n) * (s6.sum / n),
                                                      num_samples)};
    return out;
}

/// Third-order cross moment E{|u~|^2 u~ * sqrt(p) sum_j conj(hbar_{j,n} s_j)}
/// for every antenna n at once (all entries share the same draws).
inline McEstimate estimate_cross_third_order_all(const ChannelRealization& channels,
                                                 const SystemParams& params,
                                                 std::size_t num_samples, std::uint64_t seed) {
    check_dimensions(channels, params);
    const int num_antennas = params.num_bs_antennas;
    detail::KahanSum<CMat> acc(CMat::Zero(num_antennas, 1));
    detail::KahanSum<double> sq_norms(0.0);
    const double sqrt_p = std::sqrt(params.ue_power_w);
    detail::for_each_batch(
        num_samples, seed, params, false,
        [&](const detail::SampleBatch& batch, std::size_t count) {
            const auto repeater_in = batch.repeater_input(channels, params);
            const CMat direct = channels.ue_bs * batch.symbols;  // M x B
            Eigen::RowVectorXcd weight =
                repeater_in.array().abs2() * repeater_in.array();  // |u~|^2 u~
            const CMat sample_matrix = sqrt_p * direct.conjugate();
            acc.add((sample_matrix * weight.transpose()).eval());
            for (std::size_t b = 0; b < count; ++b)
                sq_norms.add(std::norm(weight[b]) * sample_matrix.col(b).squaredNorm());
        });
    McEstimate out;
    out.num_samples = num_samples;
    out.value = acc.sum / static_cast<double>(num_samples);
    out.standard_error = detail::standard_error_from(
        sq_norms.sum / static_cast<double>(num_samples), out.value.squaredNorm(), num_samples);
    return out;
}

/// Single-antenna view of estimate_cross_third_order_all (same draws).
inline McEstimate estimate_cross_third_order(const ChannelRealization& channels,
                                             const SystemParams& params, std::size_t num_samples,
                                             std::uint64_t seed, int antenna) {
    if (antenna < 0 || antenna >= params.num_bs_antennas)
        throw std::domain_error("estimate_cross_third_order: antenna index out of range");
    const McEstimate all = estimate_cross_third_order_all(channels, params, num_samples, seed);
    McEstimate out;
    out.num_samples = all.num_samples;
    out.value = all.value.block(antenna, 0, 1, 1);
    out.standard_error = all.standard_error;
    return out;
}

/// Residual correlation (1/N) sum (y - B s) s^H between the distortion and
/// the symbols; should vanish at rate 1/sqrt(N) when B is the true gain.
inline McEstimate estimate_symbol_distortion_correlation(const ChannelRealization& channels,
                                                         const SystemParams& params,
                                                         const CMat& gain,
                                                         std::size_t num_samples,
                                                         std::uint64_t seed) {
    check_dimensions(channels, params);
    if (gain.rows() != params.num_bs_antennas || gain.cols() != params.num_ues)
        throw std::domain_error("estimate_symbol_distortion_correlation: gain dimension mismatch");
    detail::KahanSum<CMat> acc(CMat::Zero(params.num_bs_antennas, params.num_ues));
    detail::KahanSum<double> sq_norms(0.0);
    detail::for_each_batch(num_samples, seed, params, true,
                           [&](const detail::SampleBatch& batch, std::size_t count) {
                               const auto repeater_in = batch.repeater_input(channels, params);
                               const CMat received = batch.received(channels, params, repeater_in);
                               const CMat residual = received - gain * batch.symbols;
                               acc.add(residual * batch.symbols.adjoint());
                               for (std::size_t b = 0; b < count; ++b)
                                   sq_norms.add(residual.col(b).squaredNorm() *
                                                batch.symbols.col(b).squaredNorm());
                           });
    McEstimate out;
    out.num_samples = num_samples;
    out.value = acc.sum / static_cast<double>(num_samples);
    out.standard_error = detail::standard_error_from(
        sq_norms.sum / static_cast<double>(num_samples), out.value.squaredNorm(), num_samples);
    return out;
}

}  // namespace ramimo
