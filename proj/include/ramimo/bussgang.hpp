#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ramimo/channel.hpp"
#include "ramimo/scenario.hpp"
#include "ramimo/types.hpp"

// Closed-form Bussgang decomposition of the repeater's cubic PA seen through
// the uplink: received signal y = B s + eta with distortion eta uncorrelated
// with the symbols s. All expectations are over (symbols, noise) for fixed
// channels, with the repeater input u~ being complex Gaussian of power
// P_r = p*sum|h_i|^2 + sigma_r^2 conditioned on the channels.

namespace ramimo {

/// One (amplification, compression) grid point.
struct OperatingPoint {
    double amp_gain = 1.0;
    double compression = 0.0;
};

inline SystemParams at_operating_point(const SystemParams& params, const OperatingPoint& point) {
    SystemParams out = params;
    out.amp_gain = point.amp_gain;
    out.compression = point.compression;
    return out;
}

inline void check_dimensions(const ChannelRealization& channels, const SystemParams& params) {
    if (channels.num_ues() != params.num_ues ||
        channels.num_bs_antennas() != params.num_bs_antennas ||
        channels.ue_bs.rows() != params.num_bs_antennas ||
        channels.ue_bs.cols() != params.num_ues)
        throw std::domain_error("channel realization dimensions do not match system parameters");
}

/// Total signal-plus-noise power at the repeater input: p*sum|h_i|^2 + sigma_r^2.
inline double repeater_input_power(const ChannelRealization& channels, const SystemParams& params) {
    check_dimensions(channels, params);
    return params.ue_power_w * channels.ue_repeater.squaredNorm() + params.repeater_noise_var_w;
}

/// Effective linear amplitude factor of the cubic PA over a Gaussian input of
/// power input_power: the correlated part of the PA output is alpha*c times
/// the repeater input, with c = 1 + 2*rho*alpha^2*input_power.
inline double effective_amplitude_factor(double amp_gain, double compression, double input_power) {
    return 1.0 + 2.0 * compression * amp_gain * amp_gain * input_power;
}

/// Power of the repeater path in the received auto-correlation:
/// alpha^2*P + 6*rho^2*alpha^6*P^3 + 4*rho*alpha^4*P^2 with P = input_power.
inline double repeater_path_power(double amp_gain, double compression, double input_power) {
    const double a2 = amp_gain * amp_gain;
    const double a2p = a2 * input_power;
    return a2p * (1.0 + 6.0 * compression * compression * a2p * a2p +
                  4.0 * compression * a2p);
}

/// Bussgang gain matrix B (M x K), consolidated form
/// B = sqrt(p)*alpha*c*g*h^T + sqrt(p)*Hbar.
inline CMat bussgang_gain(const ChannelRealization& channels, const SystemParams& params) {
    check_dimensions(channels, params);
    const double sqrt_p = std::sqrt(params.ue_power_w);
    const double input_power = repeater_input_power(channels, params);
    const double c = effective_amplitude_factor(params.amp_gain, params.compression, input_power);
    return (sqrt_p * params.amp_gain * c) *
               (channels.repeater_bs * channels.ue_repeater.transpose()) +
           sqrt_p * channels.ue_bs;
}

/// Bussgang gain entry by entry, keeping the five expectation terms separate.
/// Used to cross-check the consolidated form.
inline CMat bussgang_gain_expanded(const ChannelRealization& channels, const SystemParams& params) {
    check_dimensions(channels, params);
    const auto& h = channels.ue_repeater;
    const auto& g = channels.repeater_bs;
    const double p = params.ue_power_w;
    const double sqrt_p = std::sqrt(p);
    const double alpha = params.amp_gain;
    const double alpha3 = alpha * alpha * alpha;
    const double rho = params.compression;
    const double h_norm2 = h.squaredNorm();

    CMat gain(channels.num_bs_antennas(), channels.num_ues());
    for (int k = 0; k < channels.num_ues(); ++k) {
        const cxd hk = h[k];
        const double hk2 = std::norm(hk);
        const double others = h_norm2 - hk2;
        for (int m = 0; m < channels.num_bs_antennas(); ++m) {
            const cxd gm = g[m];
            gain(m, k) = gm * alpha * sqrt_p * hk                                  // linear
                         + 2.0 * rho * gm * alpha3 * p * sqrt_p * hk2 * hk         // own-symbol cubic
                         + 2.0 * rho * gm * alpha3 * p * sqrt_p * hk * others      // cross-symbol cubic
                         + 2.0 * rho * gm * alpha3 * sqrt_p *
                               params.repeater_noise_var_w * hk                    // noise cubic
                         + sqrt_p * channels.ue_bs(m, k);                          // direct path
        }
    }
    return gain;
}

/// Received auto-correlation C_y (M x M), consolidated form.
inline CMat received_covariance(const ChannelRealization& channels, const SystemParams& params) {
    check_dimensions(channels, params);
    const auto& g = channels.repeater_bs;
    const double p = params.ue_power_w;
    const double alpha = params.amp_gain;
    const double input_power = repeater_input_power(channels, params);
    const double c = effective_amplitude_factor(alpha, params.compression, input_power);
    const double path_power = repeater_path_power(alpha, params.compression, input_power);

    // cross(m) = p * sum_i conj(h_i) * hbar_{i,m}, the symbol-borne correlation
    // between the repeater input and antenna m's direct paths
    const CVec cross = p * (channels.ue_bs * channels.ue_repeater.conjugate());

    const int num_antennas = channels.num_bs_antennas();
    CMat cov = path_power * (g * g.adjoint()) + p * (channels.ue_bs * channels.ue_bs.adjoint());
    cov += (alpha * c) * (g * cross.adjoint() + cross * g.adjoint());
    cov += params.bs_noise_var_w * CMat::Identity(num_antennas, num_antennas);
    return cov;
}

/// Received auto-correlation computed term by term from the individual
/// Gaussian moments, without algebraic consolidation.
inline CMat received_covariance_expanded(const ChannelRealization& channels,
                                         const SystemParams& params) {
    check_dimensions(channels, params);
    const auto& h = channels.ue_repeater;
    const auto& g = channels.repeater_bs;
    const auto& direct = channels.ue_bs;
    const int num_antennas = channels.num_bs_antennas();
    const int num_ues = channels.num_ues();
    const double p = params.ue_power_w;
    const double alpha = params.amp_gain;
    const double alpha3 = alpha * alpha * alpha;
    const double rho = params.compression;
    const double sigma_r2 = params.repeater_noise_var_w;

    const double input_power = repeater_input_power(channels, params);
    const double m2 = input_power;                                  // E|u~|^2
    const double m4 = 2.0 * input_power * input_power;              // E|u~|^4
    const double m6 = 6.0 * input_power * input_power * input_power;  // E|u~|^6

    // first-order cross moment: E{u~ * sqrt(p) sum_j conj(hbar_{j,n}) conj(s_j)}
    CVec cross1(num_antennas);
    // third-order cross moment, three-term expansion:
    // 2p^2 sum_i |h_i|^2 h_i conj(hbar_{i,n})
    //  + 2p^2 sum_i |h_i|^2 sum_{j != i} h_j conj(hbar_{j,n})
    //  + 2p sigma_r^2 sum_i h_i conj(hbar_{i,n})
    CVec cross3(num_antennas);
    for (int n = 0; n < num_antennas; ++n) {
        cxd first(0.0, 0.0);
        cxd own(0.0, 0.0);
        cxd pairs(0.0, 0.0);
        for (int i = 0; i < num_ues; ++i) {
            const cxd term = h[i] * std::conj(direct(n, i));
            first += term;
            own += std::norm(h[i]) * term;
            cxd inner(0.0, 0.0);
            for (int j = 0; j < num_ues; ++j) {
                if (j == i) continue;
                inner += h[j] * std::conj(direct(n, j));
            }
            pairs += std::norm(h[i]) * inner;
        }
        cross1[n] = p * first;
        cross3[n] = 2.0 * p * p * own + 2.0 * p * p * pairs + 2.0 * p * sigma_r2 * first;
    }

    CMat cov(num_antennas, num_antennas);
    for (int m = 0; m < num_antennas; ++m) {
        for (int n = 0; n < num_antennas; ++n) {
            const cxd gg = g[m] * std::conj(g[n]);
            cxd value = gg * (alpha * alpha * m2) + gg * (rho * rho * alpha3 * alpha3 * m6) +
                        gg * (2.0 * rho * alpha * alpha3 * m4);
            cxd direct_sum(0.0, 0.0);
            for (int i = 0; i < num_ues; ++i) direct_sum += direct(m, i) * std::conj(direct(n, i));
            value += p * direct_sum;
            if (m == n) value += params.bs_noise_var_w;
            value += g[m] * alpha * cross1[n] + std::conj(g[n]) * alpha * std::conj(cross1[m]);
            value += rho * g[m] * alpha3 * cross3[n] +
                     rho * std::conj(g[n]) * alpha3 * std::conj(cross3[m]);
            cov(m, n) = value;
        }
    }
    return cov;
}

namespace detail {

inline CMat hermitianize(const CMat& x) { return 0.5 * (x + x.adjoint()).eval(); }

// PSD check with tolerance -tol_scale*trace/M on the minimum eigenvalue.
// Cholesky of the shifted matrix is tried first; the eigensolver only runs
// when that fails near the boundary.
inline void check_psd(const CMat& x, double tol_scale, const std::string& label) {
    const int n = static_cast<int>(x.rows());
    const double shift = tol_scale * std::abs(x.trace().real()) / n;
    CMat shifted = x + shift * CMat::Identity(n, n);
    Eigen::LLT<CMat> llt(shifted);
    if (llt.info() == Eigen::Success) return;
    Eigen::SelfAdjointEigenSolver<CMat> eig(x, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -shift)
        throw numerical_error(label + ": matrix is not PSD within tolerance (min eigenvalue " +
                              std::to_string(min_eig) + ", bound " + std::to_string(-shift) + ")");
}

}  // namespace detail

/// Distortion auto-correlation C_eta = C_y - B*B^H, re-Hermitianized. Throws
/// numerical_error if the result is not PSD within -1e-8*trace/M, which would
/// indicate inconsistent inputs rather than roundoff.
inline CMat distortion_covariance(const CMat& received_cov, const CMat& gain) {
    if (received_cov.rows() != received_cov.cols() || received_cov.rows() != gain.rows())
        throw std::domain_error("distortion_covariance: dimension mismatch");
    CMat cov = detail::hermitianize(received_cov - gain * gain.adjoint());
    detail::check_psd(cov, 1e-8, "distortion_covariance");
    return cov;
}

/// The full decomposition for one realization at one operating point.
struct BussgangModel {
    CMat gain;            // B, M x K
    CMat received_cov;    // C_y, M x M
    CMat distortion_cov;  // C_eta = C_y - B*B^H, M x M
    double repeater_input_power_w = 0.0;
};

/// Builds the model and cross-checks the consolidated closed forms against
/// the term-by-term expansions (they must agree to near machine precision).
inline BussgangModel build_bussgang_model(const ChannelRealization& channels,
                                          const SystemParams& params) {
    BussgangModel model;
    model.repeater_input_power_w = repeater_input_power(channels, params);
    model.gain = bussgang_gain(channels, params);
    model.received_cov = received_covariance(channels, params);

    const CMat gain_alt = bussgang_gain_expanded(channels, params);
    const double gain_err = (gain_alt - model.gain).norm();
    if (gain_err > 1e-12 * model.gain.norm())
        throw numerical_error("bussgang gain: consolidated and expanded forms disagree");
    const CMat cov_alt = received_covariance_expanded(channels, params);
    const double cov_err = (cov_alt - model.received_cov).norm();
    if (cov_err > 1e-12 * model.received_cov.norm())
        throw numerical_error("received covariance: consolidated and expanded forms disagree");

    model.distortion_cov = distortion_covariance(model.received_cov, model.gain);
    return model;
}

}  // namespace ramimo
