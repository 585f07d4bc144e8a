#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "ramimo/bussgang.hpp"
#include "ramimo/channel.hpp"
#include "ramimo/types.hpp"

// Receive combining and spectral efficiency. The distortion-aware (DA)
// combiner whitens with the true distortion statistics; the distortion-
// unaware (DuA) combiner is formed as if the PA were ideal (compression 0)
// and is then evaluated under the true model.

namespace ramimo {

enum class CombinerFlavor { da, dua };

struct CombinerSet {
    std::vector<CVec> vectors;  // one per UE
    CombinerFlavor flavor = CombinerFlavor::da;
    OperatingPoint formed_at;   // for DuA, compression forced to 0
};

struct SeReport {
    Eigen::VectorXd per_ue_bits;  // bits/s/Hz per UE
    double sum_bits = 0.0;
};

namespace detail {

// Hermitian solve with a ridge fallback for matrices singular to working
// precision (the distortion covariance is PSD but can be near-singular when
// the BS noise floor is tiny next to the rank-1 repeater term).
inline CVec solve_hermitian(const CMat& matrix, const CVec& rhs) {
    Eigen::LDLT<CMat> factor(matrix);
    CVec solution = factor.solve(rhs);
    const double residual = (matrix * solution - rhs).norm();
    const double scale = matrix.norm() * solution.norm() + rhs.norm();
    if (factor.info() == Eigen::Success && solution.allFinite() && residual <= 1e-8 * scale)
        return solution;
    const int n = static_cast<int>(matrix.rows());
    const double ridge = 1e-12 * std::abs(matrix.trace().real()) / n;
    const CMat damped = matrix + ridge * CMat::Identity(n, n);
    solution = Eigen::LDLT<CMat>(damped).solve(rhs);
    if (!solution.allFinite())
        throw numerical_error("solve_hermitian: solve failed even with ridge regularization");
    return solution;
}

// Interference-plus-distortion matrix for UE k: sum_{i != k} b_i b_i^H + C_eta.
inline CMat interference_matrix(const CMat& gain, const CMat& distortion_cov, int ue) {
    CMat matrix = distortion_cov + gain * gain.adjoint();
    matrix.noalias() -= gain.col(ue) * gain.col(ue).adjoint();
    return hermitianize(matrix);
}

inline void check_ue_index(const CMat& gain, int ue) {
    if (ue < 0 || ue >= gain.cols()) throw std::domain_error("UE index out of range");
}

}  // namespace detail

/// SE-optimal distortion-aware combiner for UE `ue`:
/// v = (sum_{i != ue} b_i b_i^H + C_eta)^{-1} b_ue.
inline CVec da_combiner(const CMat& gain, const CMat& distortion_cov, int ue) {
    detail::check_ue_index(gain, ue);
    if (!gain.allFinite() || !distortion_cov.allFinite())
        throw std::domain_error("da_combiner: non-finite inputs");
    return detail::solve_hermitian(detail::interference_matrix(gain, distortion_cov, ue),
                                   gain.col(ue));
}

/// Distortion-unaware combiner: applies the DA formula to the compression-0
/// model of the same channels (so amplified repeater noise is still whitened,
/// but PA distortion is not).
inline CVec dua_combiner(const ChannelRealization& channels, const SystemParams& params, int ue) {
    SystemParams linear = params;
    linear.compression = 0.0;
    const CMat gain = bussgang_gain(channels, linear);
    const CMat distortion = distortion_covariance(received_covariance(channels, linear), gain);
    return da_combiner(gain, distortion, ue);
}

/// Achievable SE of UE `ue` under combiner v and the (true) model (B, C_eta):
/// log2(1 + |v^H b_ue|^2 / (sum_{i != ue} |v^H b_i|^2 + v^H C_eta v)).
inline double se_for_combiner(const CVec& v, const CMat& gain, const CMat& distortion_cov,
                              int ue) {
    detail::check_ue_index(gain, ue);
    if (!v.allFinite() || v.isZero(0.0)) throw std::domain_error("se_for_combiner: combiner must be finite and nonzero");
    const CVec projected = gain.adjoint() * v;  // entry i = conj(v^H b_i)
    const double desired = std::norm(projected[ue]);
    const double interference = projected.squaredNorm() - desired;
    const double distortion = (v.adjoint() * distortion_cov * v).value().real();
    const double denominator = interference + distortion;
    if (!(denominator > 0.0))
        throw std::domain_error("se_for_combiner: zero interference-plus-distortion power");
    return std::log2(1.0 + desired / denominator);
}

/// SE of the optimal DA combiner, evaluated directly via one Hermitian solve:
/// log2(1 + b_ue^H (sum_{i != ue} b_i b_i^H + C_eta)^{-1} b_ue).
inline double se_optimal(const CMat& gain, const CMat& distortion_cov, int ue) {
    detail::check_ue_index(gain, ue);
    if (!gain.allFinite() || !distortion_cov.allFinite())
        throw std::domain_error("se_optimal: non-finite inputs");
    const CVec b = gain.col(ue);
    const CVec solution =
        detail::solve_hermitian(detail::interference_matrix(gain, distortion_cov, ue), b);
    const double sinr = b.dot(solution).real();  // b^H solution
    return std::log2(1.0 + sinr);
}

/// Builds all K combiners of one flavor for one realization. The true model
/// is used for DA; DuA rebuilds the compression-0 model once and reuses it.
inline CombinerSet make_combiners(const ChannelRealization& channels, const SystemParams& params,
                                  const BussgangModel& model, CombinerFlavor flavor) {
    CombinerSet set;
    set.flavor = flavor;
    set.formed_at = {params.amp_gain,
                     flavor == CombinerFlavor::dua ? 0.0 : params.compression};
    const int num_ues = params.num_ues;
    set.vectors.reserve(num_ues);
    if (flavor == CombinerFlavor::da) {
        for (int k = 0; k < num_ues; ++k)
            set.vectors.push_back(da_combiner(model.gain, model.distortion_cov, k));
    } else {
        SystemParams linear = params;
        linear.compression = 0.0;
        const CMat gain = bussgang_gain(channels, linear);
        const CMat distortion =
            distortion_covariance(received_covariance(channels, linear), gain);
        for (int k = 0; k < num_ues; ++k)
            set.vectors.push_back(da_combiner(gain, distortion, k));
    }
    return set;
}

/// Per-UE and sum SE of a combiner set, always evaluated under the true model.
inline SeReport evaluate_se(const CombinerSet& combiners, const BussgangModel& model) {
    const int num_ues = static_cast<int>(combiners.vectors.size());
    SeReport report;
    report.per_ue_bits.resize(num_ues);
    for (int k = 0; k < num_ues; ++k)
        report.per_ue_bits[k] =
            se_for_combiner(combiners.vectors[k], model.gain, model.distortion_cov, k);
    report.sum_bits = report.per_ue_bits.sum();
    return report;
}

}  // namespace ramimo
