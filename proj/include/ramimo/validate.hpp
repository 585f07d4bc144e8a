#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ramimo/bussgang.hpp"
#include "ramimo/config.hpp"
#include "ramimo/mc_oracle.hpp"

// Closed-form vs Monte-Carlo validation. Draws one realization from the
// configured scenario and runs every estimator against the analytic
// expressions on a reduced (alpha, rho) grid. The tolerances are the fixed
// acceptance thresholds, so deliberately tiny sample counts fail.

namespace ramimo {

struct ValidationCheck {
    std::string family;   // bussgang_gain | received_covariance | distortion_psd |
                          // repeater_moments | cross_third_order | uncorrelatedness
    std::string name;     // instance label, includes the operating point
    double reference = 0.0;
    double estimate = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::size_t num_samples = 0;
};

struct ValidationOptions {
    std::optional<std::size_t> samples_override;  // replaces every default N
    std::size_t gain_samples = 1'000'000;
    std::size_t covariance_samples = 10'000'000;
    std::size_t moment_samples = 10'000'000;
    std::size_t uncorrelatedness_samples = 1'000'000;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const ValidationCheck& c) { return c.pass; });
    }
};

namespace detail {

inline std::string operating_point_label(double alpha, double rho) {
    std::ostringstream out;
    out << "alpha=" << alpha << ", rho=" << rho;
    return out.str();
}

inline double relative_frobenius_error(const CMat& estimate, const CMat& reference) {
    return (estimate - reference).norm() / reference.norm();
}

}  // namespace detail

inline ValidationReport run_validation(const RunConfig& config,
                                       const ValidationOptions& options = {}) {
    ValidationOptions opts = options;
    if (opts.samples_override) {
        opts.gain_samples = *opts.samples_override;
        opts.covariance_samples = *opts.samples_override;
        opts.moment_samples = *opts.samples_override;
        opts.uncorrelatedness_samples = *opts.samples_override;
    }

    const SeedPolicy seeds{config.seed};
    const ChannelRealization channels =
        draw_realization(config.scenario, config.system, 0, seeds);
    // per-check seeds, disjoint from the channel substreams
    std::uint64_t check_index = 0;
    auto next_seed = [&]() { return seeds.substream_seed(1'000'000 + check_index++, Stream::symbols); };

    // Reduced operating grid: smallest positive and largest amplification,
    // crossed with {0, most negative compression}.
    std::vector<double> alphas;
    {
        double smallest = 0.0, largest = 0.0;
        for (double a : config.alpha_grid)
            if (a > 0.0) {
                if (smallest == 0.0 || a < smallest) smallest = a;
                largest = std::max(largest, a);
            }
        if (smallest == 0.0) smallest = largest = 1.0;
        alphas.push_back(smallest);
        if (largest != smallest) alphas.push_back(largest);
    }
    std::vector<double> rhos{0.0};
    {
        const double most_negative = *std::min_element(config.rho_grid.begin(), config.rho_grid.end());
        if (most_negative < 0.0) rhos.push_back(most_negative);
    }

    ValidationReport report;

    // Repeater input moments: independent of the operating point.
    {
        const double input_power = repeater_input_power(channels, config.system);
        const RepeaterMoments moments =
            estimate_repeater_moments(channels, config.system, opts.moment_samples, next_seed());
        const double refs[3] = {input_power, 2.0 * input_power * input_power,
                                6.0 * input_power * input_power * input_power};
        const ScalarMoment estimates[3] = {moments.m2, moments.m4, moments.m6};
        const double tolerances[3] = {0.01, 0.02, 0.05};
        const char* names[3] = {"m2", "m4", "m6"};
        for (int i = 0; i < 3; ++i) {
            ValidationCheck check;
            check.family = "repeater_moments";
            check.name = names[i];
            check.reference = refs[i];
            check.estimate = estimates[i].value;
            check.error = std::abs(estimates[i].value - refs[i]) / refs[i];
            check.tolerance = tolerances[i];
            check.pass = check.error <= check.tolerance;
            check.num_samples = moments.num_samples;
            report.checks.push_back(check);
        }
    }

    // Third-order cross moment: also operating-point independent. Checked
    // against the consolidated form 2*P_r*psi and, deterministically, the
    // term-by-term expansion against the consolidated one.
    {
        const double p = config.system.ue_power_w;
        const double input_power = repeater_input_power(channels, config.system);
        const CVec psi = p * (channels.ue_bs * channels.ue_repeater.conjugate()).conjugate();
        const CVec consolidated = 2.0 * input_power * psi;

        CVec expanded(psi.size());
        {
            const auto& h = channels.ue_repeater;
            const auto& direct = channels.ue_bs;
            const double sigma_r2 = config.system.repeater_noise_var_w;
            for (Eigen::Index n = 0; n < expanded.size(); ++n) {
                cxd own(0.0, 0.0), pairs(0.0, 0.0), first(0.0, 0.0);
                for (Eigen::Index i = 0; i < h.size(); ++i) {
                    const cxd term = h[i] * std::conj(direct(n, i));
                    first += term;
                    own += std::norm(h[i]) * term;
                    for (Eigen::Index j = 0; j < h.size(); ++j)
                        if (j != i) pairs += std::norm(h[i]) * h[j] * std::conj(direct(n, j));
                }
                expanded[n] = 2.0 * p * p * own + 2.0 * p * p * pairs + 2.0 * p * sigma_r2 * first;
            }
        }
        {
            ValidationCheck check;
            check.family = "cross_third_order";
            check.name = "expanded vs consolidated (deterministic)";
            check.reference = consolidated.norm();
            check.estimate = expanded.norm();
            check.error = (expanded - consolidated).norm() /
                          std::max(consolidated.norm(), 1e-300);
            check.tolerance = 1e-12;
            check.pass = check.error <= check.tolerance;
            check.num_samples = 0;
            report.checks.push_back(check);
        }
        {
            const McEstimate estimate = estimate_cross_third_order_all(
                channels, config.system, opts.covariance_samples, next_seed());
            ValidationCheck check;
            check.family = "cross_third_order";
            check.name = "monte carlo vs consolidated";
            check.reference = consolidated.norm();
            check.estimate = estimate.value.norm();
            check.error = (estimate.value - consolidated).norm() / consolidated.norm();
            check.tolerance = 5.0 / std::sqrt(static_cast<double>(estimate.num_samples));
            check.pass = check.error <= check.tolerance;
            check.num_samples = estimate.num_samples;
            report.checks.push_back(check);
        }
    }

    for (double rho : rhos) {
        for (double alpha : alphas) {
            const SystemParams params = at_operating_point(config.system, {alpha, rho});
            const std::string label = detail::operating_point_label(alpha, rho);
            const BussgangModel model = build_bussgang_model(channels, params);

            {
                const McEstimate estimate =
                    estimate_bussgang(channels, params, opts.gain_samples, next_seed());
                ValidationCheck check;
                check.family = "bussgang_gain";
                check.name = label;
                check.reference = model.gain.norm();
                check.estimate = estimate.value.norm();
                check.error = detail::relative_frobenius_error(estimate.value, model.gain);
                check.tolerance = 0.02;
                check.pass = check.error <= check.tolerance;
                check.num_samples = estimate.num_samples;
                report.checks.push_back(check);
            }
            {
                const McEstimate estimate = estimate_received_cov(
                    channels, params, opts.covariance_samples, next_seed());
                ValidationCheck check;
                check.family = "received_covariance";
                check.name = label;
                check.reference = model.received_cov.norm();
                check.estimate = estimate.value.norm();
                check.error =
                    detail::relative_frobenius_error(estimate.value, model.received_cov);
                check.tolerance = 0.03;
                check.pass = check.error <= check.tolerance;
                check.num_samples = estimate.num_samples;
                report.checks.push_back(check);
            }
            {
                Eigen::SelfAdjointEigenSolver<CMat> eig(model.distortion_cov,
                                                        Eigen::EigenvaluesOnly);
                const double min_eig = eig.eigenvalues().minCoeff();
                const double scale =
                    model.distortion_cov.trace().real() / params.num_bs_antennas;
                ValidationCheck check;
                check.family = "distortion_psd";
                check.name = label;
                check.reference = 0.0;
                check.estimate = min_eig;
                check.error = min_eig < 0.0 ? -min_eig / scale : 0.0;
                check.tolerance = 1e-8;
                check.pass = check.error <= check.tolerance;
                check.num_samples = 0;
                report.checks.push_back(check);
            }
            {
                const McEstimate estimate = estimate_symbol_distortion_correlation(
                    channels, params, model.gain, opts.uncorrelatedness_samples, next_seed());
                ValidationCheck check;
                check.family = "uncorrelatedness";
                check.name = label;
                check.reference = 0.0;
                check.estimate = estimate.value.norm();
                check.error = estimate.value.norm();
                check.tolerance = 3.0 * estimate.standard_error;
                check.pass = check.error <= check.tolerance;
                check.num_samples = estimate.num_samples;
                report.checks.push_back(check);
            }
        }
    }
    return report;
}

inline std::string validation_report_text(const ValidationReport& report) {
    std::ostringstream out;
    out << "validation checks:\n";
    for (const ValidationCheck& check : report.checks) {
        out << (check.pass ? "  [pass] " : "  [FAIL] ") << check.family << " (" << check.name
            << "): error " << check.error << " vs tolerance " << check.tolerance;
        if (check.num_samples > 0) out << " at N=" << check.num_samples;
        out << "\n";
    }
    out << (report.all_pass() ? "all checks passed\n" : "SOME CHECKS FAILED\n");
    return out.str();
}

inline nlohmann::json validation_report_json(const ValidationReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const ValidationCheck& check : report.checks)
        checks.push_back({{"family", check.family},
                          {"name", check.name},
                          {"reference", check.reference},
                          {"estimate", check.estimate},
                          {"error", check.error},
                          {"tolerance", check.tolerance},
                          {"pass", check.pass},
                          {"num_samples", check.num_samples}});
    return {{"checks", checks}, {"all_pass", report.all_pass()}};
}

}  // namespace ramimo
