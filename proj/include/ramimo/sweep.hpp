#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "ramimo/bussgang.hpp"
#include "ramimo/channel.hpp"
#include "ramimo/combining.hpp"
#include "ramimo/scenario.hpp"
#include "ramimo/seed.hpp"

// Sweep over (amplification, compression) grids, Monte-Carlo over channel
// realizations. One channel draw per realization is shared by every grid
// cell (common random numbers), so curves differ only through the operating
// point and the combiner flavor.

namespace ramimo {

struct SweepSpec {
    std::vector<double> alpha_grid{1.0};            // amplification gains, may include 0
    std::vector<double> rho_grid{0.0};              // compression values <= 0
    int num_realizations = 1;
    Scenario scenario;
    SystemParams base_params;                       // amp_gain/compression overridden per cell
    std::vector<CombinerFlavor> flavors{CombinerFlavor::da, CombinerFlavor::dua};
    std::uint64_t master_seed = 0;
    int num_threads = 0;                            // 0 = hardware concurrency
    std::size_t sample_retention_limit = 10000;     // max cells for which samples are kept
};

inline void validate(const SweepSpec& spec) {
    validate(spec.scenario);
    validate(spec.base_params);
    if (spec.alpha_grid.empty()) throw std::domain_error("alpha_grid must be non-empty");
    if (spec.rho_grid.empty()) throw std::domain_error("rho_grid must be non-empty");
    if (spec.flavors.empty()) throw std::domain_error("flavors must be non-empty");
    if (spec.num_realizations < 1) throw std::domain_error("num_realizations must be >= 1");
    if (spec.num_threads < 0) throw std::domain_error("num_threads must be >= 0");
    for (double alpha : spec.alpha_grid)
        if (!(alpha >= 0.0)) throw std::domain_error("alpha grid values must be >= 0");
    for (double rho : spec.rho_grid)
        if (!(rho <= 0.0)) throw std::domain_error("rho grid values must be <= 0");
}

struct SweepCell {
    double alpha = 0.0;
    double rho = 0.0;
    CombinerFlavor flavor = CombinerFlavor::da;
    double mean_sum_se = 0.0;          // bits/s/Hz, averaged over realizations
    double std_sum_se = 0.0;           // sample standard deviation
    std::vector<double> samples;       // per-realization sum SE; empty when not retained
};

/// Cells ordered by (rho, flavor, alpha) ascending, the CSV row order.
struct SweepResult {
    std::vector<SweepCell> cells;
    int num_realizations = 0;
    bool samples_retained = false;
    SweepSpec spec;
};

/// Sum SE over all UEs for one realization at one operating point. The model
/// is always the true one; the flavor only decides how combiners are formed.
inline double evaluate_cell(const ChannelRealization& channels, const SystemParams& params,
                            CombinerFlavor flavor) {
    const BussgangModel model = build_bussgang_model(channels, params);
    const CombinerSet combiners = make_combiners(channels, params, model, flavor);
    return evaluate_se(combiners, model).sum_bits;
}

using ProgressFn = std::function<void(int completed, int total)>;

/// Runs the full sweep. Deterministic: the result depends only on the spec
/// (never on the worker count or on completion order), because realization r
/// always uses substreams keyed by (master_seed, r) and aggregation walks
/// realizations in index order.
inline SweepResult run_sweep(const SweepSpec& spec, const ProgressFn& progress = {}) {
    validate(spec);

    std::vector<double> alphas = spec.alpha_grid;
    std::vector<double> rhos = spec.rho_grid;
    std::vector<CombinerFlavor> flavors = spec.flavors;
    std::sort(alphas.begin(), alphas.end());
    std::sort(rhos.begin(), rhos.end());
    std::sort(flavors.begin(), flavors.end());
    flavors.erase(std::unique(flavors.begin(), flavors.end()), flavors.end());

    const std::size_t cells_per_realization = rhos.size() * flavors.size() * alphas.size();
    const int total = spec.num_realizations;
    const SeedPolicy seeds{spec.master_seed};

    std::vector<std::vector<double>> per_realization(static_cast<std::size_t>(total));

    std::atomic<int> next{0};
    std::atomic<int> completed{0};
    std::mutex reporting;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= total) return;
            try {
                const ChannelRealization channels =
                    draw_realization(spec.scenario, spec.base_params,
                                     static_cast<std::uint64_t>(r), seeds);
                std::vector<double> values;
                values.reserve(cells_per_realization);
                for (double rho : rhos) {
                    for (CombinerFlavor flavor : flavors) {
                        for (double alpha : alphas) {
                            try {
                                const SystemParams params =
                                    at_operating_point(spec.base_params, {alpha, rho});
                                values.push_back(evaluate_cell(channels, params, flavor));
                            } catch (const std::exception& e) {
                                std::ostringstream msg;
                                msg << "cell evaluation failed at realization " << r
                                    << ", alpha=" << alpha << ", rho=" << rho << ": " << e.what();
                                throw numerical_error(msg.str());
                            }
                        }
                    }
                }
                per_realization[static_cast<std::size_t>(r)] = std::move(values);
            } catch (...) {
                std::lock_guard lock(reporting);
                if (!failure) failure = std::current_exception();
                return;
            }
            const int done = completed.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(reporting);
                progress(done, total);
            }
        }
    };

    int num_workers = spec.num_threads > 0
                          ? spec.num_threads
                          : static_cast<int>(std::thread::hardware_concurrency());
    num_workers = std::clamp(num_workers, 1, total);
    if (num_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(num_workers));
        for (int i = 0; i < num_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.spec = spec;
    result.num_realizations = total;
    result.samples_retained = cells_per_realization <= spec.sample_retention_limit;
    result.cells.resize(cells_per_realization);

    std::size_t cell = 0;
    for (double rho : rhos) {
        for (CombinerFlavor flavor : flavors) {
            for (double alpha : alphas) {
                SweepCell& out = result.cells[cell];
                out.alpha = alpha;
                out.rho = rho;
                out.flavor = flavor;

                double sum = 0.0;
                double lo = per_realization[0][cell];
                double hi = lo;
                for (int r = 0; r < total; ++r) {
                    const double v = per_realization[static_cast<std::size_t>(r)][cell];
                    sum += v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                out.mean_sum_se = sum / total;
                double sq = 0.0;
                for (int r = 0; r < total; ++r) {
                    const double d =
                        per_realization[static_cast<std::size_t>(r)][cell] - out.mean_sum_se;
                    sq += d * d;
                }
                out.std_sum_se = total > 1 ? std::sqrt(sq / (total - 1)) : 0.0;

                const double slack = 1e-12 * std::max({std::abs(lo), std::abs(hi), 1.0});
                if (!std::isfinite(out.mean_sum_se) || out.mean_sum_se < 0.0 ||
                    out.mean_sum_se < lo - slack || out.mean_sum_se > hi + slack)
                    throw numerical_error("sweep cell mean is out of range");
                if (result.samples_retained) {
                    out.samples.reserve(static_cast<std::size_t>(total));
                    for (int r = 0; r < total; ++r)
                        out.samples.push_back(per_realization[static_cast<std::size_t>(r)][cell]);
                }
                ++cell;
            }
        }
    }
    return result;
}

}  // namespace ramimo
