#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bnmf/evaluate.hpp"
#include "bnmf/gibbs.hpp"
#include "bnmf/model.hpp"

namespace bnmf {

/// Grid over models × ranks × (fractions | noise ratios) × repeats.
struct GridConfig {
    std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
    std::vector<std::size_t> ranks{10};
    std::vector<double> fractions{0.6, 0.7, 0.8};
    std::vector<double> noise_ratios{0.0, 0.1, 0.2, 0.5, 1.0};
    std::size_t repeats = 10;
    Schedule schedule;
    HyperParams hyper;
    std::uint64_t seed = 0;
    /// 0 means "use default_thread_count()".
    std::size_t threads = 0;

    void validate() const;
};

/// One chain of a grid. Fields that do not apply to a protocol are left at 0.
struct GridRun {
    ModelKind model = ModelKind::gee;
    std::size_t rank = 0;
    double fraction = 0.0;
    double noise_ratio = 0.0;
    std::size_t repeat = 0;
    double data_variance = 0.0;
    double sigma2_mean = 0.0;
    ExperimentReport report;
};

/// Mean over repeats of every GridRun sharing (model, rank, fraction, noise_ratio).
struct GridCell {
    ModelKind model = ModelKind::gee;
    std::size_t rank = 0;
    double fraction = 0.0;
    double noise_ratio = 0.0;
    std::size_t repeats = 0;
    double data_variance = 0.0;
    double test_mse = 0.0;
    double train_mse_final = 0.0;
    double w_mean = 0.0;
    double w_sparsity = 0.0;
    double sigma2_mean = 0.0;
    double variance_to_mse = 0.0;
};

/// Seed of the holdout split for (fraction, repeat); shared across models,
/// ranks and noise ratios so every model sees the same split.
std::uint64_t split_seed(std::uint64_t base, double fraction, std::size_t repeat);

/// Seed of one chain; independent of the noise ratio, so a noise-0 cell
/// reproduces the plain holdout cell exactly.
std::uint64_t chain_seed(std::uint64_t base, ModelKind model, std::size_t rank, double fraction,
                         std::size_t repeat);

/// Seed of the noise draw for (ratio, repeat).
std::uint64_t noise_seed(std::uint64_t base, double ratio, std::size_t repeat);

/// Threads from BNMF_THREADS, else hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs task(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Held-out prediction protocol: split, fit on train, score on test.
std::vector<GridRun> run_holdout_grid(const ObservedMatrix& data, const GridConfig& cfg);

/// Noise protocol on the first configured fraction: add noise, split, fit,
/// score. Variance-to-MSE uses the observed variance of the noise-free data.
std::vector<GridRun> run_noise_grid(const ObservedMatrix& data, const GridConfig& cfg);

/// Fit on all observed data; records training fit and W statistics over
/// the snapshot window.
std::vector<GridRun> run_rank_sweep(const ObservedMatrix& data, const GridConfig& cfg);

/// Groups runs into cells (canonical order: model, rank, fraction, ratio).
std::vector<GridCell> aggregate(const std::vector<GridRun>& runs);

} // namespace bnmf
