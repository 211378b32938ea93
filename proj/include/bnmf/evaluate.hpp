#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

#include "bnmf/gibbs.hpp"
#include "bnmf/matrix.hpp"
#include "bnmf/model.hpp"

namespace bnmf {

/// Default threshold below which a factor entry counts as sparse.
inline constexpr double kSparsityThreshold = 0.1;

struct SplitSpec {
    double unobserved_fraction = 0.0;
    std::uint64_t seed = 0;
};

struct HoldoutSplit {
    ObservedMatrix train;
    ObservedMatrix test;
};

/// Metrics of one fitted chain.
struct ExperimentReport {
    ModelKind model = ModelKind::gee;
    std::size_t rank = 0;
    double test_mse = 0.0;
    double train_mse_final = 0.0;
    double w_mean = 0.0;
    double w_sparsity = 0.0;
    std::optional<double> noise_ratio;
    std::optional<double> variance_to_mse;
};

/// Moves ⌊fraction·|observed|⌋ observed cells, chosen uniformly without
/// replacement, from the training mask into the test mask.
HoldoutSplit holdout_split(const ObservedMatrix& data, const SplitSpec& spec);

/// masked_mse of the trace's posterior-mean prediction on the test cells.
double evaluate_prediction(const Trace& trace, const ObservedMatrix& test);

/// Fraction of entries strictly below `threshold`.
double factor_sparsity(const Matrix& w, double threshold = kSparsityThreshold);

/// Mean over the trace's snapshot window of the per-snapshot W sparsity.
double factor_sparsity(const Trace& trace, double threshold = kSparsityThreshold);

/// Arithmetic mean of all entries.
double factor_mean(const Matrix& w);

/// Mean over the trace's snapshot window of the per-snapshot W mean.
double factor_mean(const Trace& trace);

/// Adds N(0, ratio·Var(observed)) to every observed value, clamping negative
/// results to 0. ratio = 0 returns the input unchanged.
ObservedMatrix add_noise(const ObservedMatrix& data, double noise_to_signal, std::uint64_t seed);

/// data_variance / test_mse.
double variance_to_mse(double data_variance, double test_mse);

} // namespace bnmf
