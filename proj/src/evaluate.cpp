#include "bnmf/evaluate.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "bnmf/random.hpp"

namespace bnmf {

HoldoutSplit holdout_split(const ObservedMatrix& data, const SplitSpec& spec) {
    const double f = spec.unobserved_fraction;
    if (!(f >= 0.0 && f < 1.0)) {
        throw ConfigError("unobserved fraction must lie in [0, 1), got " + std::to_string(f));
    }
    std::vector<std::size_t> observed;
    observed.reserve(data.observed_count());
    const auto mask = data.mask().flat();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] != 0) observed.push_back(i);
    }
    const auto n_test =
        static_cast<std::size_t>(std::floor(f * static_cast<double>(observed.size())));
    if (n_test >= observed.size()) {
        throw ConfigError("holdout fraction leaves no training entries");
    }

    // Partial Fisher–Yates: the first n_test slots become the test set.
    CounterRng rng(spec.seed, 0);
    for (std::size_t i = 0; i < n_test; ++i) {
        const std::size_t j = i + rng.uniform_below(observed.size() - i);
        std::swap(observed[i], observed[j]);
    }

    Mask train_mask = data.mask();
    Mask test_mask(data.rows(), data.cols(), 0);
    for (std::size_t i = 0; i < n_test; ++i) {
        train_mask.flat()[observed[i]] = 0;
        test_mask.flat()[observed[i]] = 1;
    }
    return HoldoutSplit{ObservedMatrix(data.values(), std::move(train_mask)),
                        ObservedMatrix::possibly_empty(data.values(), std::move(test_mask))};
}

double evaluate_prediction(const Trace& trace, const ObservedMatrix& test) {
    if (!trace.posterior_mean_prediction) {
        throw ConfigError("trace has no posterior-mean prediction");
    }
    if (test.observed_count() == 0) {
        throw EmptyMaskError("test mask is empty");
    }
    return masked_mse(test, *trace.posterior_mean_prediction);
}

double factor_sparsity(const Matrix& w, double threshold) {
    if (w.size() == 0) {
        return 0.0;
    }
    std::size_t below = 0;
    for (double v : w.flat()) {
        if (v < threshold) ++below;
    }
    return static_cast<double>(below) / static_cast<double>(w.size());
}

double factor_sparsity(const Trace& trace, double threshold) {
    if (trace.snapshots.empty()) {
        throw ConfigError("trace has no factor snapshots");
    }
    double sum = 0.0;
    for (const Snapshot& s : trace.snapshots) sum += factor_sparsity(s.factors.w(), threshold);
    return sum / static_cast<double>(trace.snapshots.size());
}

double factor_mean(const Matrix& w) {
    if (w.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    for (double v : w.flat()) sum += v;
    return sum / static_cast<double>(w.size());
}

double factor_mean(const Trace& trace) {
    if (trace.snapshots.empty()) {
        throw ConfigError("trace has no factor snapshots");
    }
    double sum = 0.0;
    for (const Snapshot& s : trace.snapshots) sum += factor_mean(s.factors.w());
    return sum / static_cast<double>(trace.snapshots.size());
}

ObservedMatrix add_noise(const ObservedMatrix& data, double noise_to_signal, std::uint64_t seed) {
    if (!(noise_to_signal >= 0.0) || !std::isfinite(noise_to_signal)) {
        throw ConfigError("noise-to-signal ratio must be finite and nonnegative");
    }
    if (noise_to_signal == 0.0) {
        return data;
    }
    const double sd = std::sqrt(noise_to_signal * observed_variance(data));
    CounterRng rng(seed, 0);
    Matrix noisy = data.values();
    const auto mask = data.mask().flat();
    auto v = noisy.flat();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (mask[i] == 0) continue;
        const double x = v[i] + sd * rng.standard_normal();
        v[i] = x > 0.0 ? x : 0.0;
    }
    return ObservedMatrix(std::move(noisy), data.mask());
}

double variance_to_mse(double data_variance, double test_mse) {
    if (!(test_mse > 0.0)) {
        throw NumericalError("variance-to-MSE ratio undefined for zero MSE");
    }
    return data_variance / test_mse;
}

} // namespace bnmf
