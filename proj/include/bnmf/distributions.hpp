#pragma once

#include "bnmf/random.hpp"

namespace bnmf {

/// Normal distribution N(parent_mean, parent_var) truncated to [0, ∞).
///
/// Parameterized by the *parent* variance; a parent precision τ corresponds to
/// parent_var = 1/τ.
struct TruncNormParams {
    double parent_mean = 0.0;
    double parent_var = 1.0;

    /// Throws ParameterError unless the mean is finite and the variance is
    /// finite and strictly positive.
    void validate() const;

    friend bool operator==(const TruncNormParams&, const TruncNormParams&) = default;
};

/// Inverse-Gamma G⁻¹(shape, scale), density ∝ x^(−shape−1) exp(−scale/x).
struct InvGammaParams {
    double shape = 1.0;
    double scale = 1.0;

    void validate() const;

    friend bool operator==(const InvGammaParams&, const InvGammaParams&) = default;
};

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal upper tail Q(x) = 1 − Φ(x), evaluated through erfc.
double normal_upper_tail(double x) noexcept;

/// Inverse Mills ratio φ(x)/Q(x), accurate far into the upper tail.
double inverse_mills_ratio(double x) noexcept;

/// One draw from the truncated normal; always finite and ≥ 0.
///
/// For a standardized lower bound a = −μ/σ above 0.5 the draw uses rejection
/// from a shifted exponential with rate (a + √(a²+4))/2; otherwise plain
/// normal rejection. The exponential branch samples the excess over the bound
/// directly, so deep-tail parents (μ/σ ≪ 0) neither hang nor collapse to 0.
double sample_truncated_normal(const TruncNormParams& p, CounterRng& rng);

/// Mean of the truncated normal, μ + σ·φ(α)/Q(α) with α = −μ/σ.
double truncated_normal_mean(const TruncNormParams& p);

/// CDF of the truncated normal at x.
double truncated_normal_cdf(const TruncNormParams& p, double x);

/// Gamma(shape, 1) draw via Marsaglia–Tsang, boosted for shape < 1.
double sample_standard_gamma(double shape, CounterRng& rng);

/// One inverse-Gamma draw, computed as scale / Gamma(shape, 1).
double sample_inverse_gamma(const InvGammaParams& p, CounterRng& rng);

/// One exponential draw with the given rate (mean 1/rate).
double sample_exponential(double rate, CounterRng& rng);

} // namespace bnmf
