#include "bnmf/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bnmf/errors.hpp"

namespace bnmf {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
// Below this standardized bound plain normal rejection accepts with
// probability ≥ Q(0.5) ≈ 0.31; above it the exponential proposal wins.
constexpr double kExpProposalCutoff = 0.5;
// Above this point the continued fraction is used for the Mills ratio.
constexpr double kMillsSwitch = 5.0;

// Continued fraction tail c(x) = 1/(x + 2/(x + 3/(x + ...))), so that
// φ(x)/Q(x) = x + c(x).
double mills_tail(double x) noexcept {
    double tail = 0.0;
    for (int j = 200; j >= 2; --j) {
        tail = j / (x + tail);
    }
    return 1.0 / (x + tail);
}

double log_upper_tail(double x) noexcept {
    if (x < kMillsSwitch) {
        return std::log(normal_upper_tail(x));
    }
    return -0.5 * x * x + std::log(kInvSqrt2Pi) - std::log(x + mills_tail(x));
}

} // namespace

void TruncNormParams::validate() const {
    if (!std::isfinite(parent_mean)) {
        throw ParameterError("truncated normal: parent mean is not finite (" +
                             std::to_string(parent_mean) + ")");
    }
    if (!std::isfinite(parent_var) || !(parent_var > 0.0)) {
        throw ParameterError("truncated normal: parent variance must be finite and positive (" +
                             std::to_string(parent_var) + ")");
    }
}

void InvGammaParams::validate() const {
    if (!std::isfinite(shape) || !(shape > 0.0)) {
        throw ParameterError("inverse gamma: shape must be positive (" + std::to_string(shape) +
                             ")");
    }
    if (!std::isfinite(scale) || !(scale > 0.0)) {
        throw ParameterError("inverse gamma: scale must be positive (" + std::to_string(scale) +
                             ")");
    }
}

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_upper_tail(double x) noexcept { return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0); }

double inverse_mills_ratio(double x) noexcept {
    if (x < kMillsSwitch) {
        return normal_pdf(x) / normal_upper_tail(x);
    }
    return x + mills_tail(x);
}

double sample_truncated_normal(const TruncNormParams& p, CounterRng& rng) {
    p.validate();
    const double sd = std::sqrt(p.parent_var);
    const double a = -p.parent_mean / sd;

    if (a <= kExpProposalCutoff) {
        for (;;) {
            const double z = rng.standard_normal();
            if (z >= a) {
                const double x = p.parent_mean + sd * z;
                return x > 0.0 ? x : 0.0;
            }
        }
    }

    // Robert (1995) one-sided tail sampler on the excess e = z − a ≥ 0.
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double excess = -std::log(rng.uniform_open()) / rate;
        const double d = a + excess - rate;
        if (std::log(rng.uniform_open()) <= -0.5 * d * d) {
            return sd * excess;
        }
    }
}

double truncated_normal_mean(const TruncNormParams& p) {
    p.validate();
    const double sd = std::sqrt(p.parent_var);
    const double a = -p.parent_mean / sd;
    if (a >= kMillsSwitch) {
        // μ + σ(a + c(a)) with μ = −σa collapses to σ·c(a); no cancellation.
        return sd * mills_tail(a);
    }
    return p.parent_mean + sd * inverse_mills_ratio(a);
}

double truncated_normal_cdf(const TruncNormParams& p, double x) {
    p.validate();
    if (x <= 0.0) {
        return 0.0;
    }
    const double sd = std::sqrt(p.parent_var);
    const double a = -p.parent_mean / sd;
    const double z = (x - p.parent_mean) / sd;
    return -std::expm1(log_upper_tail(z) - log_upper_tail(a));
}

double sample_standard_gamma(double shape, CounterRng& rng) {
    if (!std::isfinite(shape) || !(shape > 0.0)) {
        throw ParameterError("gamma: shape must be positive (" + std::to_string(shape) + ")");
    }
    if (shape < 1.0) {
        const double g = sample_standard_gamma(shape + 1.0, rng);
        return g * std::pow(rng.uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.standard_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
            return d * v;
        }
    }
}

double sample_inverse_gamma(const InvGammaParams& p, CounterRng& rng) {
    p.validate();
    const double g = sample_standard_gamma(p.shape, rng);
    return p.scale / g;
}

double sample_exponential(double rate, CounterRng& rng) {
    if (!std::isfinite(rate) || !(rate > 0.0)) {
        throw ParameterError("exponential: rate must be positive (" + std::to_string(rate) + ")");
    }
    return -std::log(rng.uniform_open()) / rate;
}

} // namespace bnmf
