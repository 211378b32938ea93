#pragma once

#include <cstddef>
#include <optional>

#include "bnmf/distributions.hpp"
#include "bnmf/matrix.hpp"
#include "bnmf/model.hpp"

namespace bnmf {

/// Sufficient statistics for one factor coordinate (w_mk or z_kn), all sums
/// taken over observed cells only.
///
/// For w_mk, with j ranging over observed columns of row m:
///   loading_sq = Σ_j z_kj²
///   residual   = Σ_j z_kj (a_mj − Σ_{i≠k} w_mi z_ij)
///   others_sum = Σ_{i≠k} w_mi                (squared-L1 prior only)
///   is_max     = w_mk is the first maximum of row m of W (max-norm priors);
///                for z_kn, the first maximum of column n of Z
struct CoordinateStats {
    double loading_sq = 0.0;
    double residual = 0.0;
    double others_sum = 0.0;
    bool is_max = false;
};

/// Parent parameters of the truncated-normal conditional for one coordinate.
///
/// Returns std::nullopt when the conditional is degenerate: no observed cell
/// informs the coordinate (loading_sq == 0) and the prior contributes no
/// quadratic term. The sampler then draws from the prior.
std::optional<TruncNormParams> conditional_from_stats(ModelKind model, const CoordinateStats& st,
                                                      double lambda, double sigma2);

/// First index holding the maximum of `values`; ties go to the lowest index.
std::size_t first_argmax(std::span<const double> values) noexcept;

/// Statistics for w_mk computed from scratch.
CoordinateStats w_coordinate_stats(std::size_t m, std::size_t k, const FactorPair& f,
                                   const ObservedMatrix& data);

/// Statistics for z_kn computed from scratch.
CoordinateStats z_coordinate_stats(std::size_t k, std::size_t n, const FactorPair& f,
                                   const ObservedMatrix& data);

/// Conditional of w_mk given everything else in `state`.
std::optional<TruncNormParams> w_conditional_params(ModelKind model, std::size_t m, std::size_t k,
                                                    const ChainState& state,
                                                    const ObservedMatrix& data,
                                                    const HyperParams& h);

/// Conditional of z_kn given everything else in `state`.
std::optional<TruncNormParams> z_conditional_params(ModelKind model, std::size_t k, std::size_t n,
                                                    const ChainState& state,
                                                    const ObservedMatrix& data,
                                                    const HyperParams& h);

/// Inverse-Gamma conditional of σ² from an observed-cell SSE and count.
InvGammaParams sigma2_conditional_from_sse(double sse, std::size_t observed,
                                           const HyperParams& h);

/// Inverse-Gamma conditional of σ² given the factors in `state`.
InvGammaParams sigma2_conditional_params(const ChainState& state, const ObservedMatrix& data,
                                         const HyperParams& h);

} // namespace bnmf
