#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bnmf/conditionals.hpp"
#include "bnmf/matrix.hpp"
#include "bnmf/model.hpp"

namespace bnmf {

/// Lower bound applied to every σ² draw.
inline constexpr double kSigma2Floor = 1e-12;

/// Iteration schedule of one chain.
struct Schedule {
    std::size_t iterations = 500;
    std::size_t burn_in = 300;
    std::size_t snapshot_window = 20;

    /// Requires iterations > burn_in and snapshot_window ≤ iterations.
    void validate() const;
};

struct Snapshot {
    std::uint64_t iteration = 0;
    FactorPair factors;
};

/// Per-iteration record of a chain.
struct Trace {
    std::vector<double> train_mse;
    std::vector<double> sigma2_history;
    /// Factors after each of the final `snapshot_window` iterations.
    std::vector<Snapshot> snapshots;
    /// Elementwise mean of WZ over iterations burn_in+1 … T.
    std::optional<Matrix> posterior_mean_prediction;
    std::optional<ChainState> final_state;

    /// Mean σ² over the iterations after burn-in.
    double post_burn_in_sigma2_mean(std::size_t burn_in) const;
};

/// Draws W, Z entrywise from the exponential priors (rates lambda_w,
/// lambda_z) and σ² from the inverse-Gamma prior.
///
/// Draw order: W row-major, then Z row-major, then σ², all from the stream
/// (seed, chain_id).
ChainState initialize(const ObservedMatrix& data, std::size_t rank, ModelKind model,
                      const HyperParams& h, std::uint64_t seed, std::uint64_t chain_id = 0);

/// One systematic-scan Gibbs iteration.
///
/// For k = 0…K−1: every w_mk (m ascending), then every z_kn (n ascending);
/// finally σ². Each draw conditions on the freshest values of all other
/// variables. A residual matrix is rebuilt at entry and touched up after
/// each coordinate, giving O(|observed|·K) work per sweep.
ChainState sweep(ChainState state, const ObservedMatrix& data, ModelKind model,
                 const HyperParams& h);

/// initialize followed by schedule.iterations sweeps.
Trace run_chain(const ObservedMatrix& data, std::size_t rank, ModelKind model,
                const HyperParams& h, const Schedule& schedule, std::uint64_t seed,
                std::uint64_t chain_id = 0);

} // namespace bnmf
