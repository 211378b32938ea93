#include "bnmf/gibbs.hpp"

#include <algorithm>
#include <string>

#include "bnmf/distributions.hpp"

namespace bnmf {

namespace {

struct ObservedIndex {
    std::vector<std::vector<std::size_t>> by_row;
    std::vector<std::vector<std::size_t>> by_col;

    explicit ObservedIndex(const ObservedMatrix& data)
        : by_row(data.rows()), by_col(data.cols()) {
        for (std::size_t m = 0; m < data.rows(); ++m) {
            for (std::size_t n = 0; n < data.cols(); ++n) {
                if (data.observed(m, n)) {
                    by_row[m].push_back(n);
                    by_col[n].push_back(m);
                }
            }
        }
    }
};

// R = A − WZ on observed cells, 0 elsewhere.
Matrix observed_residual(const ObservedMatrix& data, const FactorPair& f) {
    Matrix r = reconstruct(f);
    auto rv = r.flat();
    const auto a = data.values().flat();
    const auto mask = data.mask().flat();
    for (std::size_t i = 0; i < rv.size(); ++i) {
        rv[i] = mask[i] != 0 ? a[i] - rv[i] : 0.0;
    }
    return r;
}

bool needs_others_sum(ModelKind model) { return model == ModelKind::gl12; }
bool needs_max(ModelKind model) { return model == ModelKind::glinf || model == ModelKind::gl2inf; }

double draw_coordinate(ModelKind model, const CoordinateStats& st, double lambda, double sigma2,
                       CounterRng& rng, const char* which, std::size_t a, std::size_t b) {
    const auto params = conditional_from_stats(model, st, lambda, sigma2);
    try {
        if (!params) {
            // Nothing observed informs this coordinate: fall back to the
            // exponential prior. Quadratic priors only get here when λ = 0,
            // which sample_exponential rejects.
            return sample_exponential(lambda, rng);
        }
        return sample_truncated_normal(*params, rng);
    } catch (const ParameterError& e) {
        throw NumericalError(std::string(which) + "[" + std::to_string(a) + "," +
                             std::to_string(b) + "] conditional: " + e.what());
    }
}

} // namespace

void Schedule::validate() const {
    if (iterations <= burn_in) {
        throw ConfigError("iterations (" + std::to_string(iterations) +
                          ") must exceed burn-in (" + std::to_string(burn_in) + ")");
    }
    if (snapshot_window > iterations) {
        throw ConfigError("snapshot window (" + std::to_string(snapshot_window) +
                          ") exceeds iterations (" + std::to_string(iterations) + ")");
    }
}

double Trace::post_burn_in_sigma2_mean(std::size_t burn_in) const {
    if (burn_in >= sigma2_history.size()) {
        throw ConfigError("no iterations after burn-in");
    }
    double sum = 0.0;
    for (std::size_t t = burn_in; t < sigma2_history.size(); ++t) {
        sum += sigma2_history[t];
    }
    return sum / static_cast<double>(sigma2_history.size() - burn_in);
}

ChainState initialize(const ObservedMatrix& data, std::size_t rank, ModelKind /*model*/,
                      const HyperParams& h, std::uint64_t seed, std::uint64_t chain_id) {
    h.validate();
    if (rank == 0) {
        throw ConfigError("latent dimension K must be at least 1");
    }
    CounterRng rng(seed, chain_id);
    Matrix w(data.rows(), rank);
    Matrix z(rank, data.cols());
    for (double& v : w.flat()) v = sample_exponential(h.lambda_w, rng);
    for (double& v : z.flat()) v = sample_exponential(h.lambda_z, rng);
    const double sigma2 =
        std::max(sample_inverse_gamma({h.alpha_sigma, h.beta_sigma}, rng), kSigma2Floor);
    return ChainState{FactorPair(std::move(w), std::move(z)), sigma2, 0, rng};
}

ChainState sweep(ChainState state, const ObservedMatrix& data, ModelKind model,
                 const HyperParams& h) {
    FactorPair& f = state.factors;
    if (f.rows() != data.rows() || f.cols() != data.cols()) {
        throw DimensionError("chain state does not match data shape");
    }
    const ObservedIndex obs(data);
    Matrix resid = observed_residual(data, f);
    Matrix& w = f.w_mut();
    Matrix& z = f.z_mut();
    const std::size_t rank = f.rank();
    const double sigma2 = state.sigma2;
    CounterRng& rng = state.rng;

    for (std::size_t k = 0; k < rank; ++k) {
        for (std::size_t m = 0; m < data.rows(); ++m) {
            const double old = w(m, k);
            CoordinateStats st;
            for (std::size_t j : obs.by_row[m]) {
                const double zkj = z(k, j);
                st.loading_sq += zkj * zkj;
                st.residual += zkj * (resid(m, j) + old * zkj);
            }
            if (needs_others_sum(model)) {
                for (std::size_t i = 0; i < rank; ++i) {
                    if (i != k) st.others_sum += w(m, i);
                }
            }
            if (needs_max(model)) {
                st.is_max = first_argmax(w.row(m)) == k;
            }
            const double fresh = draw_coordinate(model, st, h.lambda_w, sigma2, rng, "w", m, k);
            const double delta = fresh - old;
            w(m, k) = fresh;
            if (delta != 0.0) {
                for (std::size_t j : obs.by_row[m]) resid(m, j) -= delta * z(k, j);
            }
        }
        for (std::size_t n = 0; n < data.cols(); ++n) {
            const double old = z(k, n);
            CoordinateStats st;
            for (std::size_t i : obs.by_col[n]) {
                const double wik = w(i, k);
                st.loading_sq += wik * wik;
                st.residual += wik * (resid(i, n) + old * wik);
            }
            if (needs_others_sum(model) || needs_max(model)) {
                std::size_t best = 0;
                for (std::size_t j = 0; j < rank; ++j) {
                    if (j != k) st.others_sum += z(j, n);
                    if (z(j, n) > z(best, n)) best = j;
                }
                st.is_max = best == k;
            }
            const double fresh = draw_coordinate(model, st, h.lambda_z, sigma2, rng, "z", k, n);
            const double delta = fresh - old;
            z(k, n) = fresh;
            if (delta != 0.0) {
                for (std::size_t i : obs.by_col[n]) resid(i, n) -= delta * w(i, k);
            }
        }
    }

    double sse = 0.0;
    for (double r : resid.flat()) sse += r * r;
    const InvGammaParams post = sigma2_conditional_from_sse(sse, data.observed_count(), h);
    double fresh_sigma2;
    try {
        fresh_sigma2 = sample_inverse_gamma(post, rng);
    } catch (const ParameterError& e) {
        throw NumericalError(std::string("sigma2 conditional: ") + e.what());
    }
    state.sigma2 = std::max(fresh_sigma2, kSigma2Floor);
    ++state.iteration;
    return state;
}

Trace run_chain(const ObservedMatrix& data, std::size_t rank, ModelKind model,
                const HyperParams& h, const Schedule& schedule, std::uint64_t seed,
                std::uint64_t chain_id) {
    schedule.validate();
    ChainState state = initialize(data, rank, model, h, seed, chain_id);

    Trace trace;
    trace.train_mse.reserve(schedule.iterations);
    trace.sigma2_history.reserve(schedule.iterations);
    Matrix prediction_sum(data.rows(), data.cols(), 0.0);
    const std::size_t snapshot_from = schedule.iterations - schedule.snapshot_window;

    for (std::size_t t = 0; t < schedule.iterations; ++t) {
        state = sweep(std::move(state), data, model, h);
        const Matrix wz = reconstruct(state.factors);
        trace.train_mse.push_back(masked_mse(data, wz));
        trace.sigma2_history.push_back(state.sigma2);
        if (t >= schedule.burn_in) {
            auto acc = prediction_sum.flat();
            const auto cur = wz.flat();
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cur[i];
        }
        if (t >= snapshot_from) {
            trace.snapshots.push_back(Snapshot{state.iteration, state.factors});
        }
    }

    const auto kept = static_cast<double>(schedule.iterations - schedule.burn_in);
    for (double& v : prediction_sum.flat()) v /= kept;
    trace.posterior_mean_prediction = std::move(prediction_sum);
    trace.final_state = std::move(state);
    return trace;
}

} // namespace bnmf
