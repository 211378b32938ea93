#include "bnmf/conditionals.hpp"

#include <string>

namespace bnmf {

namespace {

void check_state(const ChainState& state, const ObservedMatrix& data) {
    const FactorPair& f = state.factors;
    if (f.rows() != data.rows() || f.cols() != data.cols()) {
        throw DimensionError("chain state is " + std::to_string(f.rows()) + "x" +
                             std::to_string(f.cols()) + " but data is " +
                             std::to_string(data.rows()) + "x" + std::to_string(data.cols()));
    }
}

} // namespace

std::size_t first_argmax(std::span<const double> values) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

std::optional<TruncNormParams> conditional_from_stats(ModelKind model, const CoordinateStats& st,
                                                      double lambda, double sigma2) {
    // Every model shares the form
    //   σ̃² = σ² / (s + σ²λ·[quadratic prior])
    //   μ̃  = (−λ·penalty + r/σ²) · σ̃²
    // so coinciding rows of the table produce bit-identical parameters.
    bool quadratic = false;
    double penalty = 0.0;
    switch (model) {
    case ModelKind::gee:
        penalty = 1.0;
        break;
    case ModelKind::gl12:
        quadratic = true;
        penalty = st.others_sum;
        break;
    case ModelKind::gl22:
        quadratic = true;
        break;
    case ModelKind::glinf:
        penalty = st.is_max ? 1.0 : 0.0;
        break;
    case ModelKind::gl2inf:
        quadratic = true;
        penalty = st.is_max ? 1.0 : 0.0;
        break;
    }
    const double precision_sum = st.loading_sq + (quadratic ? sigma2 * lambda : 0.0);
    if (!(precision_sum > 0.0)) {
        return std::nullopt;
    }
    const double var = sigma2 / precision_sum;
    const double mean = (-lambda * penalty + st.residual / sigma2) * var;
    return TruncNormParams{mean, var};
}

CoordinateStats w_coordinate_stats(std::size_t m, std::size_t k, const FactorPair& f,
                                   const ObservedMatrix& data) {
    const Matrix& w = f.w();
    const Matrix& z = f.z();
    const std::size_t rank = f.rank();
    if (m >= f.rows() || k >= rank) {
        throw DimensionError("w index out of range");
    }
    CoordinateStats st;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (!data.observed(m, j)) {
            continue;
        }
        double others = 0.0;
        for (std::size_t i = 0; i < rank; ++i) {
            if (i != k) others += w(m, i) * z(i, j);
        }
        const double zkj = z(k, j);
        st.loading_sq += zkj * zkj;
        st.residual += zkj * (data.values()(m, j) - others);
    }
    for (std::size_t i = 0; i < rank; ++i) {
        if (i != k) st.others_sum += w(m, i);
    }
    st.is_max = first_argmax(w.row(m)) == k;
    return st;
}

CoordinateStats z_coordinate_stats(std::size_t k, std::size_t n, const FactorPair& f,
                                   const ObservedMatrix& data) {
    const Matrix& w = f.w();
    const Matrix& z = f.z();
    const std::size_t rank = f.rank();
    if (n >= f.cols() || k >= rank) {
        throw DimensionError("z index out of range");
    }
    CoordinateStats st;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!data.observed(i, n)) {
            continue;
        }
        double others = 0.0;
        for (std::size_t j = 0; j < rank; ++j) {
            if (j != k) others += w(i, j) * z(j, n);
        }
        const double wik = w(i, k);
        st.loading_sq += wik * wik;
        st.residual += wik * (data.values()(i, n) - others);
    }
    std::size_t best = 0;
    for (std::size_t j = 0; j < rank; ++j) {
        if (j != k) st.others_sum += z(j, n);
        if (z(j, n) > z(best, n)) best = j;
    }
    st.is_max = best == k;
    return st;
}

std::optional<TruncNormParams> w_conditional_params(ModelKind model, std::size_t m, std::size_t k,
                                                    const ChainState& state,
                                                    const ObservedMatrix& data,
                                                    const HyperParams& h) {
    check_state(state, data);
    return conditional_from_stats(model, w_coordinate_stats(m, k, state.factors, data),
                                  h.lambda_w, state.sigma2);
}

std::optional<TruncNormParams> z_conditional_params(ModelKind model, std::size_t k, std::size_t n,
                                                    const ChainState& state,
                                                    const ObservedMatrix& data,
                                                    const HyperParams& h) {
    check_state(state, data);
    return conditional_from_stats(model, z_coordinate_stats(k, n, state.factors, data),
                                  h.lambda_z, state.sigma2);
}

InvGammaParams sigma2_conditional_from_sse(double sse, std::size_t observed,
                                           const HyperParams& h) {
    return InvGammaParams{0.5 * static_cast<double>(observed) + h.alpha_sigma,
                          0.5 * sse + h.beta_sigma};
}

InvGammaParams sigma2_conditional_params(const ChainState& state, const ObservedMatrix& data,
                                         const HyperParams& h) {
    check_state(state, data);
    const double sse = masked_sse(data, reconstruct(state.factors));
    return sigma2_conditional_from_sse(sse, data.observed_count(), h);
}

} // namespace bnmf
