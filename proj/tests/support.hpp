#pragma once

// Shared helpers for unit and acceptance tests: a brute-force log joint of
// likelihood × prior used as an oracle for the conditional parameters.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <optional>
#include <vector>

#include <unistd.h>

#include "bnmf/conditionals.hpp"
#include "bnmf/matrix.hpp"
#include "bnmf/model.hpp"

namespace bnmf::testing {

// Log prior of one factor laid out as groups (rows of W, columns of Z),
// up to an additive constant.
inline double log_prior_group(ModelKind model, const std::vector<double>& g, double lambda) {
    double sum = 0.0, sq = 0.0, mx = 0.0;
    for (double v : g) {
        sum += v;
        sq += v * v;
        mx = std::max(mx, v);
    }
    switch (model) {
    case ModelKind::gee: return -lambda * sum;
    case ModelKind::gl12: return -0.5 * lambda * sum * sum;
    case ModelKind::gl22: return -0.5 * lambda * sq;
    case ModelKind::glinf: return -lambda * mx;
    case ModelKind::gl2inf: return -0.5 * lambda * (sq + 2.0 * mx);
    }
    return 0.0;
}

// Gaussian log likelihood over observed cells plus both factor priors.
inline double log_joint(ModelKind model, const ObservedMatrix& a, const Matrix& w, const Matrix& z,
                        double sigma2, const HyperParams& h) {
    const std::size_t m_rows = w.rows(), k_rank = w.cols(), n_cols = z.cols();
    double sse = 0.0;
    for (std::size_t m = 0; m < m_rows; ++m) {
        for (std::size_t n = 0; n < n_cols; ++n) {
            if (!a.observed(m, n)) continue;
            double pred = 0.0;
            for (std::size_t k = 0; k < k_rank; ++k) pred += w(m, k) * z(k, n);
            const double r = a.values()(m, n) - pred;
            sse += r * r;
        }
    }
    double lp = -sse / (2.0 * sigma2);
    for (std::size_t m = 0; m < m_rows; ++m) {
        std::vector<double> g(w.row(m).begin(), w.row(m).end());
        lp += log_prior_group(model, g, h.lambda_w);
    }
    for (std::size_t n = 0; n < n_cols; ++n) {
        std::vector<double> g(k_rank);
        for (std::size_t k = 0; k < k_rank; ++k) g[k] = z(k, n);
        lp += log_prior_group(model, g, h.lambda_z);
    }
    return lp;
}

inline bool uses_indicator(ModelKind model) {
    return model == ModelKind::glinf || model == ModelKind::gl2inf;
}

// Grid over which the oracle is compared. For max-norm priors the range
// keeps the coordinate on the same side of its group's maximum, since the
// conditional fixes the indicator at the current value.
inline std::vector<double> oracle_grid(ModelKind model, double current, const std::vector<double>& group,
                                       std::size_t index, std::size_t points) {
    double lo = 0.0, hi = 6.0;
    if (uses_indicator(model)) {
        double other_max = 0.0;
        for (std::size_t i = 0; i < group.size(); ++i)
            if (i != index) other_max = std::max(other_max, group[i]);
        const bool is_max = first_argmax(group) == index;
        if (is_max) {
            lo = other_max;
            hi = other_max + 6.0;
        } else {
            lo = 0.0;
            hi = other_max;
        }
        (void)current;
    }
    std::vector<double> xs(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    }
    return xs;
}

// Largest deviation from its mean of log_joint(x) − log TN(x | μ̃, σ̃²) over
// the grid, for coordinate w_mk (is_w) or z_kn.
inline double oracle_deviation(ModelKind model, const ChainState& state, const ObservedMatrix& a,
                               const HyperParams& h, bool is_w, std::size_t i, std::size_t j,
                               std::size_t points = 200) {
    const auto params = is_w ? w_conditional_params(model, i, j, state, a, h)
                             : z_conditional_params(model, i, j, state, a, h);
    if (!params) return std::numeric_limits<double>::infinity();
    Matrix w = state.factors.w();
    Matrix z = state.factors.z();
    std::vector<double> group;
    std::size_t index = 0;
    if (is_w) {
        group.assign(w.row(i).begin(), w.row(i).end());
        index = j;
    } else {
        for (std::size_t k = 0; k < z.rows(); ++k) group.push_back(z(k, j));
        index = i;
    }
    const double current = is_w ? w(i, j) : z(i, j);
    const auto xs = oracle_grid(model, current, group, index, points);
    std::vector<double> diffs;
    diffs.reserve(xs.size());
    for (double x : xs) {
        (is_w ? w(i, j) : z(i, j)) = x;
        const double lj = log_joint(model, a, w, z, state.sigma2, h);
        const double d = x - params->parent_mean;
        const double ltn = -d * d / (2.0 * params->parent_var);
        diffs.push_back(lj - ltn);
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double worst = 0.0;
    for (double d : diffs) worst = std::max(worst, std::abs(d - mean));
    return worst;
}

// Every regular file under `dir`, keyed by its relative path, with its bytes.
inline std::map<std::string, std::string> directory_contents(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        out[std::filesystem::relative(entry.path(), dir).string()] = bytes.str();
    }
    return out;
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("bnmf_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace bnmf::testing
