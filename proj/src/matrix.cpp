#include "bnmf/matrix.hpp"

#include <cmath>
#include <string>

namespace bnmf {

ObservedMatrix::ObservedMatrix(Matrix values, Mask mask)
    : ObservedMatrix(std::move(values), std::move(mask), false) {}

ObservedMatrix ObservedMatrix::possibly_empty(Matrix values, Mask mask) {
    return ObservedMatrix(std::move(values), std::move(mask), true);
}

ObservedMatrix::ObservedMatrix(Matrix values, Mask mask, bool allow_empty)
    : values_(std::move(values)), mask_(std::move(mask)) {
    if (!values_.same_shape(mask_)) {
        throw DimensionError("values are " + std::to_string(values_.rows()) + "x" +
                             std::to_string(values_.cols()) + " but mask is " +
                             std::to_string(mask_.rows()) + "x" + std::to_string(mask_.cols()));
    }
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < cols(); ++c) {
            if (mask_(r, c) == 0) {
                continue;
            }
            mask_(r, c) = 1;
            const double v = values_(r, c);
            if (!std::isfinite(v)) {
                throw DomainError("non-finite observed value at (" + std::to_string(r) + "," +
                                  std::to_string(c) + ")");
            }
            if (v < 0.0) {
                throw DomainError("negative observed value at (" + std::to_string(r) + "," +
                                  std::to_string(c) + ")");
            }
            ++observed_count_;
        }
    }
    if (observed_count_ == 0 && !allow_empty) {
        throw EmptyMaskError("observed matrix has no observed entries");
    }
}

ObservedMatrix::ObservedMatrix(Matrix values)
    : ObservedMatrix(values, Mask(values.rows(), values.cols(), 1)) {}

FactorPair::FactorPair(Matrix w, Matrix z) : w_(std::move(w)), z_(std::move(z)) {
    if (w_.cols() == 0 || w_.cols() != z_.rows()) {
        throw DimensionError("factor shapes do not conform: W is " + std::to_string(w_.rows()) +
                             "x" + std::to_string(w_.cols()) + ", Z is " +
                             std::to_string(z_.rows()) + "x" + std::to_string(z_.cols()));
    }
    for (double v : w_.flat()) {
        if (!(v >= 0.0)) throw DomainError("W has a negative or NaN entry");
    }
    for (double v : z_.flat()) {
        if (!(v >= 0.0)) throw DomainError("Z has a negative or NaN entry");
    }
}

Matrix reconstruct(const FactorPair& f) {
    const Matrix& w = f.w();
    const Matrix& z = f.z();
    Matrix out(w.rows(), z.cols(), 0.0);
    for (std::size_t m = 0; m < w.rows(); ++m) {
        auto out_row = out.row(m);
        for (std::size_t k = 0; k < w.cols(); ++k) {
            const double wmk = w(m, k);
            if (wmk == 0.0) {
                continue;
            }
            auto z_row = z.row(k);
            for (std::size_t n = 0; n < z.cols(); ++n) {
                out_row[n] += wmk * z_row[n];
            }
        }
    }
    return out;
}

double masked_sse(const ObservedMatrix& a, const Matrix& pred) {
    if (!a.values().same_shape(pred)) {
        throw DimensionError("prediction shape does not match data");
    }
    double sse = 0.0;
    const auto values = a.values().flat();
    const auto mask = a.mask().flat();
    const auto p = pred.flat();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i] != 0) {
            const double d = values[i] - p[i];
            sse += d * d;
        }
    }
    return sse;
}

double masked_mse(const ObservedMatrix& a, const Matrix& pred) {
    const double sse = masked_sse(a, pred);
    if (a.observed_count() == 0) {
        throw EmptyMaskError("mean squared error over an empty mask");
    }
    return sse / static_cast<double>(a.observed_count());
}

double observed_variance(const ObservedMatrix& a) {
    const auto values = a.values().flat();
    const auto mask = a.mask().flat();
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i] != 0) mean += values[i];
    }
    const auto n = static_cast<double>(a.observed_count());
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (mask[i] != 0) {
            const double d = values[i] - mean;
            ss += d * d;
        }
    }
    return ss / n;
}

} // namespace bnmf
