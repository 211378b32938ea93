#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bnmf/errors.hpp"

namespace bnmf {

/// Dense row-major matrix with value semantics.
template <typename T> class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("matrix storage does not match its shape");
        }
    }

    /// Builds from nested rows; all rows must have equal length.
    static DenseMatrix from_rows(const std::vector<std::vector<T>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        std::vector<T> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) {
                throw DimensionError("ragged rows in matrix literal");
            }
            data.insert(data.end(), row.begin(), row.end());
        }
        return DenseMatrix(r, c, std::move(data));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }

    std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    std::span<T> flat() noexcept { return data_; }
    std::span<const T> flat() const noexcept { return data_; }

    bool same_shape(const auto& other) const noexcept {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;
using Mask = DenseMatrix<std::uint8_t>;

/// Data matrix A together with its observation mask O.
///
/// Values at cells where the mask is 0 carry no meaning and are never read by
/// any loss, conditional or statistic.
class ObservedMatrix {
  public:
    /// Validates shape agreement, finite nonnegative observed values and a
    /// non-empty mask.
    ObservedMatrix(Matrix values, Mask mask);

    /// Fully observed matrix.
    explicit ObservedMatrix(Matrix values);

    /// Same checks as the constructor except an all-zero mask is accepted.
    /// Used for held-out test sets, which may legitimately be empty.
    static ObservedMatrix possibly_empty(Matrix values, Mask mask);

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }
    const Matrix& values() const noexcept { return values_; }
    const Mask& mask() const noexcept { return mask_; }
    bool observed(std::size_t r, std::size_t c) const noexcept { return mask_(r, c) != 0; }
    std::size_t observed_count() const noexcept { return observed_count_; }

    friend bool operator==(const ObservedMatrix&, const ObservedMatrix&) = default;

  private:
    ObservedMatrix(Matrix values, Mask mask, bool allow_empty);

    Matrix values_;
    Mask mask_;
    std::size_t observed_count_ = 0;
};

/// Nonnegative factors W (M×K) and Z (K×N).
class FactorPair {
  public:
    FactorPair(Matrix w, Matrix z);

    std::size_t rank() const noexcept { return w_.cols(); }
    std::size_t rows() const noexcept { return w_.rows(); }
    std::size_t cols() const noexcept { return z_.cols(); }

    const Matrix& w() const noexcept { return w_; }
    const Matrix& z() const noexcept { return z_; }

    // Mutable access for the sampler. Callers keep entries nonnegative.
    Matrix& w_mut() noexcept { return w_; }
    Matrix& z_mut() noexcept { return z_; }

    friend bool operator==(const FactorPair&, const FactorPair&) = default;

  private:
    Matrix w_;
    Matrix z_;
};

/// The product WZ.
Matrix reconstruct(const FactorPair& f);

/// Σ (a_mn − pred_mn)² over observed cells.
double masked_sse(const ObservedMatrix& a, const Matrix& pred);

/// masked_sse divided by the number of observed cells.
double masked_mse(const ObservedMatrix& a, const Matrix& pred);

/// Population variance of the observed values.
double observed_variance(const ObservedMatrix& a);

} // namespace bnmf
