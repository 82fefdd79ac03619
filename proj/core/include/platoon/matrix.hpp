#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace platoon {

/// Row-major dense matrix with value semantics.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <typename U>
  DenseMatrix<U> cast() const {
    DenseMatrix<U> out(rows_, cols_);
    std::transform(data_.begin(), data_.end(), out.data().begin(),
                   [](const T& v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;
using IntMatrix = DenseMatrix<std::int64_t>;

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);
double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);

/// Largest |a(i,j) - a(j,i)| over the matrix; requires a square input.
double asymmetry(const Matrix& a);

/// Cholesky factor of a symmetric positive definite matrix.
class Cholesky {
 public:
  /// Throws NumericalError if a pivot is not positive.
  explicit Cholesky(const Matrix& spd);

  std::vector<double> solve(std::span<const double> rhs) const;
  std::size_t size() const noexcept { return factor_.rows(); }

 private:
  Matrix factor_;  // lower triangular
};

/// Banded storage (half bandwidth b): entry (i, j) kept when |i - j| <= b.
/// Used on the simulation hot path where the grounded Laplacian has bandwidth k.
class BandMatrix {
 public:
  BandMatrix() = default;
  BandMatrix(std::size_t n, std::size_t half_bandwidth);

  /// Picks the smallest bandwidth that holds every nonzero of `dense`.
  static BandMatrix from_dense(const Matrix& dense);

  std::size_t size() const noexcept { return n_; }
  std::size_t half_bandwidth() const noexcept { return b_; }

  double at(std::size_t i, std::size_t j) const noexcept;
  void set(std::size_t i, std::size_t j, double v) noexcept;

  /// y += alpha * A x
  void multiply_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const noexcept;

 private:
  std::size_t n_ = 0;
  std::size_t b_ = 0;
  std::size_t width_ = 1;
  std::vector<double> bands_;  // n_ rows of 2b+1 entries, column offset j - i + b
};

}  // namespace platoon
