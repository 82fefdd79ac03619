#include "platoon/matrix.hpp"

#include <cmath>
#include <string>

#include "platoon/errors.hpp"

namespace platoon {

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ParameterError("multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aip * b(p, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw ParameterError("multiply: vector length mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

double asymmetry(const Matrix& a) {
  if (!a.square()) throw ParameterError("asymmetry: matrix is not square");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

Cholesky::Cholesky(const Matrix& spd) : factor_(spd.rows(), spd.cols()) {
  if (!spd.square()) throw ParameterError("Cholesky: matrix is not square");
  const std::size_t n = spd.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = spd(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= factor_(j, p) * factor_(j, p);
    if (!(d > 0.0)) {
      throw NumericalError("Cholesky: non-positive pivot at row " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    factor_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= factor_(i, p) * factor_(j, p);
      factor_(i, j) = s / ljj;
    }
  }
}

std::vector<double> Cholesky::solve(std::span<const double> rhs) const {
  const std::size_t n = factor_.rows();
  if (rhs.size() != n) throw ParameterError("Cholesky::solve: rhs length mismatch");
  std::vector<double> y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < i; ++p) y[i] -= factor_(i, p) * y[p];
    y[i] /= factor_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t p = i + 1; p < n; ++p) y[i] -= factor_(p, i) * y[p];
    y[i] /= factor_(i, i);
  }
  return y;
}

BandMatrix::BandMatrix(std::size_t n, std::size_t half_bandwidth)
    : n_(n), b_(half_bandwidth), width_(2 * half_bandwidth + 1), bands_(n * width_, 0.0) {}

BandMatrix BandMatrix::from_dense(const Matrix& dense) {
  if (!dense.square()) throw ParameterError("BandMatrix: matrix is not square");
  const std::size_t n = dense.rows();
  std::size_t b = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dense(i, j) != 0.0) b = std::max(b, i > j ? i - j : j - i);
  BandMatrix band(n, b);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > b ? i - b : 0); j < std::min(n, i + b + 1); ++j) band.set(i, j, dense(i, j));
  return band;
}

double BandMatrix::at(std::size_t i, std::size_t j) const noexcept {
  if ((i > j ? i - j : j - i) > b_) return 0.0;
  return bands_[i * width_ + (j + b_ - i)];
}

void BandMatrix::set(std::size_t i, std::size_t j, double v) noexcept {
  bands_[i * width_ + (j + b_ - i)] = v;
}

void BandMatrix::multiply_add(std::span<const double> x, std::span<double> y, double alpha) const noexcept {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i > b_ ? i - b_ : 0;
    const std::size_t j1 = std::min(n_, i + b_ + 1);
    const double* row = bands_.data() + i * width_ + (j0 + b_ - i);
    double s = 0.0;
    for (std::size_t j = j0; j < j1; ++j) s += row[j - j0] * x[j];
    y[i] += alpha * s;
  }
}

}  // namespace platoon
