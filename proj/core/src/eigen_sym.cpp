#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "platoon/errors.hpp"
#include "platoon/spectral.hpp"

namespace platoon {
namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void require_symmetric(const Matrix& m, double tolerance) {
  if (!m.square()) throw ParameterError("eig_sym: matrix is not square");
  double scale = 1.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  if (asymmetry(m) > tolerance * scale) throw ParameterError("eig_sym: matrix is not symmetric");
}

// Zeroes a(p, q) with one rotation; a is kept fully symmetric.
void rotate(Matrix& a, std::optional<Matrix>& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);
  const std::size_t n = a.rows();

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double arp = a(r, p);
    const double arq = a(r, q);
    a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
    a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
  }
  if (v) {
    Matrix& vm = *v;
    for (std::size_t r = 0; r < n; ++r) {
      const double vrp = vm(r, p);
      const double vrq = vm(r, q);
      vm(r, p) = vrp - s * (vrq + tau * vrp);
      vm(r, q) = vrq + s * (vrp - tau * vrq);
    }
  }
}

}  // namespace

Spectrum eig_sym(const Matrix& m, const EigOptions& options) {
  require_symmetric(m, options.symmetry_tolerance);
  const std::size_t n = m.rows();
  Matrix a = m;
  // Symmetrize exactly so the rotation updates can mirror entries.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));

  std::optional<Matrix> v;
  if (options.vectors) v = Matrix::identity(n);

  const double target = options.tolerance * frobenius_norm(a);
  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep == options.max_sweeps) {
      throw NumericalError("eig_sym: Jacobi iteration did not converge within " +
                           std::to_string(options.max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (a(p, q) != 0.0) rotate(a, v, p, q);
    ++sweep;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  Spectrum out;
  out.values.reserve(n);
  for (std::size_t i : order) out.values.push_back(a(i, i));
  if (v) {
    Matrix sorted(n, n);
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 0; r < n; ++r) sorted(r, c) = (*v)(r, order[c]);
    out.vectors = std::move(sorted);
  }
  return out;
}

Spectrum eig_sym(const IntMatrix& m, const EigOptions& options) {
  return eig_sym(m.cast<double>(), options);
}

std::vector<double> eig_sym_bisection(const Matrix& m) {
  require_symmetric(m, 1e-12);
  const std::size_t n = m.rows();
  if (n == 0) return {};
  Matrix a = m;

  // Householder reduction to tridiagonal form, trailing block updated in place.
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t len = n - k - 1;
    std::vector<double> v(len);
    double norm_x = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = a(k + 1 + i, k);
      norm_x += v[i] * v[i];
    }
    norm_x = std::sqrt(norm_x);
    if (norm_x == 0.0) continue;
    const double alpha = -std::copysign(norm_x, v[0]);
    v[0] -= alpha;
    double vtv = 0.0;
    for (double x : v) vtv += x * x;
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;

    std::vector<double> p(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
      p[i] = beta * s;
    }
    double ptv = 0.0;
    for (std::size_t i = 0; i < len; ++i) ptv += p[i] * v[i];
    const double kappa = 0.5 * beta * ptv;
    std::vector<double> w(len);
    for (std::size_t i = 0; i < len; ++i) w[i] = p[i] - kappa * v[i];
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j) a(k + 1 + i, k + 1 + j) -= v[i] * w[j] + w[i] * v[j];

    a(k + 1, k) = a(k, k + 1) = alpha;
    for (std::size_t i = 1; i < len; ++i) a(k + 1 + i, k) = a(k, k + 1 + i) = 0.0;
  }

  std::vector<double> d(n), e2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i);
  for (std::size_t i = 1; i < n; ++i) e2[i] = a(i, i - 1) * a(i, i - 1);

  // Gershgorin enclosure.
  double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::sqrt(e2[i]) : 0.0) + (i + 1 < n ? std::sqrt(e2[i + 1]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  const double pivot_floor = 1e-300;

  // Number of eigenvalues strictly below x.
  auto count_below = [&](double x) {
    std::size_t count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
      if (q == 0.0) q = pivot_floor;
      q = d[i] - x - e2[i] / q;
      if (q < 0.0) ++count;
    }
    return count;
  };

  std::vector<double> values(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    double a_lo = lo - 1e-12 * scale;
    double a_hi = hi + 1e-12 * scale;
    for (int it = 0; it < 400 && (a_hi - a_lo) > 4e-16 * scale; ++it) {
      const double mid = 0.5 * (a_lo + a_hi);
      if (mid <= a_lo || mid >= a_hi) break;
      if (count_below(mid) > idx) a_hi = mid;
      else a_lo = mid;
    }
    values[idx] = 0.5 * (a_lo + a_hi);
  }
  return values;
}

}  // namespace platoon
