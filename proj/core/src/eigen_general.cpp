#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "platoon/errors.hpp"
#include "platoon/spectral.hpp"

// Balancing, elimination to upper Hessenberg form and the Francis double-shift
// QR iteration follow the classic EISPACK-derived formulation. Indices inside
// this file are 1-based through the `at` accessor to keep the recurrences
// readable next to their textbook form.

namespace platoon {
namespace {

class OneBased {
 public:
  explicit OneBased(Matrix& m) : m_(m) {}
  double& operator()(int i, int j) { return m_(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)); }

 private:
  Matrix& m_;
};

void balance(Matrix& m) {
  constexpr double radix = 2.0;
  constexpr double radix_sq = radix * radix;
  const int n = static_cast<int>(m.rows());
  OneBased a(m);
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 1; i <= n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 1; j <= n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix_sq;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix_sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 1; j <= n; ++j) a(i, j) *= g;
        for (int j = 1; j <= n; ++j) a(j, i) *= f;
      }
    }
  }
}

void to_hessenberg(Matrix& m) {
  const int n = static_cast<int>(m.rows());
  OneBased a(m);
  for (int mm = 2; mm < n; ++mm) {
    double x = 0.0;
    int i = mm;
    for (int j = mm; j <= n; ++j) {
      if (std::abs(a(j, mm - 1)) > std::abs(x)) {
        x = a(j, mm - 1);
        i = j;
      }
    }
    if (i != mm) {
      for (int j = mm - 1; j <= n; ++j) std::swap(a(i, j), a(mm, j));
      for (int j = 1; j <= n; ++j) std::swap(a(j, i), a(j, mm));
    }
    if (x != 0.0) {
      for (i = mm + 1; i <= n; ++i) {
        double y = a(i, mm - 1);
        if (y == 0.0) continue;
        y /= x;
        a(i, mm - 1) = y;
        for (int j = mm; j <= n; ++j) a(i, j) -= y * a(mm, j);
        for (int j = 1; j <= n; ++j) a(j, mm) += y * a(j, i);
      }
    }
  }
  for (int i = 3; i <= n; ++i)
    for (int j = 1; j <= i - 2; ++j) a(i, j) = 0.0;
}

std::vector<std::complex<double>> hessenberg_qr(Matrix& m) {
  constexpr int kMaxIterations = 60;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const int n = static_cast<int>(m.rows());
  OneBased a(m);
  std::vector<double> wr(static_cast<std::size_t>(n) + 1), wi(static_cast<std::size_t>(n) + 1);

  double anorm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a(i, j));

  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn--] = 0.0;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn] = z;
            wi[nn - 1] = -z;
          }
          nn -= 2;
        } else {
          if (its == kMaxIterations) {
            throw NumericalError("eig_general: QR iteration did not converge within " +
                                 std::to_string(kMaxIterations) + " iterations");
          }
          if (its == 10 || its == 20) {
            // Exceptional shift.
            t += x;
            for (int i = 1; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int mm = nn - 2;
          for (; mm >= l; --mm) {
            z = a(mm, mm);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(mm + 1, mm) + a(mm, mm + 1);
            q = a(mm + 1, mm + 1) - z - r - s;
            r = a(mm + 2, mm + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (mm == l) break;
            const double u = std::abs(a(mm, mm - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(mm - 1, mm - 1)) + std::abs(z) + std::abs(a(mm + 1, mm + 1)));
            if (u <= eps * v) break;
          }
          for (int i = mm + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != mm + 2) a(i, i - 3) = 0.0;
          }
          for (int k = mm; k <= nn - 1; ++k) {
            if (k != mm) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == mm) {
              if (l != mm) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = std::min(nn, k + 3);
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace

std::vector<std::complex<double>> eig_general(const Matrix& m) {
  if (!m.square()) throw ParameterError("eig_general: matrix is not square");
  if (m.rows() == 0) return {};
  Matrix a = m;
  balance(a);
  to_hessenberg(a);
  auto values = hessenberg_qr(a);
  std::sort(values.begin(), values.end(), [](const auto& u, const auto& v) {
    return u.real() != v.real() ? u.real() < v.real() : u.imag() < v.imag();
  });
  return values;
}

}  // namespace platoon
