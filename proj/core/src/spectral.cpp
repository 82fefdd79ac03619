#include "platoon/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

BoundLink link(std::string relation, double lhs, double rhs) {
  return BoundLink{std::move(relation), lhs, rhs, lhs <= rhs + kBoundTolerance};
}

bool all_hold(const std::vector<BoundLink>& chain) {
  return std::all_of(chain.begin(), chain.end(), [](const BoundLink& l) { return l.holds; });
}

}  // namespace

double Spectrum::min() const {
  if (values.empty()) throw ParameterError("Spectrum::min: empty spectrum");
  return values.front();
}

double Spectrum::max() const {
  if (values.empty()) throw ParameterError("Spectrum::max: empty spectrum");
  return values.back();
}

BoundCertificate certify_lambda_min(const GroundedSystem& gs, const Spectrum& spectrum) {
  const double min_beta = gs.min_beta();
  const double max_beta = gs.max_beta();
  const double boundary_ratio = static_cast<double>(gs.boundary_size()) / static_cast<double>(gs.follower_count());
  const double lambda1 = spectrum.min();

  BoundCertificate cert;
  cert.lower = min_beta;
  cert.upper = boundary_ratio;
  cert.witnessed = lambda1;
  cert.chain = {
      link("min_beta <= lambda_1", min_beta, lambda1),
      link("lambda_1 <= boundary/followers", lambda1, boundary_ratio),
      link("boundary/followers <= max_beta", boundary_ratio, max_beta),
      link("max_beta <= references", max_beta, static_cast<double>(gs.reference_count())),
  };
  cert.holds = all_hold(cert.chain);
  return cert;
}

BoundCertificate certify_lambda_max(const GroundedSystem& gs, const Spectrum& spectrum) {
  const double dmax = gs.dmax_followers();
  const double lambda_max = spectrum.max();
  BoundCertificate cert;
  cert.lower = dmax;
  cert.upper = 2.0 * dmax;
  cert.witnessed = lambda_max;
  cert.chain = {
      link("dmax_followers <= lambda_max", dmax, lambda_max),
      link("lambda_max <= 2 dmax_followers", lambda_max, 2.0 * dmax),
  };
  cert.holds = all_hold(cert.chain);
  return cert;
}

FormationSpectrum map_formation_spectrum(const Spectrum& spectrum) {
  constexpr double kDoubleRootWindow = 1e-12;
  const std::size_t m = spectrum.size();
  FormationSpectrum fs;
  fs.source = spectrum;
  fs.values.resize(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lambda = spectrum.values[i];
    if (!(lambda > 0.0)) {
      throw ParameterError("map_formation_spectrum: eigenvalue " + std::to_string(lambda) +
                           " is not positive; the platoon is not grounded");
    }
    // Roots of s^2 + lambda s + lambda.
    const double half = 0.5 * lambda;
    if (std::abs(lambda - 4.0) < kDoubleRootWindow) {
      fs.values[i] = {-2.0, 0.0};
      fs.values[m + i] = {-2.0, 0.0};
    } else if (lambda > 4.0) {
      const double root = half * std::sqrt(1.0 - 4.0 / lambda);
      fs.values[i] = {-half - root, 0.0};
      fs.values[m + i] = {-half + root, 0.0};
    } else {
      const double im = half * std::sqrt(4.0 / lambda - 1.0);
      fs.values[i] = {-half, -im};
      fs.values[m + i] = {-half, im};
    }
  }
  return fs;
}

double spectral_radius_formation(const FormationSpectrum& fs) {
  if (fs.values.empty()) throw ParameterError("spectral_radius_formation: empty spectrum");
  double rho = 0.0;
  for (const auto& v : fs.values) rho = std::max(rho, std::abs(v));
  return rho;
}

double spectral_radius_closed_form(double lambda_max) {
  if (lambda_max < 4.0) throw ParameterError("spectral_radius_closed_form: requires lambda_max >= 4");
  return 0.5 * lambda_max * (1.0 + std::sqrt(1.0 - 4.0 / lambda_max));
}

Matrix build_formation_matrix(const Matrix& lg, double kp, double ku) {
  if (!lg.square()) throw ParameterError("build_formation_matrix: Lg is not square");
  const std::size_t m = lg.rows();
  Matrix b(2 * m, 2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    b(i, m + i) = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      b(m + i, j) = -kp * lg(i, j);
      b(m + i, m + j) = -ku * lg(i, j);
    }
  }
  return b;
}

Matrix build_formation_matrix(const GroundedSystem& gs) { return build_formation_matrix(gs.lg_real()); }

double stochasticity_defect(const GroundedSystem& gs) {
  const Cholesky chol(gs.lg_real());
  const Matrix l12 = gs.l12_real();
  const std::size_t nf = l12.rows();
  std::vector<double> row_sums(nf, 0.0);
  std::vector<double> column(nf);
  for (std::size_t c = 0; c < l12.cols(); ++c) {
    for (std::size_t r = 0; r < nf; ++r) column[r] = l12(r, c);
    const auto x = chol.solve(column);
    for (std::size_t r = 0; r < nf; ++r) row_sums[r] -= x[r];
  }
  double defect = 0.0;
  for (double s : row_sums) defect = std::max(defect, std::abs(s - 1.0));
  return defect;
}

}  // namespace platoon
