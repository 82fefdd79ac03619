#pragma once

// Symmetric eigensolvers, the grounded-Laplacian eigenvalue bound
// certificates, and the map from Lg eigenvalues to the spectrum of the
// second-order formation matrix.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "platoon/matrix.hpp"
#include "platoon/topology.hpp"

namespace platoon {

/// Ascending eigenvalues; column i of `vectors` (when present) pairs with values[i].
struct Spectrum {
  std::vector<double> values;
  std::optional<Matrix> vectors;

  std::size_t size() const noexcept { return values.size(); }
  double min() const;
  double max() const;
};

struct EigOptions {
  bool vectors = false;
  /// Stop once the off-diagonal Frobenius norm drops below tolerance * ||A||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
  /// Inputs with |a_ij - a_ji| above this times max(1, max|a|) are rejected.
  double symmetry_tolerance = 1e-12;
};

/// Cyclic Jacobi. Throws ParameterError on non-symmetric input and
/// NumericalError when max_sweeps is exhausted.
Spectrum eig_sym(const Matrix& m, const EigOptions& options = {});
Spectrum eig_sym(const IntMatrix& m, const EigOptions& options = {});

/// Householder tridiagonalization followed by Sturm-sequence bisection.
/// Values only, ascending. Shares no code with eig_sym.
std::vector<double> eig_sym_bisection(const Matrix& m);

/// Eigenvalues of a general real square matrix: Hessenberg reduction and
/// Francis double-shift QR. Sorted by (real, imag).
std::vector<std::complex<double>> eig_general(const Matrix& m);

/// One relation `lhs <= rhs` in a bound chain.
struct BoundLink {
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct BoundCertificate {
  double lower = 0.0;
  double upper = 0.0;
  double witnessed = 0.0;
  bool holds = false;
  std::vector<BoundLink> chain;
};

inline constexpr double kBoundTolerance = 1e-9;

/// min beta <= lambda_1 <= |boundary|/|F| <= max beta <= |R|
BoundCertificate certify_lambda_min(const GroundedSystem& gs, const Spectrum& spectrum);

/// d_max^F <= lambda_max <= 2 d_max^F
BoundCertificate certify_lambda_max(const GroundedSystem& gs, const Spectrum& spectrum);

/// Eigenvalues of the formation matrix. The first half holds, for each
/// Lg eigenvalue lambda (ascending), the root -lambda/2 (1 + sqrt(1 - 4/lambda));
/// the second half the root with the minus sign. Conjugate roots are kept with
/// the first half carrying the negative imaginary part.
struct FormationSpectrum {
  std::vector<std::complex<double>> values;
  Spectrum source;
};

/// Throws ParameterError when any eigenvalue is <= 0.
FormationSpectrum map_formation_spectrum(const Spectrum& spectrum);

double spectral_radius_formation(const FormationSpectrum& fs);

/// (lambda_max / 2)(1 + sqrt(1 - 4 / lambda_max)) for lambda_max >= 4.
double spectral_radius_closed_form(double lambda_max);

/// State ordering [positions; velocities]:
///   [ 0        I      ]
///   [ -kp Lg   -ku Lg ]
Matrix build_formation_matrix(const Matrix& lg, double kp = 1.0, double ku = 1.0);
Matrix build_formation_matrix(const GroundedSystem& gs);

/// max_i |rowsum_i(-Lg^{-1} L12) - 1|, solved column by column.
double stochasticity_defect(const GroundedSystem& gs);

}  // namespace platoon
