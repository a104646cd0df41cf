#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "htz/quad.hpp"
#include "htz/radial.hpp"

namespace htz::sphereop {

enum class Provenance { closed_form, hankel_numeric };

// The symbol seen from the Fourier side: profile(rho) = ahat(|xi|) under the
// unitary normalization
//   ahat(rho) = rho^{-(d-2)/2} int_0^inf a(r) J_{(d-2)/2}(rho r) r^{d/2} dr.
// Operator builders only ever evaluate it on [0, 2]: the kernel argument is
// a chord of the unit sphere.
struct SymbolTransform {
  int d = 2;
  std::function<double(double)> profile;
  Provenance provenance = Provenance::closed_form;
  bool singular_at_zero = false;  // integrable blow-up at rho = 0
  double zero_exponent = 0.0;     // profile ~ c rho^z near 0 when singular
  std::string name;
};

// Closed forms for the stock symbol families, numeric Hankel transform for
// anything else.  Power symbols need mu < d for the transform to exist.
SymbolTransform from_radial(const radial::RadialSymbol& a, int d);

SymbolTransform constant_transform(int d, double c);

// One-shot numeric route: the Hankel integral above evaluated with the
// oscillation-block machinery (substituted so block edges track J's period).
// Serves as the oracle for the closed forms and as the generic fallback.
double fourier_radial(const radial::RadialSymbol& a, int d, double rho);

enum class Basis { nodal, harmonic };

struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  Basis basis = Basis::nodal;
  int d = 2;
  int nmax = -1;      // harmonic only
  int grid_size = 0;  // nodal only
  bool hermitian = false;
};

// Nystrom matrix M_kl = pi/(2 pi)^{d/2} ahat(|xi_k - xi_l|) sqrt(w_k w_l);
// the symmetric weight split keeps Hermiticity exact.  A singular profile
// gets its diagonal from the mean of the kernel over one grid cell.
OperatorMatrix build_nodal(const SymbolTransform& T,
                           const quad::SphereGrid& grid);

// Harmonic-basis matrix <T Y_{n,j}, Y_{m,l}> for degrees through nmax via
// double sphere quadrature on the grid (resolution must be >= 4 nmax).
// Assembled as B K B^T in row blocks of K, so the N x N kernel is never
// stored whole.
OperatorMatrix build_harmonic(const SymbolTransform& T, int d, int nmax,
                              const quad::SphereGrid& grid);

// Degree of each harmonic-basis row, in the (n, j) enumeration order used by
// build_harmonic.
Eigen::VectorXi harmonic_degrees(int d, int nmax);

// d = 2 circular convolution: eigenvalue of the operator on the Fourier mode
// pair of order n,
//   lambda_n = (1/2) int_0^{2pi} ahat(2 |sin(tau/2)|) cos(n tau) dtau.
Eigen::VectorXd circle_eigs(const SymbolTransform& T, int nmax);

struct EigenResult {
  Eigen::VectorXd eigenvalues;  // sorted descending by |value|
  Eigen::MatrixXcd vectors;     // columns, same order; empty unless requested
  bool converged = true;
  int sweeps = 0;
};

// Cyclic complex Jacobi.  Terminates when the off-diagonal Frobenius mass
// falls below 1e-12 of the input's Frobenius norm; converged goes false if
// the sweep limit is hit first.
EigenResult eigen_hermitian(const OperatorMatrix& M, bool want_vectors = false);

// Spectral norm (largest |eigenvalue|); Hermitian input required.
double operator_norm(const OperatorMatrix& M);

std::string matrix_csv(const OperatorMatrix& M);
std::string spectrum_csv(const Eigen::VectorXd& eigs);

}  // namespace htz::sphereop
