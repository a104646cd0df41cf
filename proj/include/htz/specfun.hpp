#pragma once

#include <Eigen/Dense>

namespace htz::specfun {

// Bessel function of the first kind, real order nu >= 0, argument x >= 0.
// Power series for small x, backward recurrence (Miller) with the
// sum-normalization  sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(x) = (x/2)^nu
// in the middle, Hankel asymptotic expansion for large x.
double bessel_j(double nu, double x);

// J_{nu0}(x), J_{nu0+1}(x), ..., J_{nu0+count-1}(x) from one backward sweep.
Eigen::VectorXd bessel_j_ladder(double nu0, int count, double x);

// Gamma function on the positive axis (Lanczos, g = 7, 9 terms).
double gamma_fn(double x);
double log_gamma(double x);

struct GaussRule {
  Eigen::VectorXd nodes;    // ascending in (-1, 1)
  Eigen::VectorXd weights;
};

// Nodes and weights on [-1, 1]; cached per n, safe for concurrent callers.
const GaussRule& gauss_legendre(int n);

// The same rule mapped to [a, b].
GaussRule gauss_legendre_on(int n, double a, double b);

struct HarmonicIndex {
  int d = 2;   // ambient dimension, 2 or 3
  int n = 0;   // degree
  int j = 1;   // 1 <= j <= multiplicity(d, n)
};

int multiplicity(int d, int n);

// Real orthonormal spherical harmonics on S^{d-1}.
// d=2: Y_{0,1} = 1/sqrt(2 pi), Y_{n,1} = cos(n t)/sqrt(pi), Y_{n,2} = sin(n t)/sqrt(pi).
// d=3: j=1 is the zonal m=0 term; j=2m / j=2m+1 carry cos(m p) / sin(m p).
// Points are unit vectors; for d=2 the z component is ignored.
double sph_harmonic(const HarmonicIndex& idx, const Eigen::Vector3d& xi);

// Orthonormalized associated Legendre value
//   sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m(ct),   no Condon-Shortley phase.
double legendre_norm(int n, int m, double ct);

}  // namespace htz::specfun
