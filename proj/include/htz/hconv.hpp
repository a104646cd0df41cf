#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htz/hspace.hpp"
#include "htz/quad.hpp"
#include "htz/sphereop.hpp"

namespace htz::hconv {

using Complex = std::complex<double>;

// Bounded multiplier on the sphere.  sup_abs is the caller's bound; builders
// sample the grid and refuse symbols that break it.
struct SphereSymbol {
  std::function<Complex(const Eigen::Vector3d&)> eval;
  double sup_abs = 1.0;
  std::string name;
};

SphereSymbol constant_symbol(double c);
SphereSymbol cosine_symbol(int d);     // cos of the polar angle
SphereSymbol upper_indicator(int d);   // upper half of the sphere
SphereSymbol offset_sine(int d);       // 2 + sin(polar angle), strictly positive

// max |a| over the grid nodes
double grid_sup(const SphereSymbol& a, const quad::SphereGrid& grid);

// Multiplication operator in the value basis: diag(a(xi_k)).  Products and
// commutators of these are exact, which is the algebra the limit operators
// inherit.
sphereop::OperatorMatrix mult_nodal(const SphereSymbol& a,
                                    const quad::SphereGrid& grid);

// Harmonic compression <a Y_{n,j}, Y_{m,l}> through grid quadrature.
// Hermitian whenever a is real on the grid.
sphereop::OperatorMatrix mult_matrix(const SphereSymbol& a, int d, int nmax,
                                     const quad::SphereGrid& grid);

struct MultResult {
  hspace::SphereFunction field;
  bool aliased = false;    // the product spilled past the projection band
  double alias_defect = 0.0;
};

// Pointwise product a.phi on the grid, projected back onto harmonics of
// degree up to max_degree(phi) + extra_degrees.
MultResult mult_apply(const SphereSymbol& a, const hspace::SphereFunction& phi,
                      const quad::SphereGrid& grid, int extra_degrees = 8);

// Plane-wave image (I a)(x) of a bounded symbol, by grid quadrature.  Kept
// for inspection; operator work goes through the multiplication path.
Complex symbol_kernel(const SphereSymbol& a, const quad::SphereGrid& grid,
                      const Eigen::Vector3d& x);

// Volume average of two fields, c_d R^{-1} int_{|y|<R} u(x-y) v(y) dy,
// evaluated exactly per radius through the polar factorization of the ball
// integral, then extrapolated in 1/R across the ladder.  The returned field
// carries the sphere density of the limit candidate.
struct ConvolveResult {
  hspace::SphereFunction field;   // extrapolated limit
  hspace::SphereFunction last;    // raw density at the largest radius
  double residual = 0.0;          // distance between successive extrapolants
  bool converged = false;
  std::vector<double> radii;
  std::vector<double> ladder_gaps;  // ||density(R_k) - density(R_{k-1})||
};

ConvolveResult hconvolve(const hspace::SphereFunction& u,
                         const hspace::SphereFunction& v,
                         const std::vector<double>& radii);

// Density of the finite-R convolution alone, no extrapolation.
hspace::SphereFunction hconvolve_at(const hspace::SphereFunction& u,
                                    const hspace::SphereFunction& v, double R);

// Distance, radius by radius, between the convolution density and the
// pointwise product of the factor densities.  The product side is the limit
// the ladder is converging to, so the residuals fall like 1/R.
struct FactorizationReport {
  std::vector<double> radii;
  std::vector<double> residuals;
  double final_ratio = 0.0;  // last residual over the one before it
};

FactorizationReport verify_factorization(const hspace::SphereFunction& u,
                                         const hspace::SphereFunction& v,
                                         const std::vector<double>& radii);

// Commutator, product rule, norm ladder, and spectral containment for a pair
// of symbols, in both representations.  Truncation commutators concentrate
// at the band edge: their spectral norm stays put while the dimension-
// normalized Frobenius norm falls, so both are reported.
struct AlgebraReport {
  double nodal_commutator = 0.0;      // max |[A,B]| entry, value basis
  double nodal_product_defect = 0.0;  // max |AB - (ab)| entry, value basis
  std::vector<int> degree_ladder;
  std::vector<double> commutator_norms;     // ||[T_a,T_b]||_F / sqrt(dim)
  std::vector<double> commutator_spectral;  // plain operator norm, edge bound
  std::vector<double> norm_ladder;       // operator norm of T_a per degree cap
  double sup_symbol = 0.0;               // grid sup of |a|
  double spectrum_distance = 0.0;  // top-cap eigenvalues vs sampled range of a
};

AlgebraReport algebra_checks(const SphereSymbol& a, const SphereSymbol& b,
                             int d, int nmax, const quad::SphereGrid& grid);

}  // namespace htz::hconv
