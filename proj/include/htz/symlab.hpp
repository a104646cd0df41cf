#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "htz/hspace.hpp"
#include "htz/quad.hpp"
#include "htz/radial.hpp"
#include "htz/sphereop.hpp"

namespace htz::symlab {

// Smooth radial window: 1 on [0, 2], exp-bump ramp down to 0 at r0 > 2.
struct CutoffWindow {
  explicit CutoffWindow(double outer = 3.0);
  double r0;
  double omega(double rho) const;
};

// The degenerate remainder a* = a - a_omega as a spatial radial profile: the
// inverse transform of ahat (1 - omega), whose Fourier side vanishes on the
// closed ball of radius 2 by construction.  rho_cut truncates the inverse
// integral where ahat is negligible; values are cached per radius since the
// ball quadratures revisit the same shells.
radial::RadialSymbol degenerate_part(const sphereop::SymbolTransform& T,
                                     const CutoffWindow& w, double rho_cut);

// Same, choosing rho_cut from the symbol's decay.  Only the Gaussian family
// decays fast enough on the Fourier side for the inverse integral to
// converge absolutely; anything else is rejected.
radial::RadialSymbol degenerate_part(const radial::RadialSymbol& a,
                                     const CutoffWindow& w, int d);

// The smooth half a_omega of the split, on the Fourier side: ahat * omega.
// Operator builders evaluate transforms on [0, 2] only, where omega = 1, so
// a and a_omega generate identical matrices.
sphereop::SymbolTransform windowed_transform(const sphereop::SymbolTransform& T,
                                             const CutoffWindow& w);

struct FormResult {
  std::complex<double> value = 0.0;
  double tail_bound = 0.0;  // estimated truncation error beyond radius R
  bool tail_ok = false;     // decay was observed and the bound is finite
};

// Ball-truncated sesquilinear form int_{|x|<R} a(x) u(x) conj(v(x)) dx with
// the fields synthesized from their sphere symbols.  grid_density sets both
// the radial node count (density * R) and the angular resolution.
FormResult form_quadrature(
    const std::function<double(const Eigen::Vector3d&)>& a,
    const hspace::SphereFunction& u, const hspace::SphereFunction& v, double R,
    int grid_density);

// All pairs F(a; u_i, u_j) in one sweep over the shared grid.
Eigen::MatrixXcd form_matrix(
    const std::function<double(const Eigen::Vector3d&)>& a,
    const std::vector<hspace::SphereFunction>& fields, double R,
    int grid_density);

struct BoundednessReport {
  double constant = 0.0;        // int over the shifted sphere of |ahat|
  double operator_bound = 0.0;  // pi/(2 pi)^{d/2} times constant
  bool divergent = false;       // singularity at 0 not integrable on the sphere
};

// L1 mass of ahat on a unit sphere through the origin; for radial symbols
// the sup over centers is attained identically, so one graded integral in
// the polar angle suffices.  Both normalizations are reported: the plain
// integral and the operator-norm bound carrying the kernel prefactor.
BoundednessReport boundedness_constant(const sphereop::SymbolTransform& T);

struct HdReport {
  bool bounded = false;
  double envelope = 0.0;  // max of |a(r)| r^{-lambda} over the sample grid
};

// Homogeneous-decay check: samples |a(r)| r^{-lambda} on a log grid over
// [10, 1e4] and calls it bounded when the last decade does not rise above
// the earlier ones.
HdReport hd_check(const radial::RadialSymbol& a, double lambda);

struct GaugeReport {
  double integral = 0.0;
  bool admissible = false;
  bool inconclusive = false;  // dyadic ladder did not settle either way
};

// Admissibility of a radial gauge: the (d-1)-dimensional integral of
// |phihat| over the disk of radius 2 in the hyperplane xi_1 = 0.  The
// transform comes from from_radial (closed form where the family has one,
// numeric Hankel otherwise); the origin is handled by dyadic panels with a
// power-trend fit when the exponent is not known a priori.
GaugeReport argf_check(const radial::RadialSymbol& phi, int d,
                       int grid_density);

struct CompactnessReport {
  Eigen::VectorXd singular_values;           // |gamma| with multiplicity, desc
  std::map<double, double> schatten_traces;  // p in {0.5, 1, 2}
};

// Compactly supported symbols give operators with super-polynomially
// decaying singular values; this just lays out the evidence.
CompactnessReport compactness_probe(const radial::RadialSymbol& a, int d,
                                    int nmax);

// Rank-one nodal realization of the point mass at x0: kernel
// (2 pi)^{-d/2} exp(-i x0 . (xi - eta)) with the usual weight split.
sphereop::OperatorMatrix point_mass_nodal(int d, const Eigen::Vector3d& x0,
                                          const quad::SphereGrid& grid);

}  // namespace htz::symlab
