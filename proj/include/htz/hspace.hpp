#pragma once

#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htz/quad.hpp"
#include "htz/specfun.hpp"

namespace htz::hspace {

using Complex = std::complex<double>;

struct Constants {
  double c_d;           // sqrt(pi) / (2 pi)^{d/2}
  Complex eps_plus;     // exp(+i (d-1) pi / 4)
  Complex eps_minus;    // exp(-i (d-1) pi / 4)
};

Constants space_constants(int d);

// Finite expansion over real spherical harmonics with complex coefficients;
// the boundary symbol of one field.
struct SphereFunction {
  int d = 2;

  void set(int n, int j, Complex c);
  Complex get(int n, int j) const;
  double norm() const;                            // sqrt(sum |c|^2)
  Complex eval(const Eigen::Vector3d& xi) const;  // pointwise on S^{d-1}
  int max_degree() const;

  std::map<std::pair<int, int>, Complex> coeffs;
};

// Field value sum_{n,j} c_{n,j} sqrt(pi) i^n J_{n+(d-2)/2}(r) / r^{(d-2)/2}
// Y_{n,j}(x/r); at r = 0 only the n = 0 term survives and the limit branch
// is used.
Complex synth(const SphereFunction& phi, const Eigen::Vector3d& x);

// The same field through the plane-wave superposition
// c_d sum_k w_k phi(xi_k) exp(i x.xi_k) on the given grid.
Complex synth_integral(const std::function<Complex(const Eigen::Vector3d&)>& phi,
                       const Eigen::Vector3d& x, const quad::SphereGrid& grid);

// Adjoint sample c_d R^{-1} int_{|x|<R} u(x) e^{-i x.xi} dx, first-order
// Richardson-extrapolated from radii {R, 2R}.  grid_resolution must resolve
// the angular oscillation of the phase factor, i.e. scale with 2R.
Complex istar(const std::function<Complex(const Eigen::Vector3d&)>& u,
              int d, const Eigen::Vector3d& xi, double R, int grid_resolution);

// kappa(|x-y|) = pi/(2 pi)^{d/2} t^{-(d-2)/2} J_{(d-2)/2}(t): J_0(t)/2 in
// the plane, sin(t)/(2 pi t) in space.
double repro_kernel(int d, double t);

// Partial sums of the kernel's basis expansion; converges to repro_kernel
// and is symmetric in (x, y) by construction.
double kernel_series(int d, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                     int nmax);

// |<u, kappa_x> - u(x)| with the pairing taken on the sphere side against
// Psi_x(xi) = c_d e^{-i x.xi}; exact in the limit, quadrature-limited here.
double reproduce_residual(const SphereFunction& phi, const Eigen::Vector3d& x,
                          int grid_resolution);

// Mean-square distance, over the shell R <= |x| <= R + pi, between the field
// and its two-ray surrogate
//   c_d (2 pi/r)^{(d-1)/2} (eps_minus e^{ir} phi(xhat) + eps_plus e^{-ir} phi(-xhat)),
// averaged over the sphere and the shell, square-rooted.  The shell average
// keeps the decay monotone where a single-radius sample is modulated by the
// phase of the next correction term.
double far_field_residual(const SphereFunction& phi, double R,
                          const quad::SphereGrid& grid);

// R^{-1} int_{|x|<R} |field|^2; approaches norm(phi)^2 at rate O(1/R).
double bstar_average(const SphereFunction& phi, double R,
                     int sphere_resolution);

// |Laplacian u + u| by central differences with step h at the point x.
double helmholtz_residual(const SphereFunction& phi, const Eigen::Vector3d& x,
                          double h);

// CSV rows "x1,...,xd,re,im" for the field sampled at the given points.
std::string field_csv(const SphereFunction& phi,
                      const std::vector<Eigen::Vector3d>& points);

}  // namespace htz::hspace
