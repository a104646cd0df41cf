#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace htz::quad {

enum class Accel { none, sequence_extrapolation };

// Controls for the semi-axis integrator.  Oscillation blocks are one pi
// wide (the asymptotic zero spacing of J_nu) and start at the first pi
// multiple past `transition`; callers integrating Bessel-weighted symbols
// set transition to max(8, 2 nu) so the pre-oscillatory range stays inside
// the head.  When the partial sums have a known power-law approach to the
// limit, `tail_exponent` names it and the extrapolation uses that basis;
// otherwise a rational (epsilon-algorithm) extrapolation is used.
struct TailPolicy {
  double r_max = 400.0 * 3.14159265358979323846;
  int blocks = 2000;
  Accel acceleration = Accel::sequence_extrapolation;
  double transition = 8.0;
  double tail_exponent = std::numeric_limits<double>::quiet_NaN();
  double support = std::numeric_limits<double>::infinity();
  double abs_tol = 1e-8;
  // Left endpoint; callers that evaluate an initial segment by other means
  // (a local series around an endpoint singularity, say) start the panel
  // machinery here instead of at zero.
  double start = 0.0;
};

struct IntegralResult {
  double value = 0.0;
  double error_bound = 0.0;
  bool converged = false;
  int blocks_used = 0;
};

// Integral of f over (0, infinity) under the given policy.  The reported
// error bound is conservative for integrands that decay monotonically or
// oscillate with the block period; convergence means the bound met abs_tol.
IntegralResult integrate_semiaxis(const std::function<double(double)>& f,
                                  const TailPolicy& policy);

struct SphereGrid {
  int d = 2;
  std::vector<Eigen::Vector3d> points;  // unit vectors; z = 0 when d = 2
  Eigen::VectorXd weights;              // surface measure, sums to |S^{d-1}|
};

// d=2: `resolution` uniform angles (trapezoid rule), exact for trigonometric
// polynomials of degree < resolution.  d=3: Gauss-Legendre polar times
// 2*resolution uniform azimuths, exact for harmonics of degree < resolution.
SphereGrid sphere_grid(int d, int resolution);

// R^{-1} int_{|x|<R} f dx with radial Gauss-Legendre (ceil(4R) nodes, capped
// at 8192, resolving unit-wavelength oscillation) crossed with a sphere grid.
double ball_average(const std::function<double(const Eigen::Vector3d&)>& f,
                    int d, double R, int sphere_resolution);

}  // namespace htz::quad
