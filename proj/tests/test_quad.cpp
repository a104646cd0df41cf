#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "htz/quad.hpp"
#include "htz/specfun.hpp"

using namespace htz::quad;
using htz::specfun::bessel_j;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("semiaxis: exponential decay") {
  TailPolicy pol;
  pol.acceleration = Accel::none;
  pol.r_max = 60.0;
  IntegralResult r =
      integrate_semiaxis([](double t) { return std::exp(-t); }, pol);
  CHECK(std::abs(r.value - 1.0) < 1e-12);
  CHECK(std::abs(r.value - 1.0) <= r.error_bound);
  CHECK(r.converged);
}

TEST_CASE("semiaxis: J_{1/2}^2 / r with power-law edge sums") {
  // J_{1/2}(r)^2 / r = 2 sin^2(r) / (pi r^2); the integral is 1 and the
  // partial sums at pi-aligned edges approach it like 1/rho.
  TailPolicy pol;
  pol.tail_exponent = 1.0;
  pol.abs_tol = 1e-9;
  auto f = [](double t) {
    double j = bessel_j(0.5, t);
    return j * j / t;
  };
  IntegralResult r = integrate_semiaxis(f, pol);
  CHECK(std::abs(r.value - 1.0) < 1e-9);
  CHECK(std::abs(r.value - 1.0) <= r.error_bound);
  CHECK(r.converged);
}

TEST_CASE("semiaxis: chirp-weighted Bessel blocks") {
  // sin(r^2/4) J_{1/2}(r)^2 r does not decay, but its slowly varying
  // amplitude (1 - cos 2r)/pi vanishes to second order at every pi multiple,
  // so pi-aligned block sums land on the limit to O(1/rho^3).  The adaptive
  // in-block refinement has to resolve the local frequency r/2 for this to
  // work at all.  Reference value from the closed-form treatment of this
  // integrand (see the radial module tests).
  const double want = 1.1240236615848839 / kPi;
  TailPolicy pol;
  pol.acceleration = Accel::none;
  pol.abs_tol = 1e-6;
  auto f = [](double t) {
    double j = bessel_j(0.5, t);
    return std::sin(0.25 * t * t) * j * j * t;
  };
  IntegralResult r = integrate_semiaxis(f, pol);
  CHECK(std::abs(r.value - want) < 1e-7);
  CHECK(std::abs(r.value - want) <= r.error_bound);
  CHECK(r.converged);
}

TEST_CASE("semiaxis: compact support short-circuits the tail") {
  TailPolicy pol;
  pol.support = 1.0;
  pol.abs_tol = 1e-10;
  auto f = [](double t) {
    double j = bessel_j(0.5, t);
    return (t <= 1.0) ? j * j * t : 0.0;
  };
  IntegralResult r = integrate_semiaxis(f, pol);
  // int_0^1 (2/pi) sin^2 t dt = (1 - sin(2)/2) / pi working through the
  // half-order closed form.
  double want = (1.0 - 0.5 * std::sin(2.0)) / kPi;
  CHECK(std::abs(r.value - want) < 1e-12);
  CHECK(r.converged);
}

TEST_CASE("semiaxis: nonzero left endpoint") {
  TailPolicy pol;
  pol.support = 60.0;
  pol.start = 1.0;
  pol.acceleration = Accel::none;
  IntegralResult r =
      integrate_semiaxis([](double t) { return std::exp(-t); }, pol);
  CHECK(std::abs(r.value - std::exp(-1.0)) < 1e-12);
  // Oscillatory path with a shifted start: tail of the J_{1/2}^2 kernel.
  TailPolicy pol2;
  pol2.start = 2.0;
  pol2.tail_exponent = 1.0;
  pol2.transition = 8.0;
  pol2.r_max = 400.0 * kPi;
  IntegralResult r2 = integrate_semiaxis(
      [](double t) {
        double j = bessel_j(0.5, t);
        return j * j / t;
      },
      pol2);
  // int_2^inf (2/pi) sin^2(t)/t^2 dt = (2/pi)(sin^2(2)/2 + pi/2 - Si(4)),
  // frozen at 30 digits: 0.14387867427911075.
  CHECK(std::abs(r2.value - 0.14387867427911075) < 1e-9);
  CHECK(r2.converged);
}

TEST_CASE("semiaxis: input validation") {
  TailPolicy pol;
  pol.blocks = 2;
  CHECK_THROWS_AS(integrate_semiaxis([](double) { return 0.0; }, pol),
                  std::invalid_argument);
  TailPolicy pol2;
  pol2.r_max = -1.0;
  CHECK_THROWS_AS(integrate_semiaxis([](double) { return 0.0; }, pol2),
                  std::invalid_argument);
  TailPolicy pol3;
  pol3.start = 5000.0;
  CHECK_THROWS_AS(integrate_semiaxis([](double) { return 0.0; }, pol3),
                  std::invalid_argument);
}

TEST_CASE("sphere_grid measures and exactness") {
  SphereGrid c = sphere_grid(2, 64);
  CHECK(c.points.size() == 64);
  CHECK(std::abs(c.weights.sum() - 2.0 * kPi) < 1e-12);
  for (const auto& p : c.points) CHECK(std::abs(p.norm() - 1.0) < 1e-12);

  SphereGrid s = sphere_grid(3, 32);
  CHECK(std::abs(s.weights.sum() - 4.0 * kPi) < 1e-12);
  for (const auto& p : s.points) CHECK(std::abs(p.norm() - 1.0) < 1e-12);

  // Quadrature of Y_{2,1}^2 over S^2 is 1 by orthonormality.
  double acc = 0.0;
  for (size_t i = 0; i < s.points.size(); ++i) {
    double y = htz::specfun::sph_harmonic({3, 2, 1}, s.points[i]);
    acc += s.weights[static_cast<Eigen::Index>(i)] * y * y;
  }
  CHECK(std::abs(acc - 1.0) < 1e-12);

  CHECK_THROWS_AS(sphere_grid(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(sphere_grid(5, 16), std::invalid_argument);
}

TEST_CASE("ball_average basics") {
  auto one = [](const Eigen::Vector3d&) { return 1.0; };
  CHECK(std::abs(ball_average(one, 2, 2.0, 16) - 2.0 * kPi) < 1e-12);
  CHECK(std::abs(ball_average(one, 3, 1.5, 8) -
                 (4.0 / 3.0) * kPi * 1.5 * 1.5) < 1e-11);
  auto zero = [](const Eigen::Vector3d&) { return 0.0; };
  CHECK(ball_average(zero, 2, 10.0, 16) == 0.0);
}

TEST_CASE("ball_average of a planar Helmholtz mode approaches its norm") {
  // |c J_0(|x|)|^2 with c^2 = 1/2 integrates to 1 in the large-R average;
  // the deviation decays like 1/R with the sin(2R) modulation, so doubling
  // R from 500 improves it by better than 0.7.
  auto f = [](const Eigen::Vector3d& x) {
    double j = bessel_j(0.0, x.norm());
    return 0.5 * j * j;
  };
  double a500 = ball_average(f, 2, 500.0, 32);
  double a1000 = ball_average(f, 2, 1000.0, 32);
  CHECK(std::abs(a500 - 1.0) < 0.02);
  CHECK(std::abs(a1000 - 1.0) <= 0.7 * std::abs(a500 - 1.0));
}

TEST_CASE("parallel reduction is bit-stable across thread counts") {
  auto f = [](const Eigen::Vector3d& x) {
    double j = bessel_j(0.0, x.norm());
    return 0.5 * j * j;
  };
  setenv("HERGLOTZ_THREADS", "1", 1);
  double a = ball_average(f, 2, 40.0, 32);
  setenv("HERGLOTZ_THREADS", "7", 1);
  double b = ball_average(f, 2, 40.0, 32);
  unsetenv("HERGLOTZ_THREADS");
  CHECK(a == b);
}
