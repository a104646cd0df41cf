#include "htz/hspace.hpp"

#include <cmath>
#include <stdexcept>

#include "htz/io.hpp"

namespace htz::hspace {

namespace {

constexpr double kPi = 3.14159265358979323846;

// i^n on the unit circle, exact by residue mod 4.
Complex i_pow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// J_{n+alpha}(r) / r^alpha with alpha = (d-2)/2, continued through r = 0
// by the power-series leading term: (1/2)^alpha / Gamma(alpha+1) for n = 0,
// zero for n >= 1.
double radial_factor(int d, int n, double r) {
  const double alpha = 0.5 * (d - 2);
  if (r == 0.0) {
    if (n > 0) return 0.0;
    return std::pow(0.5, alpha) / specfun::gamma_fn(alpha + 1.0);
  }
  return specfun::bessel_j(n + alpha, r) / std::pow(r, alpha);
}

void check_dim(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

}  // namespace

Constants space_constants(int d) {
  check_dim(d);
  Constants c;
  c.c_d = std::sqrt(kPi) / std::pow(2.0 * kPi, 0.5 * d);
  const double phase = 0.25 * kPi * (d - 1);
  c.eps_plus = Complex(std::cos(phase), std::sin(phase));
  c.eps_minus = std::conj(c.eps_plus);
  return c;
}

void SphereFunction::set(int n, int j, Complex c) {
  if (n < 0 || j < 1 || j > specfun::multiplicity(d, n))
    throw std::invalid_argument("harmonic index out of range");
  if (c == Complex(0.0, 0.0))
    coeffs.erase({n, j});
  else
    coeffs[{n, j}] = c;
}

Complex SphereFunction::get(int n, int j) const {
  auto it = coeffs.find({n, j});
  return it == coeffs.end() ? Complex(0.0, 0.0) : it->second;
}

double SphereFunction::norm() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs) s += std::norm(c);
  return std::sqrt(s);
}

Complex SphereFunction::eval(const Eigen::Vector3d& xi) const {
  Complex s(0.0, 0.0);
  for (const auto& [k, c] : coeffs)
    s += c * specfun::sph_harmonic({d, k.first, k.second}, xi);
  return s;
}

int SphereFunction::max_degree() const {
  int n = 0;
  for (const auto& [k, c] : coeffs) n = std::max(n, k.first);
  return n;
}

Complex synth(const SphereFunction& phi, const Eigen::Vector3d& x) {
  check_dim(phi.d);
  const double r = x.norm();
  const double root_pi = std::sqrt(kPi);
  if (r == 0.0) {
    // Only the constant harmonic contributes at the origin.
    return phi.get(0, 1) * root_pi * radial_factor(phi.d, 0, 0.0) *
           specfun::sph_harmonic({phi.d, 0, 1}, Eigen::Vector3d(1, 0, 0));
  }
  const Eigen::Vector3d xhat = x / r;
  Complex s(0.0, 0.0);
  int last_n = -1;
  double radial = 0.0;
  for (const auto& [k, c] : phi.coeffs) {
    if (k.first != last_n) {
      last_n = k.first;
      radial = radial_factor(phi.d, k.first, r);
    }
    s += c * i_pow(k.first) * radial *
         specfun::sph_harmonic({phi.d, k.first, k.second}, xhat);
  }
  return root_pi * s;
}

Complex synth_integral(const std::function<Complex(const Eigen::Vector3d&)>& phi,
                       const Eigen::Vector3d& x, const quad::SphereGrid& grid) {
  const Constants cs = space_constants(grid.d);
  Complex s(0.0, 0.0);
  for (size_t k = 0; k < grid.points.size(); ++k) {
    const double ph = x.dot(grid.points[k]);
    s += grid.weights[static_cast<int>(k)] * phi(grid.points[k]) *
         Complex(std::cos(ph), std::sin(ph));
  }
  return cs.c_d * s;
}

Complex istar(const std::function<Complex(const Eigen::Vector3d&)>& u,
              int d, const Eigen::Vector3d& xi, double R, int grid_resolution) {
  check_dim(d);
  if (R < 50.0) throw std::invalid_argument("adjoint sampling needs R >= 50");
  const Constants cs = space_constants(d);
  auto sample = [&](double radius) {
    auto re = [&](const Eigen::Vector3d& x) {
      const double ph = -x.dot(xi);
      return std::real(u(x) * Complex(std::cos(ph), std::sin(ph)));
    };
    auto im = [&](const Eigen::Vector3d& x) {
      const double ph = -x.dot(xi);
      return std::imag(u(x) * Complex(std::cos(ph), std::sin(ph)));
    };
    return cs.c_d * Complex(quad::ball_average(re, d, radius, grid_resolution),
                            quad::ball_average(im, d, radius, grid_resolution));
  };
  // The ball average approaches the limit at rate 1/R; one Richardson step
  // across {R, 2R} cancels that term.
  return 2.0 * sample(2.0 * R) - sample(R);
}

double repro_kernel(int d, double t) {
  check_dim(d);
  if (t < 0.0) throw std::invalid_argument("kernel argument must be >= 0");
  const double alpha = 0.5 * (d - 2);
  const double pref = kPi / std::pow(2.0 * kPi, 0.5 * d);
  if (t == 0.0) return pref * std::pow(0.5, alpha) / specfun::gamma_fn(alpha + 1.0);
  return pref * specfun::bessel_j(alpha, t) / std::pow(t, alpha);
}

double kernel_series(int d, const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                     int nmax) {
  check_dim(d);
  if (nmax < 0) throw std::invalid_argument("nmax must be >= 0");
  const double r = x.norm();
  const double s = y.norm();
  const Eigen::Vector3d xhat = r == 0.0 ? Eigen::Vector3d(1, 0, 0) : (x / r).eval();
  const Eigen::Vector3d yhat = s == 0.0 ? Eigen::Vector3d(1, 0, 0) : (y / s).eval();
  double acc = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    const double rad = radial_factor(d, n, r) * radial_factor(d, n, s);
    if (rad == 0.0) continue;
    double ang = 0.0;
    for (int j = 1; j <= specfun::multiplicity(d, n); ++j)
      ang += specfun::sph_harmonic({d, n, j}, xhat) *
             specfun::sph_harmonic({d, n, j}, yhat);
    acc += rad * ang;
  }
  return kPi * acc;
}

double reproduce_residual(const SphereFunction& phi, const Eigen::Vector3d& x,
                          int grid_resolution) {
  const quad::SphereGrid grid = quad::sphere_grid(phi.d, grid_resolution);
  // Pairing the field against kappa_x on the sphere side integrates phi
  // against conj(Psi_x) = c_d e^{+i x.xi}, which is the plane-wave
  // superposition again; the basis series is the independent second path.
  const Complex paired =
      synth_integral([&](const Eigen::Vector3d& xi) { return phi.eval(xi); },
                     x, grid);
  return std::abs(paired - synth(phi, x));
}

double far_field_residual(const SphereFunction& phi, double R,
                          const quad::SphereGrid& grid) {
  if (phi.d != grid.d) throw std::invalid_argument("grid dimension mismatch");
  if (R < 20.0) throw std::invalid_argument("far field needs R >= 20");
  const Constants cs = space_constants(phi.d);
  const double surface = grid.weights.sum();
  const specfun::GaussRule radial = specfun::gauss_legendre_on(16, R, R + kPi);
  double acc = 0.0;
  for (int a = 0; a < 16; ++a) {
    const double r = radial.nodes[a];
    const double amp = cs.c_d * std::pow(2.0 * kPi / r, 0.5 * (phi.d - 1));
    const Complex outgoing = amp * Complex(std::cos(r), std::sin(r));
    double shell = 0.0;
    for (size_t k = 0; k < grid.points.size(); ++k) {
      const Eigen::Vector3d& xhat = grid.points[k];
      // The outgoing ray carries eps_minus, the incoming one eps_plus; the
      // d = 3 constant field then matches sin(r)/(sqrt(2 pi) r) exactly.
      const Complex main = cs.eps_minus * outgoing * phi.eval(xhat) +
                           cs.eps_plus * std::conj(outgoing) * phi.eval(-xhat);
      shell += grid.weights[static_cast<int>(k)] *
               std::norm(synth(phi, r * xhat) - main);
    }
    acc += radial.weights[a] * shell / surface;
  }
  return std::sqrt(acc / kPi);
}

double bstar_average(const SphereFunction& phi, double R,
                     int sphere_resolution) {
  return quad::ball_average(
      [&](const Eigen::Vector3d& x) { return std::norm(synth(phi, x)); },
      phi.d, R, sphere_resolution);
}

double helmholtz_residual(const SphereFunction& phi, const Eigen::Vector3d& x,
                          double h) {
  Complex lap(0.0, 0.0);
  const Complex center = synth(phi, x);
  for (int axis = 0; axis < phi.d; ++axis) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[axis] = h;
    lap += synth(phi, x + e) + synth(phi, x - e) - 2.0 * center;
  }
  return std::abs(lap / (h * h) + center);
}

std::string field_csv(const SphereFunction& phi,
                      const std::vector<Eigen::Vector3d>& points) {
  std::string out;
  {
    std::vector<std::string> head = {"x1", "x2"};
    if (phi.d == 3) head.push_back("x3");
    head.push_back("re_u");
    head.push_back("im_u");
    out += io::csv_line(head);
  }
  for (const auto& x : points) {
    const Complex u = synth(phi, x);
    std::vector<std::string> cells;
    for (int a = 0; a < phi.d; ++a) cells.push_back(io::format_double(x[a]));
    cells.push_back(io::format_double(u.real()));
    cells.push_back(io::format_double(u.imag()));
    out += io::csv_line(cells);
  }
  return out;
}

}  // namespace htz::hspace
