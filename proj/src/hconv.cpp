#include "htz/hconv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "htz/parallel.hpp"
#include "htz/specfun.hpp"

namespace htz::hconv {

namespace {

constexpr double kPi = 3.14159265358979323846;

int infer_resolution(const quad::SphereGrid& grid) {
  const int n = static_cast<int>(grid.points.size());
  if (grid.d == 2) return n;
  return static_cast<int>(std::lround(std::sqrt(0.5 * n)));
}

void check_dim(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

// pi/R int_0^R J_nu(r)^2 r dr, the per-degree weight of the ball average,
// through the Lommel antiderivative r^2/2 [J' ^2 + (1 - nu^2/r^2) J^2].
// Tends to 1 as R grows; the deviation is the O(1/R) ladder error.
double ball_weight(double nu, double R) {
  double jn = specfun::bessel_j(nu, R);
  double jn1 = specfun::bessel_j(nu + 1.0, R);
  double deriv = nu / R * jn - jn1;
  return 0.5 * kPi * R *
         (deriv * deriv + (1.0 - nu * nu / (R * R)) * jn * jn);
}

// v with every coefficient damped by its finite-R ball weight: the density
// of c_d R^{-1} int_{|y|<R} v(y) e^{-i y xi} dy.
hspace::SphereFunction damped_density(const hspace::SphereFunction& v,
                                      double R) {
  const double alpha = 0.5 * (v.d - 2);
  hspace::SphereFunction out;
  out.d = v.d;
  for (const auto& [key, c] : v.coeffs)
    out.coeffs[key] = c * ball_weight(key.first + alpha, R);
  return out;
}

// quadrature projection of a pointwise density onto degrees <= nmax
hspace::SphereFunction project_density(
    const std::function<Complex(const Eigen::Vector3d&)>& f, int d, int nmax,
    const quad::SphereGrid& grid) {
  const int ng = static_cast<int>(grid.points.size());
  Eigen::VectorXcd fv(ng);
  for (int g = 0; g < ng; ++g) fv[g] = grid.weights[g] * f(grid.points[g]);
  hspace::SphereFunction out;
  out.d = d;
  for (int n = 0; n <= nmax; ++n)
    for (int j = 1; j <= specfun::multiplicity(d, n); ++j) {
      specfun::HarmonicIndex idx{d, n, j};
      Complex c = 0.0;
      for (int g = 0; g < ng; ++g)
        c += fv[g] * specfun::sph_harmonic(idx, grid.points[g]);
      out.set(n, j, c);
    }
  return out;
}

double density_distance(const hspace::SphereFunction& f,
                        const hspace::SphereFunction& g) {
  double s = 0.0;
  for (const auto& [key, c] : f.coeffs)
    s += std::norm(c - g.get(key.first, key.second));
  for (const auto& [key, c] : g.coeffs)
    if (f.coeffs.find(key) == f.coeffs.end()) s += std::norm(c);
  return std::sqrt(s);
}

void check_ladder(const std::vector<double>& radii) {
  if (radii.size() < 2)
    throw std::invalid_argument("radius ladder needs at least two rungs");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0))
      throw std::invalid_argument("radius ladder must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1]))
      throw std::invalid_argument("radius ladder must increase");
  }
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

}  // namespace

SphereSymbol constant_symbol(double c) {
  SphereSymbol a;
  a.eval = [c](const Eigen::Vector3d&) { return Complex(c, 0.0); };
  a.sup_abs = std::abs(c);
  a.name = "const";
  return a;
}

SphereSymbol cosine_symbol(int d) {
  check_dim(d);
  SphereSymbol a;
  a.eval = [d](const Eigen::Vector3d& xi) {
    return Complex(d == 2 ? xi[0] : xi[2], 0.0);
  };
  a.sup_abs = 1.0;
  a.name = "cos";
  return a;
}

SphereSymbol upper_indicator(int d) {
  check_dim(d);
  SphereSymbol a;
  // midpoint value on the dividing great circle keeps symmetric quadrature
  // rules exact; the band absorbs grid nodes that miss it by rounding
  a.eval = [d](const Eigen::Vector3d& xi) {
    double h = d == 2 ? xi[1] : xi[2];
    if (h > 1e-12) return Complex(1.0, 0.0);
    if (h < -1e-12) return Complex(0.0, 0.0);
    return Complex(0.5, 0.0);
  };
  a.sup_abs = 1.0;
  a.name = "upper";
  return a;
}

SphereSymbol offset_sine(int d) {
  check_dim(d);
  SphereSymbol a;
  a.eval = [d](const Eigen::Vector3d& xi) {
    double s = d == 2 ? xi[1] : std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
    return Complex(2.0 + s, 0.0);
  };
  a.sup_abs = 3.0;
  a.name = "2+sin";
  return a;
}

double grid_sup(const SphereSymbol& a, const quad::SphereGrid& grid) {
  double s = 0.0;
  for (const auto& p : grid.points) s = std::max(s, std::abs(a.eval(p)));
  return s;
}

sphereop::OperatorMatrix mult_nodal(const SphereSymbol& a,
                                    const quad::SphereGrid& grid) {
  const int n = static_cast<int>(grid.points.size());
  if (grid_sup(a, grid) > a.sup_abs + 1e-9)
    throw std::invalid_argument("mult_nodal: symbol exceeds its stated bound");
  sphereop::OperatorMatrix out;
  out.entries = Eigen::MatrixXcd::Zero(n, n);
  bool real = true;
  for (int k = 0; k < n; ++k) {
    Complex v = a.eval(grid.points[k]);
    out.entries(k, k) = v;
    real = real && std::abs(v.imag()) <= 1e-14 * (a.sup_abs + 1.0);
  }
  out.basis = sphereop::Basis::nodal;
  out.d = grid.d;
  out.grid_size = n;
  out.hermitian = real;
  return out;
}

sphereop::OperatorMatrix mult_matrix(const SphereSymbol& a, int d, int nmax,
                                     const quad::SphereGrid& grid) {
  check_dim(d);
  if (d != grid.d) throw std::invalid_argument("mult_matrix: grid dimension");
  if (nmax < 0) throw std::invalid_argument("mult_matrix: negative degree");
  const int res = infer_resolution(grid);
  if (res < 4 * nmax)
    throw std::invalid_argument(
        "mult_matrix: grid resolution below four times the degree cap");
  if (grid_sup(a, grid) > a.sup_abs + 1e-9)
    throw std::invalid_argument("mult_matrix: symbol exceeds its stated bound");

  Eigen::VectorXi deg = sphereop::harmonic_degrees(d, nmax);
  const int m = static_cast<int>(deg.size());
  const int ng = static_cast<int>(grid.points.size());
  std::vector<specfun::HarmonicIndex> idx(m);
  for (int n = 0, i = 0; n <= nmax; ++n)
    for (int j = 1; j <= specfun::multiplicity(d, n); ++j)
      idx[i++] = specfun::HarmonicIndex{d, n, j};

  Eigen::MatrixXd basis(m, ng);
  std::vector<double> sw(ng);
  for (int g = 0; g < ng; ++g) sw[g] = std::sqrt(grid.weights[g]);
  parallel_for(m, [&](long i) {
    for (int g = 0; g < ng; ++g)
      basis(i, g) = specfun::sph_harmonic(idx[i], grid.points[g]) * sw[g];
  });

  Eigen::VectorXcd av(ng);
  bool real = true;
  for (int g = 0; g < ng; ++g) {
    av[g] = a.eval(grid.points[g]);
    real = real && std::abs(av[g].imag()) <= 1e-14 * (a.sup_abs + 1.0);
  }

  sphereop::OperatorMatrix out;
  out.entries.noalias() =
      basis.cast<Complex>() * av.asDiagonal() * basis.transpose().cast<Complex>();
  out.basis = sphereop::Basis::harmonic;
  out.d = d;
  out.nmax = nmax;
  out.grid_size = ng;
  out.hermitian = real;
  return out;
}

MultResult mult_apply(const SphereSymbol& a, const hspace::SphereFunction& phi,
                      const quad::SphereGrid& grid, int extra_degrees) {
  if (phi.d != grid.d) throw std::invalid_argument("mult_apply: dimension");
  if (extra_degrees < 0) throw std::invalid_argument("mult_apply: band");
  const int cap = phi.max_degree() + extra_degrees;
  auto f = [&](const Eigen::Vector3d& xi) { return a.eval(xi) * phi.eval(xi); };
  MultResult out;
  out.field = project_density(f, phi.d, cap, grid);
  // Parseval gap between the grid product and its projection; mass outside
  // the band means the grid cannot carry the product faithfully
  double total = 0.0;
  for (size_t g = 0; g < grid.points.size(); ++g)
    total += grid.weights[g] * std::norm(f(grid.points[g]));
  double captured = 0.0;
  for (const auto& [key, c] : out.field.coeffs) captured += std::norm(c);
  out.alias_defect = std::sqrt(std::max(0.0, total - captured));
  out.aliased = out.alias_defect > 1e-6 * std::sqrt(total + 1e-300) ||
                infer_resolution(grid) < 4 * cap;
  return out;
}

Complex symbol_kernel(const SphereSymbol& a, const quad::SphereGrid& grid,
                      const Eigen::Vector3d& x) {
  const double cd = hspace::space_constants(grid.d).c_d;
  Complex s = 0.0;
  for (size_t g = 0; g < grid.points.size(); ++g)
    s += grid.weights[g] * a.eval(grid.points[g]) *
         std::exp(Complex(0.0, x.dot(grid.points[g])));
  return cd * s;
}

hspace::SphereFunction hconvolve_at(const hspace::SphereFunction& u,
                                    const hspace::SphereFunction& v,
                                    double R) {
  if (u.d != v.d) throw std::invalid_argument("hconvolve: dimension mismatch");
  if (!(R > 0.0)) throw std::invalid_argument("hconvolve: radius");
  const int d = u.d;
  const int cap = u.max_degree() + v.max_degree();
  hspace::SphereFunction vd = damped_density(v, R);
  quad::SphereGrid grid = quad::sphere_grid(d, std::max(16, 4 * cap + 4));
  auto f = [&](const Eigen::Vector3d& xi) { return u.eval(xi) * vd.eval(xi); };
  return project_density(f, d, cap, grid);
}

ConvolveResult hconvolve(const hspace::SphereFunction& u,
                         const hspace::SphereFunction& v,
                         const std::vector<double>& radii) {
  check_ladder(radii);
  const int k = static_cast<int>(radii.size());
  std::vector<hspace::SphereFunction> dens(k);
  parallel_for(k, [&](long i) { dens[i] = hconvolve_at(u, v, radii[i]); });

  // successive first-order extrapolants in 1/R
  std::vector<hspace::SphereFunction> ext(k - 1);
  for (int i = 0; i + 1 < k; ++i) {
    double r0 = radii[i], r1 = radii[i + 1];
    hspace::SphereFunction e;
    e.d = u.d;
    for (const auto& [key, c] : dens[i + 1].coeffs) {
      Complex c0 = dens[i].get(key.first, key.second);
      e.coeffs[key] = (r1 * c - r0 * c0) / (r1 - r0);
    }
    ext[i] = e;
  }

  ConvolveResult out;
  out.radii = radii;
  out.field = ext.back();
  out.last = dens.back();
  for (int i = 1; i < k; ++i)
    out.ladder_gaps.push_back(density_distance(dens[i], dens[i - 1]));
  out.residual = k >= 3 ? density_distance(ext[k - 2], ext[k - 3])
                        : density_distance(out.field, out.last);
  bool shrinking = true;
  for (size_t i = 1; i < out.ladder_gaps.size(); ++i)
    shrinking = shrinking && out.ladder_gaps[i] <= 1.25 * out.ladder_gaps[i - 1];
  out.converged = shrinking && std::isfinite(out.residual);
  return out;
}

FactorizationReport verify_factorization(const hspace::SphereFunction& u,
                                         const hspace::SphereFunction& v,
                                         const std::vector<double>& radii) {
  check_ladder(radii);
  if (u.d != v.d) throw std::invalid_argument("factorization: dimension");
  const int d = u.d;
  const int cap = u.max_degree() + v.max_degree();
  quad::SphereGrid grid = quad::sphere_grid(d, std::max(16, 4 * cap + 4));
  // sphere-side product, the limit the ladder should approach
  auto prod = [&](const Eigen::Vector3d& xi) {
    return u.eval(xi) * v.eval(xi);
  };
  hspace::SphereFunction target = project_density(prod, d, cap, grid);

  FactorizationReport rep;
  rep.radii = radii;
  rep.residuals.resize(radii.size());
  parallel_for(static_cast<long>(radii.size()), [&](long i) {
    rep.residuals[i] = density_distance(hconvolve_at(u, v, radii[i]), target);
  });
  size_t n = rep.residuals.size();
  rep.final_ratio = rep.residuals[n - 2] > 0.0
                        ? rep.residuals[n - 1] / rep.residuals[n - 2]
                        : 0.0;
  return rep;
}

AlgebraReport algebra_checks(const SphereSymbol& a, const SphereSymbol& b,
                             int d, int nmax, const quad::SphereGrid& grid) {
  check_dim(d);
  if (nmax < 4) throw std::invalid_argument("algebra_checks: degree cap");
  AlgebraReport rep;
  rep.sup_symbol = grid_sup(a, grid);

  // value basis: multiplications are diagonal, so the algebra is exact
  Eigen::MatrixXcd na = mult_nodal(a, grid).entries;
  Eigen::MatrixXcd nb = mult_nodal(b, grid).entries;
  rep.nodal_commutator = (na * nb - nb * na).cwiseAbs().maxCoeff();
  SphereSymbol ab;
  ab.eval = [&a, &b](const Eigen::Vector3d& xi) {
    return a.eval(xi) * b.eval(xi);
  };
  ab.sup_abs = a.sup_abs * b.sup_abs;
  ab.name = a.name + "*" + b.name;
  rep.nodal_product_defect =
      (na * nb - mult_nodal(ab, grid).entries).cwiseAbs().maxCoeff();

  // harmonic truncations at a doubling ladder of degree caps
  for (int cap : {nmax / 4, nmax / 2, nmax})
    if (cap >= 1 &&
        (rep.degree_ladder.empty() || cap > rep.degree_ladder.back()))
      rep.degree_ladder.push_back(cap);
  for (int cap : rep.degree_ladder) {
    Eigen::MatrixXcd ma = mult_matrix(a, d, cap, grid).entries;
    Eigen::MatrixXcd mb = mult_matrix(b, d, cap, grid).entries;
    Eigen::MatrixXcd comm = ma * mb - mb * ma;
    rep.commutator_norms.push_back(comm.norm() /
                                   std::sqrt(static_cast<double>(comm.rows())));
    rep.commutator_spectral.push_back(spectral_norm(comm));
    rep.norm_ladder.push_back(spectral_norm(ma));
  }

  // every eigenvalue of the top truncation should hug the sampled range
  sphereop::OperatorMatrix top = mult_matrix(a, d, nmax, grid);
  std::vector<Complex> sampled;
  sampled.reserve(grid.points.size());
  for (const auto& p : grid.points) sampled.push_back(a.eval(p));
  Eigen::VectorXcd eigs;
  if (top.hermitian) {
    eigs = sphereop::eigen_hermitian(top).eigenvalues.cast<Complex>();
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(top.entries, false);
    eigs = es.eigenvalues();
  }
  for (int i = 0; i < eigs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Complex& s : sampled) best = std::min(best, std::abs(eigs[i] - s));
    rep.spectrum_distance = std::max(rep.spectrum_distance, best);
  }
  return rep;
}

}  // namespace htz::hconv
