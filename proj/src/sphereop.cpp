#include "htz/sphereop.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "htz/io.hpp"
#include "htz/parallel.hpp"
#include "htz/specfun.hpp"

namespace htz::sphereop {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Chord lengths on the unit sphere top out at 2; anything past that (plus
// rounding slack) means a builder used the transform outside its contract.
constexpr double kReach = 2.0 + 1e-9;

double probe(const SymbolTransform& T, double rho) {
  if (rho > kReach)
    throw std::logic_error("sphereop: symbol transform evaluated beyond 2");
  return T.profile(rho);
}

double gl_panel(const std::function<double(double)>& f, double lo, double hi,
                int order) {
  specfun::GaussRule rule = specfun::gauss_legendre_on(order, lo, hi);
  double s = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

// Integral of g over (0, hi] when g ~ c t^z at the origin with z > -1:
// dyadic panels walk toward zero and the leftover sliver below the last edge
// is completed analytically from the edge value and the known exponent.
double graded_integral(const std::function<double(double)>& g, double hi,
                       double z) {
  double total = 0.0;
  double edge = hi;
  for (int k = 0; k < 46; ++k) {
    double lo = 0.5 * edge;
    total += gl_panel(g, lo, edge, 16);
    edge = lo;
  }
  total += g(edge) * edge / (z + 1.0);
  return total;
}

// Kernel value used on the matrix diagonal: the profile at contact when that
// is finite, otherwise its mean over one grid cell around the node (an arc
// for d = 2, a spherical cap of equal area for d = 3).
double diagonal_value(const SymbolTransform& T, double w) {
  if (!T.singular_at_zero) return probe(T, 0.0);
  const double z = T.zero_exponent;
  if (T.d == 2) {
    const double h = 0.5 * w;  // weights are arc lengths
    auto f = [&](double t) { return probe(T, 2.0 * std::sin(0.5 * t)); };
    return graded_integral(f, h, z) / h;
  }
  const double c0 = std::clamp(1.0 - w / (2.0 * kPi), -1.0, 1.0);
  const double psi0 = std::acos(c0);
  auto f = [&](double psi) {
    return probe(T, 2.0 * std::sin(0.5 * psi)) * std::sin(psi);
  };
  return 2.0 * kPi * graded_integral(f, psi0, z + 1.0) / w;
}

// sin z - z cos z without the cancellation near zero.
double sin_minus_zcos(double z) {
  if (std::abs(z) < 1e-2) {
    double z2 = z * z;
    return z * z2 * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0);
  }
  return std::sin(z) - z * std::cos(z);
}

int infer_resolution(const quad::SphereGrid& grid) {
  const int n = static_cast<int>(grid.points.size());
  if (grid.d == 2) return n;
  return static_cast<int>(std::lround(std::sqrt(0.5 * n)));
}

}  // namespace

double fourier_radial(const radial::RadialSymbol& a, int d, double rho) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("fourier_radial: d must be 2 or 3");
  if (rho < 0.0) throw std::invalid_argument("fourier_radial: rho < 0");
  const double alpha = 0.5 * (d - 2);
  if (rho < 1e-12) {
    // ahat(0) = (2^alpha Gamma(alpha+1))^{-1} int a(r) r^{d-1} dr; only
    // decaying symbols have a finite value there.
    double cut = std::min(a.support_radius, a.negligible_radius);
    if (!std::isfinite(cut))
      throw std::invalid_argument(
          "fourier_radial: transform at 0 needs a decaying symbol");
    const double c0 =
        1.0 / (std::pow(2.0, alpha) * specfun::gamma_fn(alpha + 1.0));
    quad::TailPolicy pol;
    pol.support = cut;
    pol.r_max = cut * (1.0 + 1e-12) + 1.0;
    auto f = [&](double r) { return a.eval(r) * std::pow(r, d - 1.0); };
    return c0 * quad::integrate_semiaxis(f, pol).value;
  }
  // Substituting t = rho r aligns the pi-wide oscillation blocks with the
  // zeros of J_alpha regardless of rho:
  //   ahat(rho) = rho^{-d} int_0^inf a(t/rho) J_alpha(t) t^{d/2} dt.
  auto g = [&](double t) {
    return a.eval(t / rho) * specfun::bessel_j(alpha, t) *
           std::pow(t, 0.5 * d);
  };
  quad::TailPolicy pol;
  pol.abs_tol = 1e-10;
  switch (a.decay) {
    case radial::Decay::compact:
      pol.support = rho * a.support_radius;
      pol.r_max = pol.support * (1.0 + 1e-12) + 1.0;
      break;
    case radial::Decay::integrable:
      pol.support = rho * a.negligible_radius;
      pol.r_max = pol.support * (1.0 + 1e-12) + 1.0;
      break;
    default:
      // Oscillatory tail with no rectified mean: block sums alternate, so
      // the rational extrapolation is the right accelerator.
      pol.acceleration = quad::Accel::sequence_extrapolation;
      break;
  }
  return std::pow(rho, -static_cast<double>(d)) *
         quad::integrate_semiaxis(g, pol).value;
}

SymbolTransform from_radial(const radial::RadialSymbol& a, int d) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("from_radial: d must be 2 or 3");
  SymbolTransform T;
  T.d = d;
  T.name = a.name;
  switch (a.family) {
    case radial::Family::power: {
      const double mu = a.power_exponent;
      if (!(mu > 0.0 && mu < d))
        throw std::domain_error(
            "from_radial: power transform needs 0 < mu < d");
      const double c = std::pow(2.0, 0.5 * d - mu) *
                       specfun::gamma_fn(0.5 * (d - mu)) /
                       specfun::gamma_fn(0.5 * mu);
      T.profile = [c, mu, d](double rho) { return c * std::pow(rho, mu - d); };
      T.singular_at_zero = true;
      T.zero_exponent = mu - d;
      break;
    }
    case radial::Family::gauss: {
      const double s = a.scale;
      const double amp = std::pow(s, d);
      T.profile = [s, amp](double rho) {
        return amp * std::exp(-0.5 * s * s * rho * rho);
      };
      break;
    }
    case radial::Family::indicator: {
      const double r1 = a.support_radius;
      if (d == 2) {
        T.profile = [r1](double rho) {
          if (rho < 1e-300) return 0.5 * r1 * r1;
          return r1 * specfun::bessel_j(1.0, rho * r1) / rho;
        };
      } else {
        const double c = std::sqrt(2.0 / kPi);
        T.profile = [r1, c](double rho) {
          if (rho < 1e-150) return c * r1 * r1 * r1 / 3.0;
          return c * sin_minus_zcos(rho * r1) / (rho * rho * rho);
        };
      }
      break;
    }
    case radial::Family::exp: {
      const double s = a.scale;
      if (d == 2) {
        T.profile = [s](double rho) {
          double q = 1.0 + s * s * rho * rho;
          return s * s / (q * std::sqrt(q));
        };
      } else {
        const double c = std::sqrt(2.0 / kPi) * 2.0 * s * s * s;
        T.profile = [s, c](double rho) {
          double q = 1.0 + s * s * rho * rho;
          return c / (q * q);
        };
      }
      break;
    }
    case radial::Family::chirp: {
      const double amp = std::pow(2.0, 0.5 * d);
      const double phase = 0.25 * kPi * d;
      T.profile = [amp, phase](double rho) {
        return amp * std::sin(phase - rho * rho);
      };
      break;
    }
    case radial::Family::custom: {
      T.provenance = Provenance::hankel_numeric;
      T.profile = [a, d](double rho) { return fourier_radial(a, d, rho); };
      break;
    }
  }
  return T;
}

SymbolTransform constant_transform(int d, double c) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("constant_transform: d must be 2 or 3");
  SymbolTransform T;
  T.d = d;
  T.profile = [c](double) { return c; };
  T.name = "const:" + io::format_double(c);
  return T;
}

OperatorMatrix build_nodal(const SymbolTransform& T,
                           const quad::SphereGrid& grid) {
  if (T.d != grid.d)
    throw std::invalid_argument("build_nodal: dimension mismatch");
  const int n = static_cast<int>(grid.points.size());
  const double pref = kPi / std::pow(2.0 * kPi, 0.5 * T.d);
  Eigen::VectorXd sw = grid.weights.cwiseSqrt();
  // Cell averages can be expensive and may legitimately throw, so they run
  // before the parallel fill.
  Eigen::VectorXd diag(n);
  for (int k = 0; k < n; ++k)
    diag[k] = diagonal_value(T, grid.weights[k]) * grid.weights[k];
  Eigen::MatrixXd m(n, n);
  parallel_for(n, [&](long k) {
    m(k, k) = pref * diag[k];
    for (int l = static_cast<int>(k) + 1; l < n; ++l) {
      double rho = (grid.points[k] - grid.points[l]).norm();
      m(k, l) = pref * probe(T, rho) * sw[k] * sw[l];
    }
  });
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) m(l, k) = m(k, l);
  OperatorMatrix out;
  out.entries = m.cast<std::complex<double>>();
  out.basis = Basis::nodal;
  out.d = T.d;
  out.grid_size = n;
  out.hermitian = true;
  return out;
}

Eigen::VectorXi harmonic_degrees(int d, int nmax) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("harmonic_degrees: d must be 2 or 3");
  if (nmax < 0) throw std::invalid_argument("harmonic_degrees: nmax < 0");
  int m = 0;
  for (int n = 0; n <= nmax; ++n) m += specfun::multiplicity(d, n);
  Eigen::VectorXi deg(m);
  int i = 0;
  for (int n = 0; n <= nmax; ++n)
    for (int j = 1; j <= specfun::multiplicity(d, n); ++j) deg[i++] = n;
  return deg;
}

OperatorMatrix build_harmonic(const SymbolTransform& T, int d, int nmax,
                              const quad::SphereGrid& grid) {
  if (d != T.d || d != grid.d)
    throw std::invalid_argument("build_harmonic: dimension mismatch");
  if (nmax < 0) throw std::invalid_argument("build_harmonic: nmax < 0");
  const int res = infer_resolution(grid);
  if (res < 4 * nmax)
    throw std::invalid_argument(
        "build_harmonic: grid resolution below 4 * nmax");
  const int n = static_cast<int>(grid.points.size());
  const double pref = kPi / std::pow(2.0 * kPi, 0.5 * d);
  Eigen::VectorXd sw = grid.weights.cwiseSqrt();
  Eigen::VectorXd diag(n);
  for (int k = 0; k < n; ++k)
    diag[k] = diagonal_value(T, grid.weights[k]) * grid.weights[k];

  Eigen::VectorXi deg = harmonic_degrees(d, nmax);
  const int m = static_cast<int>(deg.size());
  Eigen::MatrixXd basis(m, n);
  {
    std::vector<specfun::HarmonicIndex> idx;
    idx.reserve(m);
    for (int nn = 0; nn <= nmax; ++nn)
      for (int j = 1; j <= specfun::multiplicity(d, nn); ++j)
        idx.push_back({d, nn, j});
    parallel_for(m, [&](long i) {
      for (int k = 0; k < n; ++k)
        basis(i, k) = specfun::sph_harmonic(idx[i], grid.points[k]) * sw[k];
    });
  }

  // H = B K B^T with K streamed through in row blocks; K itself is n x n
  // and never materialized.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  const int blk = 256;
  Eigen::MatrixXd kblock(blk, n);
  for (int b0 = 0; b0 < n; b0 += blk) {
    const int rows = std::min(blk, n - b0);
    parallel_for(rows, [&](long r) {
      const int k = b0 + static_cast<int>(r);
      for (int l = 0; l < n; ++l) {
        if (l == k) {
          kblock(r, l) = pref * diag[k];
        } else {
          double rho = (grid.points[k] - grid.points[l]).norm();
          kblock(r, l) = pref * probe(T, rho) * sw[k] * sw[l];
        }
      }
    });
    h.noalias() += basis.middleCols(b0, rows) *
                   (kblock.topRows(rows) * basis.transpose());
  }
  Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  OperatorMatrix out;
  out.entries = sym.cast<std::complex<double>>();
  out.basis = Basis::harmonic;
  out.d = d;
  out.nmax = nmax;
  out.grid_size = n;
  out.hermitian = true;
  return out;
}

Eigen::VectorXd circle_eigs(const SymbolTransform& T, int nmax) {
  if (T.d != 2)
    throw std::invalid_argument("circle_eigs: circle route needs d = 2");
  if (nmax < 0) throw std::invalid_argument("circle_eigs: nmax < 0");
  // lambda_n = int_0^pi ahat(2 sin(tau/2)) cos(n tau) dtau, by symmetry of
  // the full-period form.  The profile is sampled once on a fixed composite
  // grid: uniform panels where cos(n tau) oscillates, dyadic panels plus an
  // exponent completion where the profile may blow up.
  std::vector<double> tau, wt;
  const double cut = kPi / 16.0;
  const int uniform = std::max(16, 2 * nmax);
  for (int p = 0; p < uniform; ++p) {
    double lo = cut + (kPi - cut) * p / uniform;
    double hi = cut + (kPi - cut) * (p + 1) / uniform;
    specfun::GaussRule rule = specfun::gauss_legendre_on(24, lo, hi);
    for (int i = 0; i < rule.nodes.size(); ++i) {
      tau.push_back(rule.nodes[i]);
      wt.push_back(rule.weights[i]);
    }
  }
  double edge = cut;
  for (int k = 0; k < 46; ++k) {
    double lo = 0.5 * edge;
    specfun::GaussRule rule = specfun::gauss_legendre_on(16, lo, edge);
    for (int i = 0; i < rule.nodes.size(); ++i) {
      tau.push_back(rule.nodes[i]);
      wt.push_back(rule.weights[i]);
    }
    edge = lo;
  }
  std::vector<double> fv(tau.size());
  for (size_t i = 0; i < tau.size(); ++i)
    fv[i] = probe(T, 2.0 * std::sin(0.5 * tau[i]));
  // Below the last dyadic edge cos(n tau) is 1 to machine accuracy, so the
  // sliver contributes its plain integral.
  double head = probe(T, 2.0 * std::sin(0.5 * edge)) * edge /
                (T.singular_at_zero ? T.zero_exponent + 1.0 : 1.0);
  Eigen::VectorXd lam(nmax + 1);
  for (int nn = 0; nn <= nmax; ++nn) {
    double s = 0.0;
    for (size_t i = 0; i < tau.size(); ++i)
      s += fv[i] * std::cos(nn * tau[i]) * wt[i];
    lam[nn] = s + head;
  }
  return lam;
}

EigenResult eigen_hermitian(const OperatorMatrix& M, bool want_vectors) {
  const Eigen::Index n = M.entries.rows();
  if (M.entries.cols() != n)
    throw std::invalid_argument("eigen_hermitian: matrix not square");
  if (!M.hermitian)
    throw std::invalid_argument("eigen_hermitian: matrix not flagged "
                                "hermitian");
  const double base = M.entries.norm();
  if ((M.entries - M.entries.adjoint()).norm() > 1e-12 * std::max(base, 1.0))
    throw std::invalid_argument("eigen_hermitian: entries are not hermitian");
  Eigen::MatrixXcd a = 0.5 * (M.entries + M.entries.adjoint());
  Eigen::MatrixXcd v;
  if (want_vectors) v = Eigen::MatrixXcd::Identity(n, n);

  EigenResult out;
  out.sweeps = 0;
  out.converged = false;
  const double target = 1e-12 * base;
  const double skip = n > 0 ? 1e-14 * base / static_cast<double>(n) : 0.0;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = std::sqrt(std::max(
        0.0, a.squaredNorm() - a.diagonal().squaredNorm()));
    if (off <= target || base == 0.0) {
      out.converged = true;
      break;
    }
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        std::complex<double> apq = a(p, q);
        double mag = std::abs(apq);
        if (mag <= skip) continue;
        // Unitary plane rotation annihilating (p, q): with apq = m e^{i th}
        // and tan chosen from the smaller root of t^2 - 2 tau t - 1 = 0 the
        // transformed off-diagonal entry vanishes exactly.
        std::complex<double> phase = apq / mag;
        double tau =
            (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        double t = tau == 0.0
                       ? 1.0
                       : -std::copysign(1.0, tau) /
                             (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        std::complex<double> sp = s * phase;
        std::complex<double> spc = s * std::conj(phase);
        for (Eigen::Index i = 0; i < n; ++i) {
          std::complex<double> aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip + spc * aiq;
          a(i, q) = -sp * aip + c * aiq;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          std::complex<double> apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj + sp * aqj;
          a(q, j) = -spc * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        if (want_vectors) {
          for (Eigen::Index i = 0; i < n; ++i) {
            std::complex<double> vip = v(i, p), viq = v(i, q);
            v(i, p) = c * vip + spc * viq;
            v(i, q) = -sp * vip + c * viq;
          }
        }
      }
    }
  }
  if (!out.converged) {
    double off = std::sqrt(std::max(
        0.0, a.squaredNorm() - a.diagonal().squaredNorm()));
    out.converged = off <= target;
  }
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     double ai = std::abs(a(i, i).real());
                     double aj = std::abs(a(j, j).real());
                     if (ai != aj) return ai > aj;
                     return a(i, i).real() > a(j, j).real();
                   });
  out.eigenvalues.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.eigenvalues[i] = a(order[static_cast<size_t>(i)],
                           order[static_cast<size_t>(i)])
                             .real();
  if (want_vectors) {
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      out.vectors.col(i) = v.col(order[static_cast<size_t>(i)]);
  }
  return out;
}

double operator_norm(const OperatorMatrix& M) {
  if (M.entries.rows() == 0) return 0.0;
  return std::abs(eigen_hermitian(M).eigenvalues[0]);
}

std::string matrix_csv(const OperatorMatrix& M) {
  std::string out = "row,col,re,im\n";
  for (Eigen::Index i = 0; i < M.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < M.entries.cols(); ++j)
      out += io::csv_line({std::to_string(i), std::to_string(j),
                           io::format_double(M.entries(i, j).real()),
                           io::format_double(M.entries(i, j).imag())});
  return out;
}

std::string spectrum_csv(const Eigen::VectorXd& eigs) {
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    out += io::csv_line({std::to_string(i), io::format_double(eigs[i])});
  return out;
}

}  // namespace htz::sphereop
