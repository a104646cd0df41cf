#include "htz/quad.hpp"

#include <cmath>
#include <stdexcept>

#include "htz/parallel.hpp"
#include "htz/specfun.hpp"

namespace htz::quad {

namespace {

constexpr double kPi = 3.14159265358979323846;

double panel_sum(const std::function<double(double)>& f, double a, double b,
                 int panels, int order) {
  const specfun::GaussRule& base = specfun::gauss_legendre(order);
  double h = (b - a) / panels;
  return parallel_sum(static_cast<long>(panels) * order, [&](long idx) {
    long p = idx / order;
    int q = static_cast<int>(idx % order);
    double lo = a + p * h;
    double node = lo + 0.5 * h * (base.nodes[q] + 1.0);
    return 0.5 * h * base.weights[q] * f(node);
  });
}

double gl16(const std::function<double(double)>& f, double a, double b) {
  const specfun::GaussRule& base = specfun::gauss_legendre(16);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < 16; ++q)
    acc += half * base.weights[q] * f(mid + half * base.nodes[q]);
  return acc;
}

// One oscillation block, bisected until GL-16 on the halves reproduces the
// whole; integrands whose local frequency outruns the block period (chirps)
// refine automatically instead of aliasing.
double block_integral(const std::function<double(double)>& f, double a,
                      double b, int depth = 0) {
  double whole = gl16(f, a, b);
  double mid = 0.5 * (a + b);
  double split = gl16(f, a, mid) + gl16(f, mid, b);
  if (std::abs(whole - split) <= 1e-13 * (std::abs(split) + 1.0) || depth >= 12)
    return split;
  return block_integral(f, a, mid, depth + 1) +
         block_integral(f, mid, b, depth + 1);
}

// [a, b] with doubling panel counts until two levels agree; returns the
// value and the last inter-level change as its error estimate.
std::pair<double, double> head_integral(const std::function<double(double)>& f,
                                        double a, double b) {
  if (b <= a) return {0.0, 0.0};
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 2.0)));
  double prev = panel_sum(f, a, b, panels, 16);
  double delta = std::abs(prev);
  for (int level = 0; level < 3; ++level) {
    panels *= 2;
    double cur = panel_sum(f, a, b, panels, 16);
    delta = std::abs(cur - prev);
    prev = cur;
    if (delta <= 1e-14 * (std::abs(cur) + 1.0)) break;
  }
  return {prev, delta};
}

// Limit of the partial-sum sequence s_k at edges rho_k assuming
// s_k = L + rho^{-alpha} (c_0 + c_1/rho + ...).  Points are taken
// geometrically from the top of the edge list so the basis stays
// well-conditioned after column scaling.
double power_basis_limit(const std::vector<double>& s,
                         const std::vector<double>& rho, double alpha,
                         double* delta) {
  int nb = static_cast<int>(s.size());
  std::vector<int> pick;
  for (int k = nb; k >= 4; k = k / 2) {
    pick.push_back(k - 1);
    if (static_cast<int>(pick.size()) == 8) break;
  }
  int m = static_cast<int>(pick.size());
  if (m < 3) {
    *delta = std::abs(s.back() - s[nb / 2]);
    return s.back();
  }
  // A tall basis over a narrow edge span is numerically collinear and the
  // solve amplifies block noise into the constant term; cap the column
  // count by the octaves actually available.
  const double span = rho[pick.front()] / rho[pick.back()];
  const int by_span = 3 + static_cast<int>(std::floor(std::log2(span)));
  m = std::max(3, std::min(m, by_span));
  auto solve = [&](int mm) {
    Eigen::MatrixXd A(mm, mm);
    Eigen::VectorXd rhs(mm);
    for (int i = 0; i < mm; ++i) {
      double x = 1.0 / rho[pick[i]];
      A(i, 0) = 1.0;
      for (int j = 1; j < mm; ++j) A(i, j) = std::pow(x, alpha + (j - 1));
      rhs[i] = s[pick[i]];
    }
    for (int j = 1; j < mm; ++j) {
      double sc = A.col(j).cwiseAbs().maxCoeff();
      if (sc > 0) A.col(j) /= sc;
    }
    Eigen::VectorXd u = A.colPivHouseholderQr().solve(rhs);
    return u[0];
  };
  double full = solve(m);
  double drop = solve(m - 1);
  *delta = std::abs(full - drop);
  return full;
}

// Wynn epsilon table over the trailing portion of the partial sums; returns
// the deepest even-column entry and the change from the previous depth.
double wynn_limit(const std::vector<double>& s, double* delta) {
  int n = static_cast<int>(s.size());
  int use = std::min(n, 24);
  std::vector<double> e0(s.end() - use, s.end());
  std::vector<double> e1(use, 0.0);  // epsilon_{-1} = 0
  double best = e0.back(), prev_best = e0.back();
  for (int col = 1; col < use; ++col) {
    std::vector<double> e2(use - col);
    bool ok = true;
    for (int i = 0; i + col < use; ++i) {
      double diff = e0[i + 1] - e0[i];
      if (std::abs(diff) < 1e-300) {
        ok = false;
        break;
      }
      e2[i] = e1[i + 1] + 1.0 / diff;
    }
    if (!ok) break;
    e1.assign(e0.begin(), e0.end());
    e0 = e2;
    if (col % 2 == 0) {
      prev_best = best;
      best = e0.back();
    }
  }
  *delta = std::abs(best - prev_best);
  return best;
}

}  // namespace

IntegralResult integrate_semiaxis(const std::function<double(double)>& f,
                                  const TailPolicy& pol) {
  if (!(pol.r_max > 0.0))
    throw std::invalid_argument("integrate_semiaxis: r_max must be positive");
  if (pol.blocks < 4)
    throw std::invalid_argument("integrate_semiaxis: need blocks >= 4");
  if (!(pol.start >= 0.0) || pol.start >= pol.r_max)
    throw std::invalid_argument("integrate_semiaxis: start out of range");

  IntegralResult res;

  // Compactly supported integrands reduce to a plain finite integral.
  if (pol.support < pol.r_max) {
    auto [v, e] = head_integral(f, pol.start, pol.support);
    res.value = v;
    res.error_bound = e + 1e-15 * (std::abs(v) + 1.0);
    res.converged = res.error_bound <= pol.abs_tol;
    return res;
  }

  double first_edge =
      kPi * std::ceil(std::max({pol.transition, 1.0, pol.start}) / kPi);
  int nb = static_cast<int>(std::floor((pol.r_max - first_edge) / kPi));
  nb = std::min(nb, pol.blocks);

  if (nb < 4) {
    // Not enough room for block bookkeeping: treat everything up to r_max
    // as head and charge one full block of the edge magnitude as tail risk.
    auto [v, e] = head_integral(f, pol.start, pol.r_max);
    res.value = v;
    res.error_bound = e + 3.0 * kPi * std::abs(f(pol.r_max));
    res.converged = res.error_bound <= pol.abs_tol;
    return res;
  }

  auto [head, head_err] = head_integral(f, pol.start, first_edge);

  std::vector<double> blocks(nb);
  parallel_for(nb, [&](long k) {
    double lo = first_edge + k * kPi;
    blocks[static_cast<size_t>(k)] = block_integral(f, lo, lo + kPi);
  });
  std::vector<double> s(nb), rho(nb);
  double run = 0.0;
  for (int k = 0; k < nb; ++k) {
    run += blocks[k];
    s[k] = run;
    rho[k] = first_edge + (k + 1) * kPi;
  }
  res.blocks_used = nb;

  double tail_val, tail_err;
  if (pol.acceleration == Accel::none) {
    tail_val = s.back();
    double cauchy = std::abs(s.back() - s[nb / 2]);
    double last = std::max({std::abs(blocks[nb - 1]), std::abs(blocks[nb - 2]),
                            std::abs(blocks[nb - 3])});
    tail_err = 2.0 * cauchy + 3.0 * last;
  } else if (std::isfinite(pol.tail_exponent)) {
    tail_val = power_basis_limit(s, rho, pol.tail_exponent, &tail_err);
    tail_err = 3.0 * tail_err + std::abs(blocks[nb - 1]) * 1e-3;
  } else {
    tail_val = wynn_limit(s, &tail_err);
    tail_err = 3.0 * tail_err;
  }

  res.value = head + tail_val;
  res.error_bound =
      head_err + tail_err + 1e-15 * (std::abs(res.value) + 1.0);
  res.converged = res.error_bound <= pol.abs_tol;
  return res;
}

SphereGrid sphere_grid(int d, int resolution) {
  if (resolution < 4) throw std::invalid_argument("sphere_grid: resolution < 4");
  SphereGrid g;
  g.d = d;
  if (d == 2) {
    int m = resolution;
    g.points.resize(m);
    g.weights.resize(m);
    for (int k = 0; k < m; ++k) {
      double t = 2.0 * kPi * k / m;
      g.points[k] = Eigen::Vector3d(std::cos(t), std::sin(t), 0.0);
      g.weights[k] = 2.0 * kPi / m;
    }
    return g;
  }
  if (d != 3) throw std::invalid_argument("sphere_grid: d must be 2 or 3");
  int L = resolution, M = 2 * resolution;
  const specfun::GaussRule& polar = specfun::gauss_legendre(L);
  g.points.resize(static_cast<size_t>(L) * M);
  g.weights.resize(static_cast<Eigen::Index>(L) * M);
  for (int i = 0; i < L; ++i) {
    double ct = polar.nodes[i];
    double st = std::sqrt(1.0 - ct * ct);
    for (int k = 0; k < M; ++k) {
      double p = 2.0 * kPi * k / M;
      g.points[static_cast<size_t>(i) * M + k] =
          Eigen::Vector3d(st * std::cos(p), st * std::sin(p), ct);
      g.weights[static_cast<Eigen::Index>(i) * M + k] =
          polar.weights[i] * 2.0 * kPi / M;
    }
  }
  return g;
}

double ball_average(const std::function<double(const Eigen::Vector3d&)>& f,
                    int d, double R, int sphere_resolution) {
  if (!(R > 0.0)) throw std::invalid_argument("ball_average: R must be positive");
  SphereGrid g = sphere_grid(d, sphere_resolution);
  int nr = static_cast<int>(std::min(std::ceil(4.0 * R), 8192.0));
  specfun::GaussRule radial = specfun::gauss_legendre_on(nr, 0.0, R);
  long total = static_cast<long>(nr) * static_cast<long>(g.points.size());
  double acc = parallel_sum(total, [&](long idx) {
    long ir = idx / static_cast<long>(g.points.size());
    long is = idx % static_cast<long>(g.points.size());
    double r = radial.nodes[ir];
    double w = radial.weights[ir] * std::pow(r, d - 1) * g.weights[is];
    return w * f(r * g.points[static_cast<size_t>(is)]);
  });
  return acc / R;
}

}  // namespace htz::quad
