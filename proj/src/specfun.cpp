#include "htz/specfun.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace htz::specfun {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Godfrey's Lanczos coefficients, g = 7.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_sum(double x) {
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x - 1.0 + i);
  return a;
}

// Power series  J_nu(x) = (x/2)^nu / Gamma(nu+1) sum_k t_k,
// t_0 = 1, t_{k+1} = -t_k (x/2)^2 / ((k+1)(nu+k+1)).
// Leading factor in log form so large nu with small x cannot overflow an
// intermediate; the result may legitimately underflow to 0.
double bessel_series(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 400; ++k) {
    term *= -q / ((k + 1.0) * (nu + k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  double lead = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0);
  return std::exp(lead) * sum;
}

// Hankel expansion: J_nu(x) = sqrt(2/(pi x)) (cos w P - sin w Q) with
// w = x - nu pi/2 - pi/4.  Terms are summed until they stop shrinking.
double bessel_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double t = 1.0;
  for (int k = 0; k < 40; ++k) {
    double t_next = t * (mu - (2.0 * k + 1.0) * (2.0 * k + 1.0)) /
                    (8.0 * x * (k + 1.0));
    if (std::abs(t_next) >= std::abs(t) && k > 2) break;
    t = t_next;
    if (k % 2 == 0)
      q += (k % 4 == 0) ? t : -t;  // t_1, -t_3, t_5, ...
    else
      p += (k % 4 == 1) ? -t : t;  // -t_2, t_4, -t_6, ...
    if (std::abs(t) < 1e-17) break;
  }
  double w = (x - 0.25 * kPi) - 0.5 * kPi * nu;
  return std::sqrt(2.0 / (kPi * x)) * (std::cos(w) * p - std::sin(w) * q);
}

// Oscillatory zone with every order comfortably below the argument: the
// recurrence in the order direction is neutrally stable there (J and Y both
// stay O(1), so neither component of the seed error can grow), and two
// asymptotic seeds at the fractional base order climb to nu in O(nu) steps.
// Fills out[k] = J_{nu0+k}(x) for k = 0..keep-1.  Requires x >= 18 for the
// seeds and x comfortably above the largest order; the caller checks both.
void bessel_forward(double nu0, double x, int keep, double* out) {
  const double base = nu0 - std::floor(nu0);
  const int first = static_cast<int>(std::floor(nu0));
  double jprev = bessel_asymptotic(base, x);
  double jcur = bessel_asymptotic(base + 1.0, x);
  auto store = [&](int m, double v) {
    int idx = m - first;
    if (idx >= 0 && idx < keep) out[idx] = v;
  };
  store(0, jprev);
  store(1, jcur);
  for (int m = 2; m <= first + keep - 1; ++m) {
    double jn = 2.0 * (base + m - 1.0) / x * jcur - jprev;
    jprev = jcur;
    jcur = jn;
    store(m, jcur);
  }
}

// Backward recurrence for y_k ~ C J_{nu+k}(x), k = 0..keep-1, seeded well
// above both the turning point and the highest requested order.  The scale
// C is removed with the normalization
//   sum_j (nu+2j) Gamma(nu+j)/j! J_{nu+2j}(x) = (x/2)^nu,
// whose coefficients are accumulated alongside the descent.  Ladder values,
// partial sum and output are rescaled together, so only ratios matter.
//
// How far past the turning point the sum tail stays relevant depends on
// nu/x in a way that is awkward to bound a priori, so the top is validated
// after the fact: the terms contributed nearest the seed must be negligible
// against the finished sum, both to cap the truncation error and because
// those ladder entries still carry seed contamination.  If not, the descent
// reruns from a higher seed.
void bessel_miller(double nu, double x, int keep, double* out) {
  int top = static_cast<int>(std::ceil(
      std::max(x + 12.0 * std::cbrt(x) + 24.0 - nu, keep + 20.0)));
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<double> d(top / 2 + 1);
    d[0] = 1.0;
    if (top >= 2) d[1] = nu + 2.0;
    for (int j = 1; j + 1 < static_cast<int>(d.size()); ++j)
      d[j + 1] = d[j] * (nu + 2.0 * j + 2.0) * (nu + j) /
                 ((nu + 2.0 * j) * (j + 1.0));
    // The coefficients grow like 2^j; the forward branch keeps descents
    // short enough in practice, but a silent inf here would poison the
    // normalization, so fail loudly instead.
    if (!std::isfinite(d.back()))
      throw std::runtime_error("bessel_miller: normalization overflow");

    double yk1 = 0.0;    // y_{k+1}
    double yk = 1e-160;  // y_k at k = top, arbitrary seed
    double s = (top % 2 == 0) ? d[top / 2] * yk : 0.0;
    double tail = std::abs(s);  // largest |term| near the seed
    const int tail_zone = top - 24;
    for (int k = 0; k < keep; ++k) out[k] = 0.0;
    for (int k = top; k-- > 0;) {
      double ykm1 = 2.0 * (nu + k + 1.0) / x * yk - yk1;
      yk1 = yk;
      yk = ykm1;
      if (k % 2 == 0) {
        double term = d[k / 2] * yk;
        s += term;
        if (k >= tail_zone) tail = std::max(tail, std::abs(term));
      }
      if (k < keep) out[k] = yk;
      if (std::abs(yk) > 1e250) {
        const double b = 1e-250;
        yk *= b;
        yk1 *= b;
        s *= b;
        tail *= b;
        for (int i = k; i < keep; ++i) out[i] *= b;
      }
    }
    if (tail > 1e-18 * std::abs(s)) {
      top = static_cast<int>(1.4 * top) + 48;
      continue;
    }
    // J_{nu+k}(x) = out[k] (x/2)^nu / (Gamma(nu+1) s); the ratio goes
    // through log space because s alone can sit near overflow.
    double lead = nu * std::log(0.5 * x) - std::lgamma(nu + 1.0);
    double scale = std::exp(lead - std::log(std::abs(s)));
    if (s < 0.0) scale = -scale;
    for (int k = 0; k < keep; ++k) out[k] *= scale;
    return;
  }
  throw std::runtime_error("bessel_miller: normalization failed to settle");
}

bool series_ok(double nu, double x) {
  return x <= 8.0 || x * x <= 4.0 * (nu + 1.0);
}

bool asymptotic_ok(double nu, double x) {
  return x >= std::max(18.0, 0.6 * nu * nu + 8.0);
}

// Far enough above the turning point for the order recurrence to run upward.
bool forward_ok(double nu, double x) { return x >= 1.5 * nu + 20.0; }

}  // namespace

double bessel_j(double nu, double x) {
  if (!(nu >= 0.0) || !(x >= 0.0) || !std::isfinite(nu) || !std::isfinite(x))
    throw std::invalid_argument("bessel_j: need nu >= 0, x >= 0");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (series_ok(nu, x)) return bessel_series(nu, x);
  if (asymptotic_ok(nu, x)) return bessel_asymptotic(nu, x);
  double y;
  if (forward_ok(nu, x))
    bessel_forward(nu, x, 1, &y);
  else
    bessel_miller(nu, x, 1, &y);
  return y;
}

Eigen::VectorXd bessel_j_ladder(double nu0, int count, double x) {
  if (count < 1) throw std::invalid_argument("bessel_j_ladder: count < 1");
  if (!(nu0 >= 0.0) || !(x >= 0.0))
    throw std::invalid_argument("bessel_j_ladder: need nu0 >= 0, x >= 0");
  Eigen::VectorXd out(count);
  if (x == 0.0) {
    for (int k = 0; k < count; ++k) out[k] = (nu0 + k == 0.0) ? 1.0 : 0.0;
    return out;
  }
  if (series_ok(nu0 + count - 1, x)) {
    for (int k = 0; k < count; ++k) out[k] = bessel_series(nu0 + k, x);
    return out;
  }
  if (forward_ok(nu0 + count - 1, x)) {
    bessel_forward(nu0, x, count, out.data());
    return out;
  }
  bessel_miller(nu0, x, count, out.data());
  // Entries whose order sits deep in the series regime cost almost nothing
  // to recompute and sidestep any seed contamination near the ladder top.
  for (int k = 0; k < count; ++k)
    if (series_ok(nu0 + k, x)) out[k] = bessel_series(nu0 + k, x);
  return out;
}

double gamma_fn(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw std::invalid_argument("gamma_fn: need x > 0");
  if (x < 0.5) return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  double t = x + 6.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, x - 0.5) * std::exp(-t) *
         lanczos_sum(x);
}

double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw std::invalid_argument("log_gamma: need x > 0");
  if (x < 0.5) return std::log(kPi / std::sin(kPi * x)) - log_gamma(1.0 - x);
  double t = x + 6.5;
  return 0.5 * std::log(2.0 * kPi) + (x - 0.5) * std::log(t) - t +
         std::log(lanczos_sum(x));
}

namespace {

GaussRule make_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton on P_n from the Chebyshev-like guess; symmetry fills the
  // other half.
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double z = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 60; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int m = 2; m <= n; ++m) {
        double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.nodes[k] = -z;
    r.nodes[n - 1 - k] = z;
    r.weights[k] = w;
    r.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 100000)
    throw std::invalid_argument("gauss_legendre: bad order");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

GaussRule gauss_legendre_on(int n, double a, double b) {
  const GaussRule& base = gauss_legendre(n);
  GaussRule r;
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  r.nodes = (base.nodes.array() * half + mid).matrix();
  r.weights = base.weights * half;
  return r;
}

int multiplicity(int d, int n) {
  if (n < 0) throw std::invalid_argument("multiplicity: n < 0");
  if (d == 2) return n == 0 ? 1 : 2;
  if (d == 3) return 2 * n + 1;
  throw std::invalid_argument("multiplicity: d must be 2 or 3");
}

double legendre_norm(int n, int m, double ct) {
  if (m < 0 || m > n) throw std::invalid_argument("legendre_norm: bad (n, m)");
  double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  // Diagonal climb to (m, m), then the degree recurrence; stable in the
  // orthonormal scaling for every degree used here.
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int k = 1; k <= m; ++k)
    pmm *= st * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
  if (n == m) return pmm;
  double pm1 = pmm;
  double pm2 = 0.0;
  for (int k = m + 1; k <= n; ++k) {
    double a = std::sqrt((4.0 * k * k - 1.0) / (double(k) * k - double(m) * m));
    double b = (k == m + 1)
                   ? 0.0
                   : std::sqrt(((k - 1.0) * (k - 1.0) - double(m) * m) /
                               (4.0 * (k - 1.0) * (k - 1.0) - 1.0));
    double p = a * (ct * pm1 - b * pm2);
    pm2 = pm1;
    pm1 = p;
  }
  return pm1;
}

double sph_harmonic(const HarmonicIndex& idx, const Eigen::Vector3d& xi) {
  const int d = idx.d, n = idx.n, j = idx.j;
  if (n < 0 || j < 1 || j > multiplicity(d, n))
    throw std::invalid_argument("sph_harmonic: index out of range");
  if (d == 2) {
    if (n == 0) return 1.0 / std::sqrt(2.0 * kPi);
    double t = std::atan2(xi.y(), xi.x());
    return (j == 1 ? std::cos(n * t) : std::sin(n * t)) / std::sqrt(kPi);
  }
  double ct = xi.z();
  if (j == 1) return legendre_norm(n, 0, ct);
  int m = j / 2;
  double p = std::atan2(xi.y(), xi.x());
  double base = std::sqrt(2.0) * legendre_norm(n, m, ct);
  return (j % 2 == 0) ? base * std::cos(m * p) : base * std::sin(m * p);
}

}  // namespace htz::specfun
