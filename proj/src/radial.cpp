#include "htz/radial.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "htz/io.hpp"
#include "htz/specfun.hpp"

namespace htz::radial {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gl_fixed(const std::function<double(double)>& f, double a, double b,
                int order) {
  const specfun::GaussRule& rule = specfun::gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < order; ++q)
    acc += half * rule.weights[q] * f(mid + half * rule.nodes[q]);
  return acc;
}

// J at the orders the chirp route produces; the one negative order
// (planar n = 0 gives -1/2) has the elementary cosine form.
double j_any(double order, double z) {
  if (order >= 0.0) return specfun::bessel_j(order, z);
  return std::sqrt(2.0 / (kPi * z)) * std::cos(z);
}

// int_0^{s0} r^{1-mu} J_nu(r)^2 r dr through the squared power series
// J_nu^2 = sum_k (-1)^k c_k r^{2nu+2k}; each term integrates in closed form,
// so the r -> 0 singularity of power symbols never meets a quadrature node.
// Requires 2nu + 2 - mu > 0, which the mu < d check upstream guarantees.
double power_head(double nu, double mu, double s0) {
  const double p0 = 2.0 * nu + 2.0 - mu;
  const double ls0 = std::log(s0);
  const double l4 = std::log(4.0);
  double sum = 0.0;
  std::vector<double> li;
  for (int k = 0; k <= 80; ++k) {
    li.resize(k + 1);
    double lmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= k; ++i) {
      li[i] = -(std::lgamma(i + 1.0) + std::lgamma(k - i + 1.0) +
                std::lgamma(nu + i + 1.0) + std::lgamma(nu + k - i + 1.0));
      lmax = std::max(lmax, li[i]);
    }
    double inner = 0.0;
    for (int i = 0; i <= k; ++i) inner += std::exp(li[i] - lmax);
    const double pk = p0 + 2.0 * k;
    const double lterm =
        lmax + std::log(inner) - (nu + k) * l4 + pk * ls0 - std::log(pk);
    const double term = ((k % 2) ? -1.0 : 1.0) * std::exp(lterm);
    sum += term;
    if (k >= 4 && std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
  }
  return sum;
}

// gamma for a(r) = sin(r^2/4) as a finite integral: Neumann's product
// formula averages J_{2nu}(2r cos phi) over phi, and the inner Fresnel
// transform of J_{2nu} evaluates in closed form, leaving a smooth
// integrand on [0, pi/2].
double chirp_route(int d, int n, double* bound) {
  const double nu = n + 0.5 * (d - 2);
  const double mu = 2.0 * nu;
  auto f = [&](double phi) {
    const double b = 2.0 * std::cos(phi);
    const double z = 0.5 * b * b;  // z > 0 at every Gauss node
    const std::complex<double> w =
        std::polar(1.0, 0.75 * kPi - z + 0.25 * kPi * (mu - 1.0)) *
        std::complex<double>(j_any(0.5 * (mu - 1.0), z),
                             -j_any(0.5 * (mu + 1.0), z));
    return b * std::imag(w);
  };
  const double coarse = gl_fixed(f, 0.0, 0.5 * kPi, 48);
  const double fine = gl_fixed(f, 0.0, 0.5 * kPi, 96);
  const double value = 2.0 * std::sqrt(kPi) * fine;
  *bound = 2.0 * std::sqrt(kPi) * 3.0 * std::abs(fine - coarse) +
           1e-15 * (std::abs(value) + 1.0);
  return value;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int m = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < m; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx == 0.0 ? 0.0 : sxy / sxx;
}

}  // namespace

RadialSymbol power_symbol(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("power_symbol: mu must be > 0");
  RadialSymbol a;
  a.eval = [mu](double r) { return std::pow(r, -mu); };
  a.decay = Decay::power;
  a.family = Family::power;
  a.power_exponent = mu;
  a.nonnegative = true;
  a.name = "power:mu=" + io::format_double(mu);
  return a;
}

RadialSymbol gauss_symbol(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("gauss_symbol: s must be > 0");
  RadialSymbol a;
  a.eval = [s](double r) { return std::exp(-0.5 * (r / s) * (r / s)); };
  a.decay = Decay::integrable;
  a.family = Family::gauss;
  a.scale = s;
  a.negligible_radius = 10.0 * s;  // exp(-50) ~ 2e-22
  a.nonnegative = true;
  a.name = "gauss:s=" + io::format_double(s);
  return a;
}

RadialSymbol indicator_symbol(double rho) {
  if (!(rho > 0.0))
    throw std::invalid_argument("indicator_symbol: rho must be > 0");
  RadialSymbol a;
  a.eval = [rho](double r) { return r <= rho ? 1.0 : 0.0; };
  a.decay = Decay::compact;
  a.family = Family::indicator;
  a.support_radius = rho;
  a.negligible_radius = rho;
  a.nonnegative = true;
  a.name = "indicator:rho=" + io::format_double(rho);
  return a;
}

RadialSymbol exp_symbol(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("exp_symbol: s must be > 0");
  RadialSymbol a;
  a.eval = [s](double r) { return std::exp(-r / s); };
  a.decay = Decay::integrable;
  a.family = Family::exp;
  a.scale = s;
  a.negligible_radius = 50.0 * s;
  a.nonnegative = true;
  a.name = "exp:s=" + io::format_double(s);
  return a;
}

RadialSymbol chirp_symbol() {
  RadialSymbol a;
  a.eval = [](double r) { return std::sin(0.25 * r * r); };
  a.decay = Decay::oscillatory;
  a.family = Family::chirp;
  a.has_chirp_form = true;
  a.name = "chirp";
  return a;
}

SpectralSequence gamma_sequence(const RadialSymbol& a, int d, int nmax,
                                const quad::TailPolicy& base) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("gamma_sequence: d must be 2 or 3");
  if (nmax < 0) throw std::invalid_argument("gamma_sequence: nmax < 0");
  if (a.decay == Decay::power &&
      !(a.power_exponent > 1.0 && a.power_exponent < d))
    throw std::invalid_argument(
        "gamma_sequence: power symbol integral diverges unless 1 < mu < d");

  SpectralSequence seq;
  seq.d = d;
  seq.gammas.resize(nmax + 1);
  seq.error_bounds.resize(nmax + 1);
  seq.converged.assign(nmax + 1, 0);

  for (int n = 0; n <= nmax; ++n) {
    const double nu = n + 0.5 * (d - 2);
    double gamma, err;
    if (a.has_chirp_form) {
      gamma = chirp_route(d, n, &err);
    } else if (a.decay == Decay::power) {
      const double mu = a.power_exponent;
      const double s0 = 2.0;
      quad::TailPolicy pol = base;
      pol.start = s0;
      // Past the turning point the envelope of J_nu^2 carries corrections in
      // powers of (nu/r)^2, so the extrapolation basis only sees clean power
      // behaviour once the blocks begin well beyond r = nu.  The cap keeps
      // the cost of very high degrees bounded; the error bound still reports
      // whatever accuracy was actually reached.
      pol.transition =
          std::max(base.transition, 2.0 * nu + std::min(0.5 * nu * nu, 900.0));
      // Low degrees get a wide block window: the extrapolation bound for a
      // rho^{-(mu-1)} tail tightens with span, and blocks out there cost
      // little.  High degrees keep the window proportional to the (capped)
      // transition and carry correspondingly larger bounds.
      pol.r_max = std::max({base.r_max, 4.0 * pol.transition,
                            nu <= 32.0 ? 1600.0 * kPi : 0.0});
      pol.tail_exponent = mu - 1.0;
      pol.acceleration = quad::Accel::sequence_extrapolation;
      auto f = [&](double r) {
        const double j = specfun::bessel_j(nu, r);
        return std::pow(r, 1.0 - mu) * j * j;
      };
      quad::IntegralResult res = quad::integrate_semiaxis(f, pol);
      gamma = kPi * (power_head(nu, mu, s0) + res.value);
      err = kPi * 2.0 * res.error_bound;
    } else {
      quad::TailPolicy pol = base;
      if (a.decay == Decay::compact) {
        pol.support = std::min(a.support_radius, pol.support);
      } else if (a.decay == Decay::integrable) {
        pol.support = std::min(a.negligible_radius, pol.support);
      } else {
        pol.transition = std::max(base.transition, 2.0 * nu);
      }
      auto f = [&](double r) {
        const double j = specfun::bessel_j(nu, r);
        return a.eval(r) * j * j * r;
      };
      quad::IntegralResult res = quad::integrate_semiaxis(f, pol);
      gamma = kPi * res.value;
      err = kPi * res.error_bound;
    }
    err += 1e-15 * (std::abs(gamma) + 1.0);
    seq.gammas[n] = gamma;
    seq.error_bounds[n] = err;
    // Mixed tolerance: abs_tol counts per unit of gamma, so large eigenvalues
    // are not flagged for missing an absolute target their exponent cannot see.
    seq.converged[n] = err <= base.abs_tol * (1.0 + std::abs(gamma)) ? 1 : 0;
  }
  return seq;
}

double power_gamma(int d, double mu, int n) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("power_gamma: d must be 2 or 3");
  if (n < 0) throw std::invalid_argument("power_gamma: n < 0");
  if (!(mu > 1.0 && mu < d))
    throw std::domain_error("power_gamma: formula needs 1 < mu < d");
  using specfun::log_gamma;
  const double num = log_gamma(mu - 1.0) + log_gamma(n + 0.5 * (d - mu));
  const double den = (mu - 1.0) * std::log(2.0) + 2.0 * log_gamma(0.5 * mu) +
                     log_gamma(n + 0.5 * (d + mu) - 1.0);
  return kPi * std::exp(num - den);
}

double chirp_gamma(int d, int n) {
  const double nu = n + 0.5 * (d - 2);
  return 2.0 * kPi * std::cos(2.0 - 0.5 * kPi * nu) * specfun::bessel_j(nu, 2.0);
}

double chirp_gamma_table(int d, int n) {
  const double nu = n + 0.5 * (d - 2);
  return 2.0 * kPi * std::cos(1.0 - 0.5 * kPi * nu) * specfun::bessel_j(nu, 2.0);
}

hspace::SphereFunction diag_apply(const SpectralSequence& seq,
                                  const hspace::SphereFunction& phi) {
  if (phi.d != seq.d)
    throw std::invalid_argument("diag_apply: dimension mismatch");
  if (phi.max_degree() > seq.nmax())
    throw std::out_of_range(
        "diag_apply: symbol has degrees beyond the computed spectral range");
  hspace::SphereFunction out = phi;
  for (auto& [k, c] : out.coeffs) c *= seq.gammas[k.first];
  return out;
}

SpectrumSummary spectrum_summary(const SpectralSequence& seq) {
  SpectrumSummary s;
  const int m = seq.nmax();
  s.sup_abs = seq.gammas.cwiseAbs().maxCoeff();
  if (s.sup_abs == 0.0) {
    s.compact = true;
    s.limit_point = 0.0;
    s.spec_points = {0.0};
    return s;
  }

  std::vector<double> xs, ys;
  for (int n = m / 2; n <= m; ++n)
    if (std::abs(seq.gammas[n]) > 0.0) {
      xs.push_back(std::log(n + 1.0));
      ys.push_back(std::log(std::abs(seq.gammas[n])));
    }
  double tail_max = 0.0;
  const int tail_lo = m - m / 4;
  for (int n = tail_lo; n <= m; ++n)
    tail_max = std::max(tail_max, std::abs(seq.gammas[n]));

  const bool have_fit = xs.size() >= 3;
  const double slope = have_fit ? ls_slope(xs, ys) : 0.0;
  s.compact = tail_max <= 1e-10 * s.sup_abs || (have_fit && slope <= -0.05);

  if (s.compact) {
    s.limit_point = 0.0;
  } else {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
    int cnt = 0;
    for (int n = tail_lo; n <= m; ++n) {
      lo = std::min(lo, seq.gammas[n]);
      hi = std::max(hi, seq.gammas[n]);
      mean += seq.gammas[n];
      ++cnt;
    }
    mean /= cnt;
    if (hi - lo <= 1e-6 * (std::abs(mean) + 1e-300)) s.limit_point = mean;
  }

  std::vector<double> v(seq.gammas.data(), seq.gammas.data() + m + 1);
  std::sort(v.begin(), v.end());
  const double tol = 1e-12 * std::max(1.0, s.sup_abs);
  for (double g : v)
    if (s.spec_points.empty() || g - s.spec_points.back() > tol)
      s.spec_points.push_back(g);
  if (s.compact) {
    bool has_zero = false;
    for (double g : s.spec_points) has_zero = has_zero || std::abs(g) <= tol;
    if (!has_zero) {
      s.spec_points.push_back(0.0);
      std::sort(s.spec_points.begin(), s.spec_points.end());
    }
  }
  return s;
}

SchattenReport schatten_probe(const SpectralSequence& seq, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("schatten_probe: need p >= 1");
  SchattenReport rep;
  for (int N = 4; N <= seq.nmax(); N *= 2) rep.ladder.push_back(N);
  if (rep.ladder.size() < 4) {
    rep.inconclusive = true;
  }
  double cum = 0.0;
  int n = 0;
  for (int N : rep.ladder) {
    for (; n <= N; ++n)
      cum += specfun::multiplicity(seq.d, n) *
             std::pow(std::abs(seq.gammas[n]), p);
    rep.partial_sums.push_back(cum);
  }
  if (rep.inconclusive) return rep;

  // Increment ratios settle near 2^{d-1-p(mu-1)} for power-law decay; a
  // persistent ratio below one half marks a convergent sum.
  std::vector<double> ratios;
  for (size_t k = 2; k < rep.partial_sums.size(); ++k) {
    const double d1 = rep.partial_sums[k - 1] - rep.partial_sums[k - 2];
    const double d2 = rep.partial_sums[k] - rep.partial_sums[k - 1];
    if (d1 == 0.0)
      ratios.push_back(d2 == 0.0
                           ? 0.0
                           : std::numeric_limits<double>::infinity());
    else
      ratios.push_back(d2 / d1);
  }
  const size_t r = ratios.size();
  rep.member = r >= 2 && ratios[r - 1] < 0.5 && ratios[r - 2] < 0.5;
  return rep;
}

RankReport finite_rank_probe(const RadialSymbol& a, int d, int nmax) {
  if (!std::isfinite(a.support_radius))
    throw std::invalid_argument("finite_rank_probe: symbol must have compact support");
  const SpectralSequence seq = gamma_sequence(a, d, nmax);
  RankReport r;
  r.rank_verdict = a.nonnegative;
  r.max_abs_gamma = seq.gammas.cwiseAbs().maxCoeff();
  r.min_abs_gamma = seq.gammas.cwiseAbs().minCoeff();
  const double thresh = 1e-13 * r.max_abs_gamma;
  for (int n = 0; n <= nmax; ++n)
    if (std::abs(seq.gammas[n]) > thresh) ++r.numerical_rank;
  return r;
}

std::string sequence_csv(const SpectralSequence& seq) {
  std::string out = io::csv_line({"n", "gamma", "error_bound"});
  for (int n = 0; n <= seq.nmax(); ++n)
    out += io::csv_line({std::to_string(n), io::format_double(seq.gammas[n]),
                         io::format_double(seq.error_bounds[n])});
  return out;
}

}  // namespace htz::radial
