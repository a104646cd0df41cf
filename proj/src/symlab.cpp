#include "htz/symlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "htz/parallel.hpp"
#include "htz/specfun.hpp"

namespace htz::symlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double gl_panel(const std::function<double(double)>& f, double lo, double hi,
                int order) {
  specfun::GaussRule rule = specfun::gauss_legendre_on(order, lo, hi);
  double s = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

// Integral over (0, hi] of g ~ c t^z near the origin: dyadic panels plus the
// exponent completion of the last sliver.
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

}  // namespace

CutoffWindow::CutoffWindow(double outer) : r0(outer) {
  if (!(outer > 2.0))
    throw std::invalid_argument("CutoffWindow: outer radius must exceed 2");
}

double CutoffWindow::omega(double rho) const {
  if (rho <= 2.0) return 1.0;
  if (rho >= r0) return 0.0;
  // exp-bump partition ramp: C-infinity, 1 at tau = 1, 0 at tau = 0
  auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  double tau = (r0 - rho) / (r0 - 2.0);
  double a = g(tau), b = g(1.0 - tau);
  return a / (a + b);
}

radial::RadialSymbol degenerate_part(const sphereop::SymbolTransform& T,
                                     const CutoffWindow& w, double rho_cut) {
  const int d = T.d;
  const double alpha = 0.5 * (d - 2);
  auto cache = std::make_shared<std::map<double, double>>();
  auto guard = std::make_shared<std::mutex>();
  auto profile = T.profile;
  radial::RadialSymbol out;
  out.eval = [=](double r) {
    {
      std::lock_guard<std::mutex> lock(*guard);
      auto it = cache->find(r);
      if (it != cache->end()) return it->second;
    }
    // a*(r) = r^{-alpha} int_2^cut ahat(rho) (1 - omega) J_alpha(r rho)
    //         rho^{d/2} drho, the unitary transform being its own inverse;
    //         the limit branch covers r = 0.
    auto f = [&](double rho) {
      double win = 1.0 - w.omega(rho);
      if (win == 0.0) return 0.0;
      double bess;
      if (r * rho < 1e-8) {
        bess = std::pow(0.5 * rho, alpha) / specfun::gamma_fn(alpha + 1.0) *
               std::pow(rho, 0.5 * d);
      } else {
        bess = specfun::bessel_j(alpha, r * rho) * std::pow(rho, 0.5 * d) /
               std::pow(r, alpha);
      }
      return profile(rho) * win * bess;
    };
    // panel width tracks the Bessel oscillation in rho
    double width = std::min(0.25, 0.5 * kPi / std::max(r, 1.0));
    int panels =
        std::max(8, static_cast<int>(std::ceil((rho_cut - 2.0) / width)));
    double val = 0.0;
    for (int p = 0; p < panels; ++p) {
      double lo = 2.0 + (rho_cut - 2.0) * p / panels;
      double hi = 2.0 + (rho_cut - 2.0) * (p + 1) / panels;
      val += gl_panel(f, lo, hi, 16);
    }
    std::lock_guard<std::mutex> lock(*guard);
    cache->emplace(r, val);
    return val;
  };
  out.decay = radial::Decay::other;
  out.name = "degen(" + T.name + ")";
  return out;
}

radial::RadialSymbol degenerate_part(const radial::RadialSymbol& a,
                                     const CutoffWindow& w, int d) {
  if (a.family != radial::Family::gauss)
    throw std::invalid_argument(
        "degenerate_part: inverse transform needs Gaussian-class decay");
  // hat of the Gaussian falls below 1e-18 of its peak past 9.1 / s
  double cut = std::max(w.r0 + 1.0, 9.1 / a.scale + 1.0);
  return degenerate_part(sphereop::from_radial(a, d), w, cut);
}

sphereop::SymbolTransform windowed_transform(const sphereop::SymbolTransform& T,
                                             const CutoffWindow& w) {
  sphereop::SymbolTransform out = T;
  auto profile = T.profile;
  out.profile = [profile, w](double rho) {
    return profile(rho) * w.omega(rho);
  };
  out.name = T.name + "*window";
  return out;
}

FormResult form_quadrature(
    const std::function<double(const Eigen::Vector3d&)>& a,
    const hspace::SphereFunction& u, const hspace::SphereFunction& v, double R,
    int grid_density) {
  std::vector<hspace::SphereFunction> fields = {u, v};
  if (u.d != v.d)
    throw std::invalid_argument("form_quadrature: dimension mismatch");
  Eigen::MatrixXcd m = form_matrix(a, fields, R, grid_density);
  FormResult out;
  out.value = m(0, 1);

  // Tail model: field amplitudes fall like r^{-(d-1)/2}, so the integrand
  // beyond R is bounded by max|a| on the sphere of radius r times constants.
  // A two-point power fit of that profile gives the bound; growth or a
  // sub-integrable exponent raises the failure flag.
  const int d = u.d;
  quad::SphereGrid probe = quad::sphere_grid(d, 8);
  auto shell_max = [&](double r) {
    double s = 0.0;
    for (const auto& p : probe.points) s = std::max(s, std::abs(a(r * p)));
    return s;
  };
  auto shell_amp = [&](const hspace::SphereFunction& f, double r) {
    double s = 0.0;
    for (const auto& p : probe.points)
      s = std::max(s, std::abs(hspace::synth(f, r * p)));
    return s * std::pow(r, 0.5 * (d - 1));
  };
  double s1 = shell_max(R), s2 = shell_max(2.0 * R);
  double area = d == 2 ? 2.0 * kPi : 4.0 * kPi;
  if (s1 == 0.0 && s2 == 0.0) {
    out.tail_bound = 0.0;
    out.tail_ok = true;
    return out;
  }
  double amp = shell_amp(u, R) * shell_amp(v, R) * area;
  if (s2 > 0.0 && s1 > s2) {
    double q = std::log(s1 / s2) / std::log(2.0);
    if (q > 1.05) {
      out.tail_bound = amp * s1 * R / (q - 1.0);
      out.tail_ok = true;
      return out;
    }
  } else if (s2 == 0.0) {
    // fell off the grid between R and 2R; use one shell width as the span
    out.tail_bound = amp * s1 * R;
    out.tail_ok = true;
    return out;
  }
  out.tail_bound = kInf;
  out.tail_ok = false;
  return out;
}

Eigen::MatrixXcd form_matrix(
    const std::function<double(const Eigen::Vector3d&)>& a,
    const std::vector<hspace::SphereFunction>& fields, double R,
    int grid_density) {
  if (fields.empty())
    throw std::invalid_argument("form_matrix: no fields");
  const int d = fields.front().d;
  for (const auto& f : fields)
    if (f.d != d) throw std::invalid_argument("form_matrix: mixed dimensions");
  if (!(R > 0.0) || grid_density < 4)
    throw std::invalid_argument("form_matrix: bad truncation parameters");
  const int nf = static_cast<int>(fields.size());
  long radial_nodes =
      std::min<long>(static_cast<long>(std::ceil(grid_density * R)), 16384);
  specfun::GaussRule rule =
      specfun::gauss_legendre_on(static_cast<int>(radial_nodes), 0.0, R);
  quad::SphereGrid sg = quad::sphere_grid(d, grid_density);
  const int ns = static_cast<int>(sg.points.size());

  // one partial matrix per radial node, combined in node order so the
  // result does not depend on the thread count
  std::vector<Eigen::MatrixXcd> partial(
      radial_nodes, Eigen::MatrixXcd::Zero(nf, nf));
  parallel_for(radial_nodes, [&](long i) {
    double r = rule.nodes[i];
    double wr = rule.weights[i] * std::pow(r, d - 1.0);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(nf, nf);
    Eigen::VectorXcd vals(nf);
    for (int s = 0; s < ns; ++s) {
      Eigen::Vector3d x = r * sg.points[s];
      double av = a(x);
      if (av == 0.0) continue;
      for (int f = 0; f < nf; ++f) vals[f] = hspace::synth(fields[f], x);
      acc.noalias() += (av * sg.weights[s]) * (vals * vals.adjoint());
    }
    partial[i] = wr * acc;
  });
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nf, nf);
  for (long i = 0; i < radial_nodes; ++i) out += partial[i];
  // F(u, v) = int a u conj(v): the accumulation above builds vals vals^*,
  // whose (i, j) entry is u_i conj(u_j) already in that order.
  return out;
}

BoundednessReport boundedness_constant(const sphereop::SymbolTransform& T) {
  BoundednessReport rep;
  const int d = T.d;
  const double pref = kPi / std::pow(2.0 * kPi, 0.5 * d);
  if (T.singular_at_zero && T.zero_exponent <= -(d - 1.0)) {
    rep.divergent = true;
    rep.constant = kInf;
    rep.operator_bound = kInf;
    return rep;
  }
  auto profile = T.profile;
  if (d == 2) {
    auto f = [&](double psi) {
      return std::abs(profile(2.0 * std::sin(0.5 * psi)));
    };
    rep.constant = 2.0 * graded_integral(f, kPi, T.zero_exponent);
  } else {
    auto f = [&](double psi) {
      return std::abs(profile(2.0 * std::sin(0.5 * psi))) * std::sin(psi);
    };
    rep.constant = 2.0 * kPi * graded_integral(f, kPi, T.zero_exponent + 1.0);
  }
  rep.operator_bound = pref * rep.constant;
  return rep;
}

HdReport hd_check(const radial::RadialSymbol& a, double lambda) {
  HdReport rep;
  const int samples = 400;
  const double lo = 10.0, hi = 1e4;
  double m_early = 0.0, m_late = 0.0;
  for (int i = 0; i < samples; ++i) {
    double r = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    double q = std::abs(a.eval(r)) * std::pow(r, -lambda);
    rep.envelope = std::max(rep.envelope, q);
    if (r < 1e3)
      m_early = std::max(m_early, q);
    else
      m_late = std::max(m_late, q);
  }
  rep.bounded = m_late <= 1.10 * m_early;
  return rep;
}

GaugeReport argf_check(const radial::RadialSymbol& phi, int d,
                       int grid_density) {
  GaugeReport rep;
  sphereop::SymbolTransform T = sphereop::from_radial(phi, d);
  // (d-1)-dimensional disk of radius 2 in the hyperplane: surface factor
  // |S^{d-2}| times the radial weight rho^{d-2}
  const double surf = d == 2 ? 2.0 : 2.0 * kPi;
  auto f = [&](double rho) {
    return std::abs(T.profile(rho)) * std::pow(rho, d - 2.0);
  };
  if (T.singular_at_zero) {
    double z = T.zero_exponent + (d - 2.0);
    if (z <= -1.0) {
      rep.integral = kInf;
      rep.admissible = false;
      return rep;
    }
    rep.integral = surf * graded_integral(f, 2.0, z);
    rep.admissible = std::isfinite(rep.integral);
    return rep;
  }
  // Unknown origin behaviour: dyadic contributions c_j fitted to a power of
  // the panel index.  Geometric decay or a trend exponent above 1 proves an
  // integrable origin; exponent near or below 1 stays inconclusive.
  const int levels = std::max(24, grid_density);
  std::vector<double> c(levels);
  double edge = 2.0;
  double total = 0.0;
  for (int j = 0; j < levels; ++j) {
    double lo2 = 0.5 * edge;
    c[j] = gl_panel(f, lo2, edge, 16);
    total += c[j];
    edge = lo2;
  }
  double ca = 0.0, cb = 0.0;  // octave maxima around 1/2 and at the end
  for (int j = levels / 2 - 2; j < levels / 2 + 2; ++j) ca = std::max(ca, c[j]);
  for (int j = levels - 4; j < levels; ++j) cb = std::max(cb, c[j]);
  if (cb <= 1e-18 * (ca + 1e-300)) {
    rep.integral = surf * total;
    rep.admissible = true;
    return rep;
  }
  double p = std::log(ca / cb) /
             std::log(static_cast<double>(levels) / (0.5 * levels));
  if (p > 1.05) {
    // completion of the c_j ~ j^{-p} trend past the last panel; anchoring at
    // the final contribution keeps geometric tails from being over-counted
    rep.integral = surf * (total + c[levels - 1] * levels / (p - 1.0));
    rep.admissible = true;
    return rep;
  }
  rep.integral = surf * total;
  rep.admissible = false;
  rep.inconclusive = p > 0.5;  // shrinking but too slowly to call
  return rep;
}

CompactnessReport compactness_probe(const radial::RadialSymbol& a, int d,
                                    int nmax) {
  if (a.decay != radial::Decay::compact)
    throw std::invalid_argument("compactness_probe: compact support required");
  radial::SpectralSequence seq = radial::gamma_sequence(a, d, nmax);
  CompactnessReport rep;
  std::vector<double> sv;
  for (int n = 0; n <= nmax; ++n)
    for (int j = 0; j < specfun::multiplicity(d, n); ++j)
      sv.push_back(std::abs(seq.gammas[n]));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  rep.singular_values =
      Eigen::Map<Eigen::VectorXd>(sv.data(), static_cast<long>(sv.size()));
  for (double p : {0.5, 1.0, 2.0}) {
    double sum = 0.0;
    for (double s : sv) sum += std::pow(s, p);
    rep.schatten_traces[p] = sum;
  }
  return rep;
}

sphereop::OperatorMatrix point_mass_nodal(int d, const Eigen::Vector3d& x0,
                                          const quad::SphereGrid& grid) {
  if (d != grid.d)
    throw std::invalid_argument("point_mass_nodal: dimension mismatch");
  const int n = static_cast<int>(grid.points.size());
  const double pref =
      kPi / std::pow(2.0 * kPi, 0.5 * d) * std::pow(2.0 * kPi, -0.5 * d);
  Eigen::VectorXcd v(n);
  for (int k = 0; k < n; ++k) {
    double phase = -x0.dot(grid.points[k]);
    v[k] = std::polar(std::sqrt(grid.weights[k]),
                      phase);
  }
  sphereop::OperatorMatrix out;
  out.entries = pref * (v * v.adjoint());
  out.basis = sphereop::Basis::nodal;
  out.d = d;
  out.grid_size = n;
  out.hermitian = true;
  return out;
}

}  // namespace htz::symlab
