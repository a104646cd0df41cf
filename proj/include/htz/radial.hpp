#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htz/hspace.hpp"
#include "htz/quad.hpp"

namespace htz::radial {

enum class Decay { compact, integrable, power, oscillatory, other };

// Stock families keep their identity so downstream code (Fourier transforms,
// closed-form eigenvalues) can dispatch without sniffing the name string.
enum class Family { custom, power, gauss, indicator, exp, chirp };

// A radial symbol a(r) together with the structure the integrator needs:
// how it decays, where it becomes negligible, and whether a closed-form
// eigenvalue formula applies.
struct RadialSymbol {
  std::function<double(double)> eval;
  Decay decay = Decay::other;
  Family family = Family::custom;
  double support_radius = std::numeric_limits<double>::infinity();
  // Radius beyond which |a| < 1e-20 for Decay::integrable symbols; lets the
  // integrator truncate without an oscillation ladder.
  double negligible_radius = std::numeric_limits<double>::infinity();
  // Tail exponent lambda for Decay::power (a ~ r^{-lambda}).
  double power_exponent = std::numeric_limits<double>::quiet_NaN();
  // Scale parameter s of the gauss and exp families.
  double scale = std::numeric_limits<double>::quiet_NaN();
  bool nonnegative = false;
  bool has_chirp_form = false;  // a(r) = sin(r^2/4): finite-integral route
  std::string name;             // canonical DSL spelling, e.g. "power:mu=2"
};

RadialSymbol power_symbol(double mu);        // r^{-mu}
RadialSymbol gauss_symbol(double s);         // exp(-r^2 / (2 s^2))
RadialSymbol indicator_symbol(double rho);   // chi_[0, rho]
RadialSymbol exp_symbol(double s);           // exp(-r / s)
RadialSymbol chirp_symbol();                 // sin(r^2 / 4)

struct SpectralSequence {
  int d = 2;
  Eigen::VectorXd gammas;        // gamma_a(0..nmax)
  Eigen::VectorXd error_bounds;  // per-entry, conservative
  std::vector<char> converged;   // bound <= abs_tol * (1 + |gamma|)
  int nmax() const { return static_cast<int>(gammas.size()) - 1; }
};

// Default policy for the spectral-coefficient quadrature: seven digits
// relative.  Slow power tails cannot prove much more from a finite window.
inline quad::TailPolicy gamma_policy() {
  quad::TailPolicy p;
  p.abs_tol = 1e-7;
  return p;
}

// gamma_a(n) = pi int_0^inf a(r) J_{n+(d-2)/2}(r)^2 r dr for n = 0..nmax.
// The route is picked per symbol: exact truncation for compact support,
// truncation at negligible_radius for integrable decay, oscillation blocks
// with exponent-matched extrapolation for power tails (with a series head
// absorbing the r -> 0 singularity), and a finite-integral transform for
// the chirp.  Power symbols outside 1 < mu < d are rejected: the defining
// integral diverges at one end or the other.
SpectralSequence gamma_sequence(const RadialSymbol& a, int d, int nmax,
                                const quad::TailPolicy& base = gamma_policy());

// Closed forms.  The power-symbol eigenvalue is the Gamma quotient
//   pi Gamma(mu-1) Gamma(n+(d-mu)/2) / (2^{mu-1} Gamma(mu/2)^2
//   Gamma(n+(d+mu)/2-1)),
// valid for 1 < mu < d.  For the chirp the classical integral-table entry
// and high-precision quadrature disagree in the phase constant; both are
// exposed, and chirp_gamma carries the quadrature-arbitrated phase.
double power_gamma(int d, double mu, int n);
double chirp_gamma(int d, int n);        // 2 pi cos(2 - pi nu / 2) J_nu(2)
double chirp_gamma_table(int d, int n);  // 2 pi cos(1 - pi nu / 2) J_nu(2)

// Multiply coefficient (n, j) by gamma(n); the operator is diagonal in the
// harmonic basis with one eigenvalue per degree.
hspace::SphereFunction diag_apply(const SpectralSequence& seq,
                                  const hspace::SphereFunction& phi);

struct SpectrumSummary {
  double sup_abs = 0.0;
  std::optional<double> limit_point;
  bool compact = false;
  std::vector<double> spec_points;  // distinct gamma values, 0 added if compact
};

// Tail-decay fit over the computed range; compactness is a verdict about
// the fitted trend, not a proof.
SpectrumSummary spectrum_summary(const SpectralSequence& seq);

struct SchattenReport {
  std::vector<int> ladder;           // N values, doubling
  std::vector<double> partial_sums;  // sum_{n<=N} N_{n,d} |gamma(n)|^p
  bool member = false;
  bool inconclusive = false;
};

// Plateau detection on the partial sums of the p-th power with degree
// multiplicities: member when successive dyadic increments keep shrinking
// by better than half.
SchattenReport schatten_probe(const SpectralSequence& seq, double p);

struct RankReport {
  double min_abs_gamma = 0.0;
  double max_abs_gamma = 0.0;
  int numerical_rank = 0;   // entries above 1e-13 * max|gamma|
  bool rank_verdict = false;  // meaningful only for nonnegative symbols
};

// For a compactly supported symbol: every gamma is an integral of a fixed
// sign pattern, so a nonnegative nonzero symbol should show full rank.
RankReport finite_rank_probe(const RadialSymbol& a, int d, int nmax);

// CSV rows (n, gamma, error_bound) with a header.
std::string sequence_csv(const SpectralSequence& seq);

}  // namespace htz::radial
