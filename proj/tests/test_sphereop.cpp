#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "htz/quad.hpp"
#include "htz/radial.hpp"
#include "htz/sphereop.hpp"
#include "htz/specfun.hpp"

using namespace htz;
using namespace htz::sphereop;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

// Strips the family tag so from_radial has to take the numeric route.
radial::RadialSymbol as_custom(radial::RadialSymbol a) {
  a.family = radial::Family::custom;
  return a;
}

OperatorMatrix wrap(const Eigen::MatrixXcd& m) {
  OperatorMatrix out;
  out.entries = m;
  out.hermitian = true;
  return out;
}

}  // namespace

TEST_CASE("closed-form transforms") {
  // Each stock family against its Fourier-side expression, evaluated at a
  // few chord lengths.  The expressions themselves are cross-checked against
  // the numeric Hankel route in the next case.
  SymbolTransform g2 = from_radial(radial::gauss_symbol(1.0), 2);
  CHECK(g2.provenance == Provenance::closed_form);
  CHECK(!g2.singular_at_zero);
  CHECK(rel(g2.profile(1.0), std::exp(-0.5)) < 1e-15);
  SymbolTransform g3 = from_radial(radial::gauss_symbol(2.0), 3);
  CHECK(rel(g3.profile(1.0), 1.0826822658929015) < 1e-15);

  SymbolTransform p3 = from_radial(radial::power_symbol(2.0), 3);
  CHECK(p3.singular_at_zero);
  CHECK(p3.zero_exponent == doctest::Approx(-1.0));
  CHECK(rel(p3.profile(1.0), 1.2533141373155003) < 1e-15);
  CHECK(rel(p3.profile(0.5), 2.0 * 1.2533141373155003) < 1e-15);
  CHECK_THROWS_AS(from_radial(radial::power_symbol(2.0), 2),
                  std::domain_error);

  SymbolTransform i2 = from_radial(radial::indicator_symbol(1.0), 2);
  CHECK(rel(i2.profile(0.0), 0.5) < 1e-15);
  CHECK(rel(i2.profile(1.0), 0.44005058574493352) < 1e-14);
  SymbolTransform i3 = from_radial(radial::indicator_symbol(1.0), 3);
  CHECK(rel(i3.profile(1.0), 0.24029783912342701) < 1e-14);
  // z -> 0 continuity across the series switch
  CHECK(rel(i3.profile(1e-3), i3.profile(0.0)) < 1e-5);

  SymbolTransform e2 = from_radial(radial::exp_symbol(1.0), 2);
  CHECK(rel(e2.profile(1.0), 0.35355339059327376) < 1e-15);
  SymbolTransform e3 = from_radial(radial::exp_symbol(1.0), 3);
  CHECK(rel(e3.profile(1.0), 0.39894228040143268) < 1e-15);

  SymbolTransform c2 = from_radial(radial::chirp_symbol(), 2);
  CHECK(rel(c2.profile(1.0), 1.0806046117362794) < 1e-15);
  SymbolTransform c3 = from_radial(radial::chirp_symbol(), 3);
  CHECK(rel(c3.profile(1.0), 2.7635465813520724) < 1e-15);

  CHECK(constant_transform(2, 0.7).profile(1.9) == 0.7);
  CHECK_THROWS_AS(from_radial(radial::gauss_symbol(1.0), 4),
                  std::invalid_argument);
}

TEST_CASE("numeric transform agrees with the closed forms") {
  // from_radial on a family-stripped symbol falls back to the oscillation
  // block integral; the closed forms above are the oracles.
  SymbolTransform p =
      from_radial(as_custom(radial::power_symbol(2.0)), 3);
  CHECK(p.provenance == Provenance::hankel_numeric);
  CHECK(rel(p.profile(1.0), 1.2533141373155003) < 1e-8);
  CHECK(rel(p.profile(1.7), 0.73724361018558838) < 1e-8);

  SymbolTransform g =
      from_radial(as_custom(radial::gauss_symbol(1.0)), 2);
  CHECK(rel(g.profile(1.3), 0.42955735821073915) < 1e-9);

  SymbolTransform ind =
      from_radial(as_custom(radial::indicator_symbol(1.0)), 2);
  CHECK(rel(ind.profile(2.0), 0.28836240387843669) < 1e-9);
  CHECK(rel(ind.profile(0.0), 0.5) < 1e-12);
}

TEST_CASE("circle eigenvalues") {
  SymbolTransform one = constant_transform(2, 1.0);
  Eigen::VectorXd lam = circle_eigs(one, 8);
  CHECK(rel(lam[0], kPi) < 1e-14);
  for (int n = 1; n <= 8; ++n) CHECK(std::abs(lam[n]) < 1e-12);

  SymbolTransform zero = constant_transform(2, 0.0);
  Eigen::VectorXd z = circle_eigs(zero, 4);
  CHECK(z.cwiseAbs().maxCoeff() == 0.0);

  // e^{-r}: circle route against the radial quadrature route.
  radial::RadialSymbol es = radial::exp_symbol(1.0);
  Eigen::VectorXd le = circle_eigs(from_radial(es, 2), 16);
  radial::SpectralSequence seq = radial::gamma_sequence(es, 2, 16);
  for (int n = 0; n <= 16; ++n) CHECK(rel(le[n], seq.gammas[n]) < 1e-6);

  // chirp: circle route against the finite-integral closed form.
  Eigen::VectorXd lc = circle_eigs(from_radial(radial::chirp_symbol(), 2), 10);
  for (int n = 0; n <= 10; ++n) {
    double want = radial::chirp_gamma(2, n);
    CHECK(std::abs(lc[n] - want) < 1e-10 * (1.0 + std::abs(want)));
  }

  // singular profile: the dyadic panels plus the exponent completion must
  // reproduce the Gamma-quotient values.
  for (double mu : {1.5, 1.9}) {
    Eigen::VectorXd lp =
        circle_eigs(from_radial(radial::power_symbol(mu), 2), 6);
    for (int n = 0; n <= 6; ++n)
      CHECK(rel(lp[n], radial::power_gamma(2, mu, n)) < 1e-10);
  }

  CHECK_THROWS_AS(circle_eigs(constant_transform(3, 1.0), 4),
                  std::invalid_argument);
}

TEST_CASE("nodal matrix basics") {
  quad::SphereGrid grid = quad::sphere_grid(2, 32);
  OperatorMatrix z = build_nodal(constant_transform(2, 0.0), grid);
  CHECK(z.entries.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.hermitian);
  CHECK(z.grid_size == 32);

  OperatorMatrix m = build_nodal(from_radial(radial::exp_symbol(1.0), 2), grid);
  CHECK((m.entries - m.entries.adjoint()).norm() == 0.0);
  // regular profile: diagonal is the contact value times the cell weight
  double pref = kPi / (2.0 * kPi);
  double w = 2.0 * kPi / 32.0;
  CHECK(rel(m.entries(0, 0).real(), pref * 1.0 * w) < 1e-14);

  CHECK_THROWS_AS(build_nodal(constant_transform(3, 1.0), grid),
                  std::invalid_argument);
}

TEST_CASE("kernel arguments stay within chord reach") {
  double maxrho = 0.0;
  std::mutex mu;
  SymbolTransform rec;
  rec.d = 3;
  rec.profile = [&](double rho) {
    std::lock_guard<std::mutex> lock(mu);
    maxrho = std::max(maxrho, rho);
    return std::exp(-rho);
  };
  quad::SphereGrid grid = quad::sphere_grid(3, 8);
  build_nodal(rec, grid);
  circle_eigs([&] {
    SymbolTransform r2 = rec;
    r2.d = 2;
    return r2;
  }(), 8);
  CHECK(maxrho <= 2.0 + 1e-9);
  CHECK(maxrho > 1.9);  // antipodal pairs actually probed
}

TEST_CASE("nodal spectrum matches the circle route") {
  // e^{-r} on a 256-point circle: Nystrom eigenvalues against the Fourier
  // eigenvalues, each kept with its multiplicity (2 per degree above 0).
  SymbolTransform t = from_radial(radial::exp_symbol(1.0), 2);
  quad::SphereGrid grid = quad::sphere_grid(2, 256);
  OperatorMatrix m = build_nodal(t, grid);
  EigenResult eig = eigen_hermitian(m);
  CHECK(eig.converged);

  Eigen::VectorXd lam = circle_eigs(t, 40);
  std::vector<double> expected;
  expected.push_back(lam[0]);
  for (int n = 1; n <= 40; ++n) {
    expected.push_back(lam[n]);
    expected.push_back(lam[n]);
  }
  std::sort(expected.begin(), expected.end(),
            [](double a, double b) { return std::abs(a) > std::abs(b); });
  for (int i = 0; i < 20; ++i)
    CHECK(rel(eig.eigenvalues[i], expected[i]) < 1e-6);

  // spectral norm of this operator is its largest Fourier eigenvalue
  CHECK(rel(operator_norm(m), lam[0]) < 1e-5);
}

TEST_CASE("nodal diagonal policy for a singular kernel") {
  // r^{-3/2} in d = 2: the transform blows up at contact and the diagonal
  // takes the cell mean.  The Nystrom spectrum then lands near the Fourier
  // eigenvalues despite the singularity; without averaging it is garbage.
  SymbolTransform t = from_radial(radial::power_symbol(1.5), 2);
  quad::SphereGrid grid = quad::sphere_grid(2, 256);
  OperatorMatrix m = build_nodal(t, grid);
  EigenResult eig = eigen_hermitian(m);
  Eigen::VectorXd lam = circle_eigs(t, 8);
  // kernel smoothness is only C^0 here, so the match is coarse
  for (int i = 0; i < 3; ++i) {
    double want = i == 0 ? lam[0] : lam[(i + 1) / 2];
    CHECK(rel(eig.eigenvalues[i], want) < 1e-2);
  }
}

TEST_CASE("harmonic degrees enumeration") {
  Eigen::VectorXi d2 = harmonic_degrees(2, 3);
  std::vector<int> want2 = {0, 1, 1, 2, 2, 3, 3};
  REQUIRE(d2.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(d2[i] == want2[i]);
  Eigen::VectorXi d3 = harmonic_degrees(3, 2);
  std::vector<int> want3 = {0, 1, 1, 1, 2, 2, 2, 2, 2};
  REQUIRE(d3.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(d3[i] == want3[i]);
}

TEST_CASE("harmonic matrix is diagonal for radial symbols") {
  // d = 2, e^{-r}: diagonal equals the radial eigenvalues degree by degree,
  // off-diagonal mass is quadrature noise.
  radial::RadialSymbol es = radial::exp_symbol(1.0);
  quad::SphereGrid g2 = quad::sphere_grid(2, 64);
  OperatorMatrix h2 = build_harmonic(from_radial(es, 2), 2, 8, g2);
  CHECK(h2.basis == Basis::harmonic);
  CHECK(h2.nmax == 8);
  radial::SpectralSequence s2 = radial::gamma_sequence(es, 2, 8);
  Eigen::VectorXi deg2 = harmonic_degrees(2, 8);
  double gmax2 = s2.gammas.cwiseAbs().maxCoeff();
  for (int i = 0; i < deg2.size(); ++i) {
    CHECK(rel(h2.entries(i, i).real(), s2.gammas[deg2[i]]) < 1e-6);
    for (int j = 0; j < deg2.size(); ++j)
      if (i != j) CHECK(std::abs(h2.entries(i, j)) < 1e-8 * gmax2);
  }

  // d = 3, Gaussian
  radial::RadialSymbol gs = radial::gauss_symbol(1.0);
  quad::SphereGrid g3 = quad::sphere_grid(3, 32);
  OperatorMatrix h3 = build_harmonic(from_radial(gs, 3), 3, 8, g3);
  radial::SpectralSequence s3 = radial::gamma_sequence(gs, 3, 8);
  Eigen::VectorXi deg3 = harmonic_degrees(3, 8);
  double gmax3 = s3.gammas.cwiseAbs().maxCoeff();
  double offmax = 0.0;
  for (int i = 0; i < deg3.size(); ++i) {
    CHECK(rel(h3.entries(i, i).real(), s3.gammas[deg3[i]]) < 1e-6);
    for (int j = 0; j < deg3.size(); ++j)
      if (i != j) offmax = std::max(offmax, std::abs(h3.entries(i, j)));
  }
  CHECK(offmax < 1e-8 * gmax3);
}

TEST_CASE("harmonic matrix for a constant profile") {
  // ahat == c pairs only the means: entry(0,0) = c pref |S^1| = 0.7 pi, the
  // rest vanish by orthogonality to constants.
  quad::SphereGrid grid = quad::sphere_grid(2, 32);
  OperatorMatrix h = build_harmonic(constant_transform(2, 0.7), 2, 4, grid);
  CHECK(rel(h.entries(0, 0).real(), 0.7 * kPi) < 1e-12);
  for (int i = 0; i < h.entries.rows(); ++i)
    for (int j = 0; j < h.entries.cols(); ++j)
      if (i != 0 || j != 0) CHECK(std::abs(h.entries(i, j)) < 1e-12);

  OperatorMatrix hz = build_harmonic(constant_transform(2, 0.0), 2, 4, grid);
  CHECK(hz.entries.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(build_harmonic(constant_transform(2, 1.0), 2, 8,
                                 quad::sphere_grid(2, 16)),
                  std::invalid_argument);
}

TEST_CASE("harmonic equals conjugated nodal") {
  // Same grid, same kernel: the harmonic matrix is the basis change of the
  // nodal one.  Catches block-streaming mistakes.
  SymbolTransform t = from_radial(radial::gauss_symbol(1.0), 2);
  quad::SphereGrid grid = quad::sphere_grid(2, 32);
  OperatorMatrix nod = build_nodal(t, grid);
  OperatorMatrix har = build_harmonic(t, 2, 4, grid);
  Eigen::VectorXi deg = harmonic_degrees(2, 4);
  Eigen::MatrixXd b(deg.size(), grid.points.size());
  int i = 0;
  for (int n = 0; n <= 4; ++n)
    for (int j = 1; j <= specfun::multiplicity(2, n); ++j) {
      for (int k = 0; k < static_cast<int>(grid.points.size()); ++k)
        b(i, k) = specfun::sph_harmonic({2, n, j}, grid.points[k]) *
                  std::sqrt(grid.weights[k]);
      ++i;
    }
  Eigen::MatrixXcd via = b.cast<std::complex<double>>() * nod.entries *
                         b.transpose().cast<std::complex<double>>();
  CHECK((via - har.entries).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("jacobi eigensolver") {
  Eigen::MatrixXcd flip(2, 2);
  flip << 0, 1, 1, 0;
  EigenResult r = eigen_hermitian(wrap(flip));
  CHECK(r.converged);
  CHECK(r.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(r.eigenvalues[1] == doctest::Approx(-1.0));

  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(3, 3);
  diag(0, 0) = 1.0;
  diag(1, 1) = -3.0;
  diag(2, 2) = 2.0;
  EigenResult rd = eigen_hermitian(wrap(diag));
  CHECK(rd.eigenvalues[0] == -3.0);
  CHECK(rd.eigenvalues[1] == 2.0);
  CHECK(rd.eigenvalues[2] == 1.0);

  // random Hermitian 50x50 against Eigen's solver
  std::srand(12345);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(50, 50);
  a = 0.5 * (a + a.adjoint()).eval();
  EigenResult rj = eigen_hermitian(wrap(a), true);
  CHECK(rj.converged);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(a);
  std::vector<double> mine(rj.eigenvalues.data(),
                           rj.eigenvalues.data() + 50);
  std::vector<double> ref(oracle.eigenvalues().data(),
                          oracle.eigenvalues().data() + 50);
  std::sort(mine.begin(), mine.end());
  std::sort(ref.begin(), ref.end());
  for (int i = 0; i < 50; ++i) CHECK(std::abs(mine[i] - ref[i]) < 1e-12);
  CHECK(std::abs(rj.eigenvalues.sum() - a.trace().real()) < 1e-10);
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXcd v = rj.vectors.col(i);
    CHECK((a * v - rj.eigenvalues[i] * v).norm() < 1e-10 * a.norm());
    CHECK(v.norm() == doctest::Approx(1.0));
  }
  // sorted by magnitude
  for (int i = 0; i + 1 < 50; ++i)
    CHECK(std::abs(rj.eigenvalues[i]) >=
          std::abs(rj.eigenvalues[i + 1]) - 1e-15);

  OperatorMatrix bad = wrap(a);
  bad.hermitian = false;
  CHECK_THROWS_AS(eigen_hermitian(bad), std::invalid_argument);
  Eigen::MatrixXcd skew(2, 2);
  skew << 0, 1, -1, 0;
  CHECK_THROWS_AS(eigen_hermitian(wrap(skew)), std::invalid_argument);

  EigenResult rz = eigen_hermitian(wrap(Eigen::MatrixXcd::Zero(4, 4)));
  CHECK(rz.converged);
  CHECK(rz.eigenvalues.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(wrap(Eigen::MatrixXcd::Identity(5, 5))) ==
        doctest::Approx(1.0));
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
  d(0, 0) = 0.3;
  d(1, 1) = -1.7;
  d(2, 2) = 0.9;
  d(3, 3) = 1.1;
  CHECK(operator_norm(wrap(d)) == doctest::Approx(1.7));
}

TEST_CASE("matrix and spectrum csv") {
  Eigen::MatrixXcd m(2, 2);
  m << std::complex<double>(1.5, 0.0), std::complex<double>(0.0, -2.0),
      std::complex<double>(0.0, 2.0), std::complex<double>(3.0, 0.0);
  OperatorMatrix om = wrap(m);
  CHECK(matrix_csv(om) ==
        "row,col,re,im\n"
        "0,0,1.5,0\n0,1,0,-2\n1,0,0,2\n1,1,3,0\n");
  Eigen::VectorXd e(2);
  e << 2.5, -0.5;
  CHECK(spectrum_csv(e) == "index,eigenvalue\n0,2.5\n1,-0.5\n");
}
