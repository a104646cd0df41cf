// Experiment runner: each subcommand drives one module pipeline and writes
// two artifacts, the data file (CSV or JSON) and a manifest JSON recording
// the resolved config, the tool version, the tolerances in force, and the
// module operation behind every emitted column.  Identical configs produce
// byte-identical artifacts; errors leave an error JSON on stdout and a
// nonzero exit instead of a torn file.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "htz/hconv.hpp"
#include "htz/hspace.hpp"
#include "htz/io.hpp"
#include "htz/quad.hpp"
#include "htz/radial.hpp"
#include "htz/specfun.hpp"
#include "htz/sphereop.hpp"
#include "htz/symlab.hpp"

using Json = nlohmann::ordered_json;
using namespace htz;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kManifestSchema = "herglotz/manifest/1";

// Module-level flags (non-convergence, divergence) are its own exit code so
// scripts can tell a failed computation from a bad invocation.
constexpr int kExitConfig = 2;
constexpr int kExitFlag = 3;

struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  int d = 2;
  std::string symbol;
  std::string symbol2;
  int nmax = -1;
  int grid = -1;
  double R = -1.0;
  double R0 = 3.0;
  double tolerance = -1.0;  // negative: module default
  int density = -1;
  double tmax = 20.0;
  int steps = 81;
  std::string out;
  std::string format = "csv";
};

// ---- symbol DSL -----------------------------------------------------------
// Flat key=value spellings: "power:mu=2", "gauss:s=1", "indicator:rho=1",
// "exp:s=1", "chirp"; sphere multipliers "sphere:cos", "sphere:upper",
// "sphere:offset_sine", "sphere:const=2".  Unknown families and unknown or
// duplicate keys are rejected.

std::map<std::string, double> parse_kv(const std::string& rest,
                                       const std::vector<std::string>& allowed) {
  std::map<std::string, double> kv;
  size_t pos = 0;
  while (pos < rest.size()) {
    size_t comma = rest.find(',', pos);
    std::string item = rest.substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos);
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("symbol: expected key=value, got '" + item +
                                  "'");
    std::string key = item.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument("symbol: unknown key '" + key + "'");
    if (kv.count(key))
      throw std::invalid_argument("symbol: duplicate key '" + key + "'");
    size_t used = 0;
    double val = 0.0;
    try {
      val = std::stod(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("symbol: bad number in '" + item + "'");
    }
    if (used != item.size() - eq - 1)
      throw std::invalid_argument("symbol: bad number in '" + item + "'");
    kv[key] = val;
    pos = comma == std::string::npos ? rest.size() : comma + 1;
  }
  return kv;
}

double require_key(const std::map<std::string, double>& kv,
                   const std::string& key, const std::string& family) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw std::invalid_argument("symbol: family '" + family +
                                "' needs key '" + key + "'");
  return it->second;
}

radial::RadialSymbol parse_radial(const std::string& spec) {
  size_t colon = spec.find(':');
  std::string family = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (family == "chirp") {
    if (!rest.empty())
      throw std::invalid_argument("symbol: 'chirp' takes no keys");
    return radial::chirp_symbol();
  }
  if (family == "power")
    return radial::power_symbol(require_key(parse_kv(rest, {"mu"}), "mu", family));
  if (family == "gauss")
    return radial::gauss_symbol(require_key(parse_kv(rest, {"s"}), "s", family));
  if (family == "indicator")
    return radial::indicator_symbol(
        require_key(parse_kv(rest, {"rho"}), "rho", family));
  if (family == "exp")
    return radial::exp_symbol(require_key(parse_kv(rest, {"s"}), "s", family));
  throw std::invalid_argument("symbol: unknown family '" + family + "'");
}

hconv::SphereSymbol parse_sphere(const std::string& spec, int d) {
  size_t colon = spec.find(':');
  if (spec.substr(0, colon) != "sphere")
    throw std::invalid_argument("symbol: expected a 'sphere:*' multiplier");
  if (colon == std::string::npos)
    throw std::invalid_argument("symbol: 'sphere' needs a variant");
  std::string rest = spec.substr(colon + 1);
  if (rest == "cos") return hconv::cosine_symbol(d);
  if (rest == "upper") return hconv::upper_indicator(d);
  if (rest == "offset_sine") return hconv::offset_sine(d);
  if (rest.rfind("const=", 0) == 0)
    return hconv::constant_symbol(
        require_key(parse_kv(rest, {"const"}), "const", "sphere"));
  throw std::invalid_argument("symbol: unknown sphere variant '" + rest + "'");
}

// ---- artifact plumbing ------------------------------------------------------

std::string basename_of(const std::string& path) {
  size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // cells pre-formatted

  void row(std::initializer_list<std::string> cells) { rows.emplace_back(cells); }

  std::string csv() const {
    std::string out = io::csv_line(columns);
    for (const auto& r : rows) out += io::csv_line(r);
    return out;
  }

  // Cells are round-trip decimal strings; JSON output re-types them so
  // numeric fields come out as JSON numbers.
  static Json cell_value(const std::string& s) {
    size_t used = 0;
    try {
      if (s.find_first_of(".eE") == std::string::npos) {
        long long i = std::stoll(s, &used);
        if (used == s.size()) return Json(i);
      }
      double v = std::stod(s, &used);
      // JSON has no inf literal; such values stay strings.
      if (used == s.size() && std::isfinite(v)) return Json(v);
    } catch (const std::exception&) {
    }
    return Json(s);
  }

  Json json(const std::string& schema) const {
    Json doc;
    doc["schema"] = schema;
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json obj;
      for (size_t i = 0; i < columns.size(); ++i)
        obj[columns[i]] = cell_value(r[i]);
      arr.push_back(obj);
    }
    doc["rows"] = arr;
    return doc;
  }
};

std::string fd(double v) { return io::format_double(v); }

// Data plus manifest, both written atomically; the manifest keys every
// column to the module call that produced it.
void emit(const RunConfig& cfg, const Table& table,
          const Json& config_echo, const Json& columns, const Json& tolerances) {
  std::string schema = "herglotz/" + cfg.command + "/1";
  std::string body = cfg.format == "json" ? table.json(schema).dump(2) + "\n"
                                          : table.csv();
  io::write_text_file(cfg.out, body);

  Json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["tool"] = {{"name", "herglotz"}, {"version", kVersion}};
  manifest["command"] = cfg.command;
  manifest["config"] = config_echo;
  manifest["artifact"] = {{"file", basename_of(cfg.out)},
                          {"format", cfg.format},
                          {"schema", schema}};
  manifest["columns"] = columns;
  manifest["tolerances"] = tolerances;
  io::write_text_file(cfg.out + ".manifest.json", manifest.dump(2) + "\n");
}

// ---- subcommands ------------------------------------------------------------

void run_gamma(const RunConfig& cfg) {
  radial::RadialSymbol a = parse_radial(cfg.symbol);
  int nmax = cfg.nmax < 0 ? 20 : cfg.nmax;
  quad::TailPolicy policy = radial::gamma_policy();
  if (cfg.tolerance > 0.0) policy.abs_tol = cfg.tolerance;
  radial::SpectralSequence seq = radial::gamma_sequence(a, cfg.d, nmax, policy);
  for (int n = 0; n <= seq.nmax(); ++n)
    if (!seq.converged[n])
      throw FlagError("gamma quadrature did not converge at n=" +
                      std::to_string(n));

  bool closed = a.family == radial::Family::power ||
                a.family == radial::Family::chirp;
  bool chirp = a.family == radial::Family::chirp;
  Table t;
  t.columns = {"n", "gamma", "error_bound"};
  if (closed) {
    t.columns.push_back("oracle");
    t.columns.push_back("rel_error");
  }
  // The classical table entry for the chirp disagrees with quadrature in its
  // phase constant; both spellings are emitted so the reader can compare.
  if (chirp) t.columns.push_back("oracle_table");
  for (int n = 0; n <= seq.nmax(); ++n) {
    std::vector<std::string> cells = {std::to_string(n), fd(seq.gammas[n]),
                                      fd(seq.error_bounds[n])};
    if (closed) {
      double oracle = a.family == radial::Family::power
                          ? radial::power_gamma(cfg.d, a.power_exponent, n)
                          : radial::chirp_gamma(cfg.d, n);
      cells.push_back(fd(oracle));
      cells.push_back(fd(std::abs(seq.gammas[n] - oracle) /
                         std::max(std::abs(oracle), 1e-300)));
    }
    if (chirp) cells.push_back(fd(radial::chirp_gamma_table(cfg.d, n)));
    t.rows.push_back(cells);
  }

  Json columns = {{"gamma", "radial::gamma_sequence"},
                  {"error_bound", "radial::gamma_sequence"}};
  if (closed)
    columns["oracle"] = a.family == radial::Family::power
                            ? "radial::power_gamma"
                            : "radial::chirp_gamma";
  if (chirp) columns["oracle_table"] = "radial::chirp_gamma_table";
  emit(cfg, t,
       {{"d", cfg.d}, {"symbol", a.name}, {"nmax", nmax}, {"format", cfg.format}},
       columns, {{"quadrature_abs_tol", policy.abs_tol}});
}

// Signed eigenvalues with degree multiplicity, descending by magnitude; ties
// broken by value so the order is total.
std::vector<double> with_multiplicity(const Eigen::VectorXd& per_degree, int d) {
  std::vector<double> out;
  for (int n = 0; n < per_degree.size(); ++n)
    for (int j = 0; j < specfun::multiplicity(d, n); ++j)
      out.push_back(per_degree[n]);
  std::sort(out.begin(), out.end(), [](double x, double y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
    return x > y;
  });
  return out;
}

void run_spectrum(const RunConfig& cfg) {
  radial::RadialSymbol a = parse_radial(cfg.symbol);
  int nmax = cfg.nmax < 0 ? 32 : cfg.nmax;
  int res = cfg.grid < 0 ? 256 : cfg.grid;
  quad::TailPolicy policy = radial::gamma_policy();
  if (cfg.tolerance > 0.0) policy.abs_tol = cfg.tolerance;

  radial::SpectralSequence seq = radial::gamma_sequence(a, cfg.d, nmax, policy);
  std::vector<double> diag = with_multiplicity(seq.gammas, cfg.d);

  sphereop::SymbolTransform T = sphereop::from_radial(a, cfg.d);
  quad::SphereGrid grid = quad::sphere_grid(cfg.d, res);
  sphereop::OperatorMatrix M = sphereop::build_nodal(T, grid);
  sphereop::EigenResult eig = sphereop::eigen_hermitian(M);
  if (!eig.converged) throw FlagError("nodal eigensolve did not converge");

  std::vector<double> circle;
  if (cfg.d == 2)
    circle = with_multiplicity(sphereop::circle_eigs(T, nmax), 2);

  size_t count = std::min(diag.size(), static_cast<size_t>(eig.eigenvalues.size()));
  Table t;
  t.columns = {"k", "lambda_diag", "lambda_nodal"};
  if (cfg.d == 2) t.columns.push_back("lambda_circle");
  t.columns.push_back("rel_gap");
  for (size_t k = 0; k < count; ++k) {
    std::vector<std::string> cells = {std::to_string(k), fd(diag[k]),
                                      fd(eig.eigenvalues[k])};
    if (cfg.d == 2) cells.push_back(fd(circle[k]));
    cells.push_back(fd(std::abs(diag[k] - eig.eigenvalues[k]) /
                       std::max(std::abs(diag[k]), 1e-300)));
    t.rows.push_back(cells);
  }

  Json columns = {{"lambda_diag", "radial::gamma_sequence"},
                  {"lambda_nodal", "sphereop::build_nodal + eigen_hermitian"}};
  if (cfg.d == 2) columns["lambda_circle"] = "sphereop::circle_eigs";
  emit(cfg, t,
       {{"d", cfg.d},
        {"symbol", a.name},
        {"nmax", nmax},
        {"grid", res},
        {"format", cfg.format}},
       columns, {{"quadrature_abs_tol", policy.abs_tol}});
}

void run_kernel(const RunConfig& cfg) {
  int nmax = cfg.nmax < 0 ? 40 : cfg.nmax;
  if (cfg.steps < 2) throw std::invalid_argument("kernel: steps must be >= 2");
  Table t;
  t.columns = {"t", "kappa", "series", "abs_err"};
  for (int i = 0; i < cfg.steps; ++i) {
    double tt = cfg.tmax * i / (cfg.steps - 1);
    double kappa = hspace::repro_kernel(cfg.d, tt);
    double series = hspace::kernel_series(cfg.d, Eigen::Vector3d(tt, 0, 0),
                                          Eigen::Vector3d::Zero(), nmax);
    t.row({fd(tt), fd(kappa), fd(series), fd(std::abs(kappa - series))});
  }
  emit(cfg, t,
       {{"d", cfg.d},
        {"tmax", cfg.tmax},
        {"steps", cfg.steps},
        {"nmax", nmax},
        {"format", cfg.format}},
       {{"kappa", "hspace::repro_kernel"}, {"series", "hspace::kernel_series"}},
       Json::object());
}

void run_degenerate(const RunConfig& cfg) {
  radial::RadialSymbol a = parse_radial(cfg.symbol);
  int cap = cfg.nmax < 0 ? 4 : cfg.nmax;
  double R = cfg.R < 0.0 ? 40.0 : cfg.R;
  int density = cfg.density < 0 ? 12 : cfg.density;

  symlab::CutoffWindow w(cfg.R0);
  radial::RadialSymbol astar = symlab::degenerate_part(a, w, cfg.d);

  // L1 mass of the symbol over the whole space, for the report's scale.
  constexpr double kPi = 3.14159265358979323846;
  double area = cfg.d == 2 ? 2.0 * kPi : 4.0 * kPi;
  quad::TailPolicy pol;
  pol.abs_tol = 1e-10;
  quad::IntegralResult l1 = quad::integrate_semiaxis(
      [&](double r) {
        return std::abs(a.eval(r)) * (cfg.d == 2 ? r : r * r);
      },
      pol);
  if (!l1.converged) throw FlagError("symbol L1 norm did not converge");
  double l1_norm = area * l1.value;

  std::vector<hspace::SphereFunction> fields;
  std::vector<std::pair<int, int>> labels;
  for (int n = 0; n <= cap; ++n)
    for (int j = 1; j <= specfun::multiplicity(cfg.d, n); ++j) {
      hspace::SphereFunction f;
      f.d = cfg.d;
      f.set(n, j, 1.0);
      fields.push_back(f);
      labels.emplace_back(n, j);
    }

  auto spatial = [](const radial::RadialSymbol& sym) {
    return [&sym](const Eigen::Vector3d& x) { return sym.eval(x.norm()); };
  };
  Eigen::MatrixXcd Fstar = symlab::form_matrix(spatial(astar), fields, R, density);
  Eigen::MatrixXcd Ffull = symlab::form_matrix(spatial(a), fields, R, density);

  Table t;
  t.columns = {"n", "j", "m", "l", "form_degenerate_abs", "form_full_abs",
               "l1_norm"};
  for (size_t i = 0; i < fields.size(); ++i)
    for (size_t k = 0; k < fields.size(); ++k)
      t.row({std::to_string(labels[i].first), std::to_string(labels[i].second),
             std::to_string(labels[k].first), std::to_string(labels[k].second),
             fd(std::abs(Fstar(i, k))), fd(std::abs(Ffull(i, k))), fd(l1_norm)});

  emit(cfg, t,
       {{"d", cfg.d},
        {"symbol", a.name},
        {"R0", cfg.R0},
        {"R", R},
        {"density", density},
        {"nmax", cap},
        {"format", cfg.format}},
       {{"form_degenerate_abs", "symlab::degenerate_part + form_matrix"},
        {"form_full_abs", "symlab::form_matrix"},
        {"l1_norm", "quad::integrate_semiaxis"}},
       {{"l1_abs_tol", 1e-10}});
}

void run_bounds(const RunConfig& cfg) {
  radial::RadialSymbol a = parse_radial(cfg.symbol);
  int density = cfg.density < 0 ? 48 : cfg.density;

  sphereop::SymbolTransform T = sphereop::from_radial(a, cfg.d);
  symlab::BoundednessReport b = symlab::boundedness_constant(T);
  if (b.divergent)
    throw FlagError("boundedness constant diverges for " + a.name);

  // Envelope exponent: the power family names its own tail, anything else
  // only needs some decay, so -1 is the default gauge.
  double lambda = a.decay == radial::Decay::power ? -a.power_exponent : -1.0;
  symlab::HdReport hd = symlab::hd_check(a, lambda);

  symlab::GaugeReport gauge = symlab::argf_check(a, cfg.d, density);
  if (gauge.inconclusive)
    throw FlagError("gauge admissibility ladder did not settle for " + a.name);

  Table t;
  t.columns = {"quantity", "value"};
  t.row({"boundedness_constant", fd(b.constant)});
  t.row({"operator_bound", fd(b.operator_bound)});
  t.row({"hd_lambda", fd(lambda)});
  t.row({"hd_bounded", hd.bounded ? "1" : "0"});
  t.row({"hd_envelope", fd(hd.envelope)});
  t.row({"argf_integral", fd(gauge.integral)});
  t.row({"argf_admissible", gauge.admissible ? "1" : "0"});

  emit(cfg, t,
       {{"d", cfg.d},
        {"symbol", a.name},
        {"density", density},
        {"format", cfg.format}},
       {{"boundedness_constant", "symlab::boundedness_constant"},
        {"operator_bound", "symlab::boundedness_constant"},
        {"hd_bounded", "symlab::hd_check"},
        {"hd_envelope", "symlab::hd_check"},
        {"argf_integral", "symlab::argf_check"},
        {"argf_admissible", "symlab::argf_check"}},
       Json::object());
}

void run_hconv(const RunConfig& cfg) {
  int nmax = cfg.nmax < 0 ? (cfg.d == 2 ? 32 : 8) : cfg.nmax;
  int res = cfg.grid < 0 ? 4 * nmax : cfg.grid;
  double R = cfg.R < 0.0 ? (cfg.d == 2 ? 400.0 : 300.0) : cfg.R;

  std::string spec_a = cfg.symbol.empty() ? "sphere:cos" : cfg.symbol;
  std::string spec_b = cfg.symbol2.empty() ? "sphere:offset_sine" : cfg.symbol2;
  hconv::SphereSymbol a = parse_sphere(spec_a, cfg.d);
  hconv::SphereSymbol b = parse_sphere(spec_b, cfg.d);

  quad::SphereGrid grid = quad::sphere_grid(cfg.d, res);
  hconv::AlgebraReport rep = hconv::algebra_checks(a, b, cfg.d, nmax, grid);

  hspace::SphereFunction e01;
  e01.d = cfg.d;
  e01.set(0, 1, 1.0);
  std::vector<double> radii = {R / 4.0, R / 2.0, R};
  hconv::FactorizationReport fr = hconv::verify_factorization(e01, e01, radii);

  Table t;
  t.columns = {"quantity", "value"};
  t.row({"sup_symbol", fd(rep.sup_symbol)});
  t.row({"nodal_commutator", fd(rep.nodal_commutator)});
  t.row({"nodal_product_defect", fd(rep.nodal_product_defect)});
  for (size_t i = 0; i < rep.degree_ladder.size(); ++i) {
    std::string cap = std::to_string(rep.degree_ladder[i]);
    t.row({"norm_N" + cap, fd(rep.norm_ladder[i])});
    t.row({"comm_hs_N" + cap, fd(rep.commutator_norms[i])});
    t.row({"comm_spec_N" + cap, fd(rep.commutator_spectral[i])});
  }
  t.row({"spectrum_distance", fd(rep.spectrum_distance)});
  for (size_t i = 0; i < radii.size(); ++i)
    t.row({"fact_residual_R" + fd(radii[i]), fd(fr.residuals[i])});
  t.row({"fact_final_ratio", fd(fr.final_ratio)});

  emit(cfg, t,
       {{"d", cfg.d},
        {"symbol", a.name},
        {"symbol2", b.name},
        {"nmax", nmax},
        {"grid", res},
        {"R", R},
        {"format", cfg.format}},
       {{"nodal_commutator", "hconv::algebra_checks"},
        {"norm_N*", "hconv::algebra_checks"},
        {"comm_hs_N*", "hconv::algebra_checks"},
        {"comm_spec_N*", "hconv::algebra_checks"},
        {"spectrum_distance", "hconv::algebra_checks"},
        {"fact_residual_R*", "hconv::verify_factorization"}},
       Json::object());
}

// Unit-norm probe field shared by the averaging commands: three modes with
// squared weights 0.64 + 0.25 + 0.11 = 1.
hspace::SphereFunction probe_field(int d) {
  hspace::SphereFunction phi;
  phi.d = d;
  phi.set(0, 1, 0.8);
  phi.set(1, 1, 0.5);
  phi.set(3, 2, std::sqrt(0.11));
  return phi;
}

void run_isometry(const RunConfig& cfg) {
  double R = cfg.R < 0.0 ? 500.0 : cfg.R;
  int res = cfg.grid < 0 ? (cfg.d == 2 ? 64 : 32) : cfg.grid;
  hspace::SphereFunction phi = probe_field(cfg.d);

  Table t;
  t.columns = {"R", "average", "deviation"};
  for (double r : {R, 2.0 * R}) {
    double avg = hspace::bstar_average(phi, r, res);
    t.row({fd(r), fd(avg), fd(std::abs(avg - 1.0))});
  }

  emit(cfg, t,
       {{"d", cfg.d},
        {"R", R},
        {"grid", res},
        {"field", "0.8 e(0,1) + 0.5 e(1,1) + sqrt(0.11) e(3,2)"},
        {"format", cfg.format}},
       {{"average", "hspace::bstar_average"}}, Json::object());
}

void run_farfield(const RunConfig& cfg) {
  double R = cfg.R < 0.0 ? 100.0 : cfg.R;
  int res = cfg.grid < 0 ? 32 : cfg.grid;
  int nmax = cfg.nmax < 0 ? 2 : cfg.nmax;
  quad::SphereGrid grid = quad::sphere_grid(cfg.d, res);

  Table t;
  t.columns = {"n", "j", "R", "residual"};
  for (int n = 0; n <= nmax; ++n) {
    hspace::SphereFunction phi;
    phi.d = cfg.d;
    phi.set(n, 1, 1.0);
    for (double r : {R, 2.0 * R})
      t.row({std::to_string(n), "1", fd(r),
             fd(hspace::far_field_residual(phi, r, grid))});
  }

  emit(cfg, t,
       {{"d", cfg.d},
        {"R", R},
        {"grid", res},
        {"nmax", nmax},
        {"format", cfg.format}},
       {{"residual", "hspace::far_field_residual"}}, Json::object());
}

int fail_json(const std::string& command, const std::string& message, int code) {
  Json err;
  err["schema"] = "herglotz/error/1";
  err["command"] = command;
  err["error"] = message;
  std::fputs((err.dump(2) + "\n").c_str(), stdout);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz operators on Helmholtz fields: experiment runner"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub, bool needs_symbol) {
    sub->add_option("--d", cfg.d, "ambient dimension")->check(CLI::IsMember({2, 3}));
    if (needs_symbol) sub->add_option("--symbol", cfg.symbol, "symbol DSL spec");
    sub->add_option("--out", cfg.out, "output file path")->required();
    sub->add_option("--format", cfg.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    return sub;
  };

  CLI::App* gamma = add_common(
      app.add_subcommand("gamma", "spectral coefficients with oracle column"),
      true);
  gamma->add_option("--nmax", cfg.nmax, "top degree");
  gamma->add_option("--tolerance", cfg.tolerance, "quadrature target");

  CLI::App* spectrum = add_common(
      app.add_subcommand("spectrum", "diagonal vs nodal eigenvalues"), true);
  spectrum->add_option("--nmax", cfg.nmax, "top degree for the diagonal path");
  spectrum->add_option("--grid", cfg.grid, "nodal grid resolution");
  spectrum->add_option("--tolerance", cfg.tolerance, "quadrature target");

  CLI::App* kernel = add_common(
      app.add_subcommand("kernel", "reproducing kernel closed form vs series"),
      false);
  kernel->add_option("--tmax", cfg.tmax, "table endpoint");
  kernel->add_option("--steps", cfg.steps, "table rows");
  kernel->add_option("--nmax", cfg.nmax, "series cap");

  CLI::App* degenerate = add_common(
      app.add_subcommand("degenerate", "form residuals after the cutoff split"),
      true);
  degenerate->add_option("--R0", cfg.R0, "window outer radius");
  degenerate->add_option("--R", cfg.R, "form ball radius");
  degenerate->add_option("--density", cfg.density, "form grid density");
  degenerate->add_option("--nmax", cfg.nmax, "field degree cap");

  CLI::App* bounds = add_common(
      app.add_subcommand("bounds", "norm bound, decay and gauge checks"), true);
  bounds->add_option("--density", cfg.density, "gauge ladder density");

  CLI::App* hconv_cmd = add_common(
      app.add_subcommand("hconv", "multiplier algebra and factorization"), true);
  hconv_cmd->add_option("--symbol2", cfg.symbol2, "second multiplier");
  hconv_cmd->add_option("--nmax", cfg.nmax, "degree ladder top");
  hconv_cmd->add_option("--grid", cfg.grid, "sphere grid resolution");
  hconv_cmd->add_option("--R", cfg.R, "largest factorization radius");

  CLI::App* isometry = add_common(
      app.add_subcommand("isometry", "ball-average norm recovery"), false);
  isometry->add_option("--R", cfg.R, "first averaging radius");
  isometry->add_option("--grid", cfg.grid, "sphere grid resolution");

  CLI::App* farfield = add_common(
      app.add_subcommand("farfield", "two-ray surrogate residual ladder"),
      false);
  farfield->add_option("--R", cfg.R, "first shell radius");
  farfield->add_option("--grid", cfg.grid, "sphere grid resolution");
  farfield->add_option("--nmax", cfg.nmax, "field degree cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // Flag-level mistakes follow the same contract as DSL mistakes:
    // error object on stdout, exit 2, nothing written to --out.
    std::string where = app.get_subcommands().empty()
                            ? "cli"
                            : app.get_subcommands().front()->get_name();
    return fail_json(where, e.what(), kExitConfig);
  }

  CLI::App* picked = app.get_subcommands().front();
  cfg.command = picked->get_name();

  try {
    if (picked == gamma) run_gamma(cfg);
    else if (picked == spectrum) run_spectrum(cfg);
    else if (picked == kernel) run_kernel(cfg);
    else if (picked == degenerate) run_degenerate(cfg);
    else if (picked == bounds) run_bounds(cfg);
    else if (picked == hconv_cmd) run_hconv(cfg);
    else if (picked == isometry) run_isometry(cfg);
    else if (picked == farfield) run_farfield(cfg);
  } catch (const FlagError& e) {
    return fail_json(cfg.command, e.what(), kExitFlag);
  } catch (const std::invalid_argument& e) {
    return fail_json(cfg.command, e.what(), kExitConfig);
  } catch (const std::exception& e) {
    return fail_json(cfg.command, e.what(), kExitFlag);
  }
  return 0;
}
