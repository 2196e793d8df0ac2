#include "maslov/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "maslov/dynamics.hpp"
#include "maslov/inner_product.hpp"
#include "maslov/oracle.hpp"
#include "maslov/sampling.hpp"
#include "maslov/stability.hpp"
#include "maslov/system_io.hpp"

namespace maslov {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kTraceVersion = 1;

ojson complex_json(cplx z) { return ojson::array({z.real(), z.imag()}); }

ojson real_matrix_json(const RMat& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

ojson complex_matrix_json(const CMat& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

ojson complex_vector_json(const CVec& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

ojson gaussian_json(const GaussianState& g) {
  return {{"A", complex_matrix_json(g.A)}, {"b", complex_vector_json(g.b)}, {"c", complex_json(g.c)}};
}

/// A value together with the method and tolerance that produced it.
ojson measured(ojson value, const std::string& method, double tol = 0.0) {
  ojson out = {{"value", std::move(value)}, {"method", method}};
  if (tol > 0.0) out["tolerance"] = tol;
  return out;
}

ojson echo(const SystemDefinition& sys) {
  ojson out = {{"n", sys.n},
               {"k", sys.k()},
               {"constraints", real_matrix_json(sys.constraints)},
               {"measure_scale", sys.measure_scale},
               {"gamma", real_matrix_json(sys.gamma)},
               {"epsilon", sys.epsilon}};
  if (sys.gauge) {
    out["gauge"] = real_matrix_json(*sys.gauge);
    out["gauge_measure_scale"] = sys.gauge_measure_scale;
  }
  if (sys.gaussian) out["gaussian"] = gaussian_json(*sys.gaussian);
  return out;
}

std::string dump(const ojson& j) { return j.dump() + "\n"; }

ojson header(const std::string& command, const std::string& path) {
  return {{"command", command}, {"file", path}};
}

/// Stops with a validation error listing every failed check.
void require_valid(const SystemDefinition& sys) {
  std::string failed;
  for (const CheckItem& item : check_system(sys))
    if (!item.ok) failed += (failed.empty() ? "" : "; ") + item.name + ": " + item.detail;
  if (!failed.empty()) fail_validation("invalid_system", failed);
}

GaussianState require_gaussian(const SystemDefinition& sys) {
  if (!sys.gaussian) fail_validation("missing_gaussian", "the system file has no \"gaussian\" entry");
  return make_gaussian(sys.gaussian->A, sys.gaussian->b, sys.gaussian->c);
}

CommandResult cmd_check(const std::string& path, const CommandOptions&) {
  const SystemDefinition sys = load_system(path);
  ojson report = header("check", path);
  report["system"] = echo(sys);
  ojson checks = ojson::array();
  bool ok = true;
  for (const CheckItem& item : check_system(sys)) {
    checks.push_back({{"name", item.name}, {"ok", item.ok}, {"detail", item.detail}});
    ok = ok && item.ok;
  }
  report["checks"] = checks;
  report["ok"] = ok;
  return {ok ? 0 : 1, dump(report)};
}

CommandResult cmd_norm(const std::string& path, const CommandOptions& opt) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  const GaussianState psi = require_gaussian(sys);
  const ConstraintPlane L = sys.plane();
  ojson report = header("norm", path);
  report["system"] = echo(sys);
  if (psi.b.norm() > 0.0) {
    // The germ formula covers centered states only.
    const cplx v = gaussian_inner_product(psi, psi, L);
    report["results"] = {
        {"norm_squared", measured(v.real(), "Gaussian integral over the constraint plane")},
        {"imag_residual", measured(std::abs(v.imag()), "imaginary part of <psi, psi>")}};
    return {0, dump(report)};
  }
  const NormReport rep = gaussian_norm_closed_form(psi, L, opt.tol);
  report["results"] = {
      {"norm_squared", measured(rep.closed_form, "closed form from the germ data", opt.tol)},
      {"inner_product", measured(rep.inner_product, "Gaussian integral over the constraint plane")},
      {"rel_diff", measured(rep.rel_diff, "|closed form - inner product| / inner product", opt.tol)},
      {"delta_c", measured(rep.delta_c, "det(2 Im A)^(-1/2)")},
      {"delta_p_minus", measured(rep.delta_p_minus, "Jacobian of the r_- projection")},
      {"two_pi_power_twice", rep.two_pi_power_twice}};
  return {0, dump(report)};
}

CommandResult cmd_equiv(const std::string& path, const CommandOptions& opt) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  if (opt.other.empty()) fail_validation("missing_argument", "equiv needs a second file with a Gaussian");
  const SystemDefinition other = load_system(opt.other);
  if (other.n != sys.n) fail_validation("dimension_mismatch", "the two files disagree on n");
  const GaussianState f = require_gaussian(sys);
  const GaussianState g = require_gaussian(other);
  const ConstraintPlane L = sys.plane();
  const auto eq = gaussian_equivalent(f, g, L, opt.tol);
  ojson report = header("equiv", path);
  report["other"] = opt.other;
  report["system"] = echo(sys);
  report["other_gaussian"] = gaussian_json(g);
  ojson results = {{"equivalent", measured(eq.has_value(), "H-germ comparison", opt.tol)}};
  if (eq) {
    results["c"] = measured(complex_json(eq->c), "ratio of constrained products");
    results["residual"] = measured(eq->residual, "|<f - c g, f - c g>|");
  }
  report["results"] = results;
  return {0, dump(report)};
}

CommandResult cmd_dirac(const std::string& path, const CommandOptions&) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  const GaussianState psi = require_gaussian(sys);
  const ConstraintPlane L = sys.plane();
  const GaugeSurface G = sys.gauge_surface();
  const DiracGaussian d = dirac_project(psi, L, G);
  const DiracNormReport nr = dirac_inner_product(d, L, G);
  ojson report = header("dirac", path);
  report["system"] = echo(sys);
  report["results"] = {
      {"regular", d.regular},
      {"support", real_matrix_json(d.support)},
      {"delta_directions", real_matrix_json(d.delta_directions)},
      {"A", measured(complex_matrix_json(d.A), "shift integral over the constraint plane")},
      {"b", measured(complex_vector_json(d.b), "shift integral over the constraint plane")},
      {"c", measured(complex_json(d.c), "shift integral over the constraint plane")},
      {"route_mismatch", measured(d.route_mismatch, "germ route against the direct integral")},
      {"dirac_norm", measured(nr.value, "gauge-fixed Gaussian integral with unit-covariance rho")},
      {"imag_residual", nr.imag_residual},
      {"rho_normalized", nr.rho_normalized}};
  return {0, dump(report)};
}

CommandResult cmd_evolve(const std::string& path, const CommandOptions& opt) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  const GaussianState psi = require_gaussian(sys);
  const ConstraintPlane L = sys.plane();
  const QuadraticHamiltonian H = sys.hamiltonian();
  if (opt.steps < 1) fail_validation("bad_steps", "--steps must be positive");
  const int n = sys.n;

  std::vector<std::string> columns{"t"};
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      columns.push_back("A_" + std::to_string(r) + "_" + std::to_string(c) + "_re");
      columns.push_back("A_" + std::to_string(r) + "_" + std::to_string(c) + "_im");
    }
  columns.push_back("abs_c");
  columns.push_back("arg_c");

  std::vector<std::vector<double>> rows;
  EvolutionResult last;
  for (int s = 0; s <= opt.steps; ++s) {
    const double t = opt.t * s / opt.steps;
    last = evolve_gaussian_full(psi, H, L, t);
    std::vector<double> row{t};
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) {
        row.push_back(last.state.A(r, c).real());
        row.push_back(last.state.A(r, c).imag());
      }
    row.push_back(std::abs(last.state.c));
    row.push_back(std::arg(last.state.c));
    rows.push_back(row);
  }

  if (opt.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# maslov evolve trace v" << kTraceVersion << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
    return {0, os.str()};
  }

  ojson report = header("evolve", path);
  report["system"] = echo(sys);
  report["t"] = opt.t;
  report["trace"] = {{"version", kTraceVersion}, {"columns", columns}, {"rows", rows}};
  ojson results = {{"state", measured(gaussian_json(last.state), "germ transport under the reduced flow")},
                   {"representative", measured(gaussian_json(last.representative), "full-space evolution")},
                   {"germ_distance", measured(last.germ_distance, "span distance to h_germ(A(t))")}};
  if (opt.trunc > 0) {
    TruncationSpec ts;
    ts.n_max = opt.trunc;
    const BasisEvolution be = numeric_evolve(QuasiGaussianState(psi), H, L, opt.t, ts);
    const BasisState ref = project_to_basis(QuasiGaussianState(last.representative), be.n_max, ts.omega);
    const ConstraintPlane l0(n, RMat(2 * n, 0));
    const double l2 = numeric_inner_product(QuasiGaussianState(last.representative),
                                            QuasiGaussianState(last.representative), l0)
                          .value.real();
    const double infid = 1.0 - std::norm(ref.coeffs.dot(be.state.coeffs)) / (be.state.coeffs.squaredNorm() * l2);
    results["oracle_infidelity"] = measured(infid, "truncated oscillator basis, cutoff " + std::to_string(be.n_max),
                                            opt.tol);
    results["oracle_truncation_error"] = be.error;
    report["results"] = results;
    if (!(infid <= std::max(opt.tol, 1e-6))) {
      report["ok"] = false;
      return {2, dump(report)};
    }
  }
  report["results"] = results;
  return {0, dump(report)};
}

CommandResult cmd_stability(const std::string& path, const CommandOptions&) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  const ConstraintPlane L = sys.plane();
  const Reduction red = reduce_hamiltonian(sys.hamiltonian(), L);
  const StabilityReport st = analyze_stability(red.gamma_bar);
  ojson report = header("stability", path);
  report["system"] = echo(sys);
  report["stable"] = st.stable;
  ojson beta = ojson::array();
  std::string modes_note;
  if (st.stable && red.gamma_bar.rows() > 0) {
    try {
      const ModeSet modes = extract_modes(red.gamma_bar, red.space);
      for (Eigen::Index i = 0; i < modes.beta.size(); ++i) beta.push_back(modes.beta(i));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Unsupported) throw;
      modes_note = e.what();
    }
  }
  report["beta"] = beta;
  if (!modes_note.empty()) report["modes_unavailable"] = modes_note;
  ojson spec = ojson::array();
  for (const cplx& z : st.spectrum) spec.push_back(complex_json(z));
  report["details"] = {{"method", "eigenvalues of the reduced flow generator, tolerance 1e-6"},
                       {"diagonalizable", st.diagonalizable},
                       {"spectrum", spec},
                       {"reason", st.reason}};
  return {0, dump(report)};
}

void enumerate_occupations(int modes, int bound, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == modes) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int v : cur) used += v;
  for (int v = 0; used + v <= bound; ++v) {
    cur.push_back(v);
    enumerate_occupations(modes, bound, cur, out);
    cur.pop_back();
  }
}

CommandResult cmd_spectrum(const std::string& path, const CommandOptions& opt) {
  const SystemDefinition sys = load_system(path);
  require_valid(sys);
  if (opt.bound < 0) fail_validation("bad_bound", "--bound must be non-negative");
  const GroundState gs = ground_state(sys.hamiltonian(), sys.plane());
  const int m = static_cast<int>(gs.modes.beta.size());
  std::vector<std::vector<int>> occ;
  std::vector<int> cur;
  enumerate_occupations(m, opt.bound, cur, occ);
  struct Level {
    std::vector<int> occupation;
    cplx energy;
  };
  std::vector<Level> levels;
  for (const auto& o : occ) levels.push_back({o, excited_state(gs, o).energy});
  std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
    if (a.energy.real() != b.energy.real()) return a.energy.real() < b.energy.real();
    return a.occupation < b.occupation;
  });
  bool real = true;
  for (const Level& l : levels) real = real && l.energy.imag() == 0.0;
  auto energy_json = [real](cplx e) { return real ? ojson(e.real()) : complex_json(e); };
  ojson report = header("spectrum", path);
  report["system"] = echo(sys);
  report["bound"] = opt.bound;
  ojson list = ojson::array();
  ojson energies = ojson::array();
  for (const Level& l : levels) {
    list.push_back({{"occupation", l.occupation}, {"energy", energy_json(l.energy)}});
    energies.push_back(energy_json(l.energy));
  }
  ojson beta = ojson::array();
  for (Eigen::Index i = 0; i < gs.modes.beta.size(); ++i) beta.push_back(gs.modes.beta(i));
  report["beta"] = beta;
  report["energies"] = energies;
  report["levels"] = list;
  report["method"] = "epsilon' + sum beta_I (N_I + 1/2) over normal modes";
  report["ground_residual"] = gs.residual;
  return {0, dump(report)};
}

ojson compare_one(const QuasiGaussianState& f, const QuasiGaussianState& g, const ConstraintPlane& L,
                  const GridSpec& grid, double& rel) {
  const cplx closed = gaussian_inner_product(f, g, L);
  const OracleValue o = numeric_inner_product(f, g, L, grid);
  rel = std::abs(closed - o.value) / std::max(std::abs(closed), 1e-300);
  return {{"n", L.n()},
          {"k", L.k()},
          {"closed_form", complex_json(closed)},
          {"oracle", complex_json(o.value)},
          {"oracle_error_estimate", o.error},
          {"oracle_doublings", o.doublings},
          {"rel_delta", rel}};
}

CommandResult cmd_oracle_compare(const std::string& path, const CommandOptions& opt) {
  GridSpec grid;
  grid.nodes = opt.grid;
  ojson report = header("oracle-compare", path);
  ojson cases = ojson::array();
  double worst = 0.0;
  if (!path.empty()) {
    const SystemDefinition sys = load_system(path);
    require_valid(sys);
    const QuasiGaussianState psi(require_gaussian(sys));
    report["system"] = echo(sys);
    double rel = 0.0;
    ojson c = compare_one(psi, psi, sys.plane(), grid, rel);
    c["source"] = "file";
    cases.push_back(c);
    worst = std::max(worst, rel);
  }
  const int count = opt.count >= 0 ? opt.count : (path.empty() ? 20 : 0);
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < count; ++i) {
    const sampling::OracleInstance inst = sampling::random_oracle_instance(rng);
    double rel = 0.0;
    ojson c = compare_one(inst.f, inst.g, inst.plane, grid, rel);
    c["source"] = "random " + std::to_string(i);
    cases.push_back(c);
    worst = std::max(worst, rel);
  }
  report["seed"] = opt.seed;
  report["method"] = "closed-form constrained product against shift-lattice quadrature";
  report["grid"] = {{"nodes", grid.nodes},
                    {"shift_density", grid.shift_density},
                    {"rel_target", grid.rel_target},
                    {"max_doublings", grid.max_doublings}};
  report["tolerance"] = opt.tol;
  report["cases"] = cases;
  report["max_rel_delta"] = worst;
  report["ok"] = worst <= opt.tol;
  return {worst <= opt.tol ? 0 : 2, dump(report)};
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
      return "validation";
    case ErrorKind::Numerical:
      return "numerical";
    case ErrorKind::Unsupported:
      return "unsupported";
  }
  return "unknown";
}

}  // namespace

CommandResult run_command(const std::string& command, const std::string& path, const CommandOptions& opt) {
  static const std::map<std::string, std::function<CommandResult(const std::string&, const CommandOptions&)>>
      table = {{"check", cmd_check},         {"norm", cmd_norm},           {"equiv", cmd_equiv},
               {"dirac", cmd_dirac},         {"evolve", cmd_evolve},       {"stability", cmd_stability},
               {"spectrum", cmd_spectrum},   {"oracle-compare", cmd_oracle_compare}};
  ojson err = header(command, path);
  try {
    const auto it = table.find(command);
    if (it == table.end()) fail_validation("unknown_command", "unknown command " + command);
    if (opt.format != "json" && opt.format != "csv") fail_validation("bad_format", "--format must be json or csv");
    if (opt.format == "csv" && command != "evolve") fail_validation("bad_format", "only evolve writes CSV");
    return it->second(path, opt);
  } catch (const Error& e) {
    err["error"] = {{"kind", kind_name(e.kind())}, {"code", e.code()}, {"message", e.what()}};
    return {e.kind() == ErrorKind::Numerical ? 2 : 1, dump(err)};
  } catch (const std::exception& e) {
    err["error"] = {{"kind", "numerical"}, {"code", "internal"}, {"message", e.what()}};
    return {2, dump(err)};
  }
}

}  // namespace maslov
