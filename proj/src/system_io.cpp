#include "maslov/system_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "maslov/linalg.hpp"

namespace maslov {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail_validation("schema", where + ": " + what);
}

std::string cell(const std::string& path, Eigen::Index r, Eigen::Index c) {
  return path + " row " + std::to_string(r) + ", column " + std::to_string(c);
}

double read_real(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(where, "number is not finite");
  return v;
}

/// A real number or an [re, im] pair.
cplx read_complex(const json& j, const std::string& where) {
  if (j.is_number()) return read_real(j, where);
  if (!j.is_array() || j.size() != 2) schema_error(where, "expected a number or an [re, im] pair");
  return {read_real(j[0], where + " (re)"), read_real(j[1], where + " (im)")};
}

RMat read_real_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of rows");
  if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows)
    schema_error(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  RMat m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    const auto ri = static_cast<Eigen::Index>(r);
    if (!row.is_array()) schema_error(path + " row " + std::to_string(r), "expected an array");
    if (static_cast<Eigen::Index>(row.size()) != cols)
      schema_error(path + " row " + std::to_string(r),
                   "expected " + std::to_string(cols) + " entries, found " + std::to_string(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c)
      m(ri, static_cast<Eigen::Index>(c)) = read_real(row[c], cell(path, ri, static_cast<Eigen::Index>(c)));
  }
  return m;
}

CMat read_complex_matrix(const json& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    schema_error(path, "expected " + std::to_string(n) + " rows");
  CMat m(n, n);
  for (int r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      schema_error(path + " row " + std::to_string(r), "expected " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) m(r, c) = read_complex(row[static_cast<std::size_t>(c)], cell(path, r, c));
  }
  return m;
}

CVec read_complex_vector(const json& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    schema_error(path, "expected " + std::to_string(n) + " entries");
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = read_complex(j[static_cast<std::size_t>(i)], path + " entry " + std::to_string(i));
  return v;
}

double read_positive(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const double v = read_real(obj.at(key), key);
  if (!(v > 0.0)) schema_error(key, "must be positive");
  return v;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) schema_error(where, "unknown key \"" + item.key() + "\"");
}

/// Byte offset to "line L, column C", both 1-based.
std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

ConstraintPlane SystemDefinition::plane() const {
  return ConstraintPlane(n, constraints.transpose(), measure_scale);
}

QuadraticHamiltonian SystemDefinition::hamiltonian() const { return make_hamiltonian(gamma, epsilon); }

GaugeSurface SystemDefinition::gauge_surface() const {
  const ConstraintPlane L = plane();
  if (!gauge) return find_gauge_surface(L);
  GaugeSurface g{gauge->transpose(), gauge_measure_scale};
  check_gauge_surface(L, g);
  return g;
}

SystemDefinition parse_system(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_validation("parse", locate(text, e.byte) + ": malformed JSON");
  }
  if (!doc.is_object()) schema_error("document", "expected an object");
  check_keys(doc,
             {"name", "description", "n", "constraints", "measure_scale", "gamma", "epsilon", "gaussian", "gauge",
              "gauge_measure_scale"},
             "document");
  for (const char* key : {"name", "description"})
    if (doc.contains(key) && !doc.at(key).is_string()) schema_error(key, "expected a string");

  SystemDefinition sys;
  if (!doc.contains("n")) schema_error("document", "missing key \"n\"");
  if (!doc.at("n").is_number_integer() || doc.at("n").get<long long>() < 1 || doc.at("n").get<long long>() > 64)
    schema_error("n", "expected an integer in [1, 64]");
  sys.n = doc.at("n").get<int>();
  const int n = sys.n;

  sys.constraints = doc.contains("constraints") ? read_real_matrix(doc.at("constraints"), -1, 2 * n, "constraints")
                                                : RMat(0, 2 * n);
  if (sys.constraints.rows() > n) schema_error("constraints", "at most n constraints can be isotropic");
  sys.measure_scale = read_positive(doc, "measure_scale", 1.0);

  if (!doc.contains("gamma")) schema_error("document", "missing key \"gamma\"");
  sys.gamma = read_real_matrix(doc.at("gamma"), 2 * n, 2 * n, "gamma");
  for (int r = 0; r < 2 * n; ++r)
    for (int c = r + 1; c < 2 * n; ++c)
      if (std::abs(sys.gamma(r, c) - sys.gamma(c, r)) > 1e-12 * std::max(1.0, std::abs(sys.gamma(r, c))))
        schema_error(cell("gamma", r, c), "differs from row " + std::to_string(c) + ", column " + std::to_string(r) +
                                               " (gamma must be symmetric)");
  sys.epsilon = doc.contains("epsilon") ? read_real(doc.at("epsilon"), "epsilon") : 0.0;

  if (doc.contains("gaussian")) {
    const json& g = doc.at("gaussian");
    if (!g.is_object()) schema_error("gaussian", "expected an object");
    check_keys(g, {"A", "b", "c"}, "gaussian");
    if (!g.contains("A")) schema_error("gaussian", "missing key \"A\"");
    GaussianState s;
    s.A = read_complex_matrix(g.at("A"), n, "gaussian.A");
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c)
        if (std::abs(s.A(r, c) - s.A(c, r)) > 1e-12 * std::max(1.0, std::abs(s.A(r, c))))
          schema_error(cell("gaussian.A", r, c), "A must be symmetric");
    s.b = g.contains("b") ? read_complex_vector(g.at("b"), n, "gaussian.b") : CVec(CVec::Zero(n));
    s.c = g.contains("c") ? read_complex(g.at("c"), "gaussian.c") : cplx(1.0, 0.0);
    sys.gaussian = s;
  }

  if (doc.contains("gauge")) {
    sys.gauge = read_real_matrix(doc.at("gauge"), sys.k(), 2 * n, "gauge");
  }
  sys.gauge_measure_scale = read_positive(doc, "gauge_measure_scale", 1.0);
  return sys;
}

SystemDefinition load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_validation("io", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

std::vector<CheckItem> check_system(const SystemDefinition& sys) {
  std::vector<CheckItem> out;
  const int k = sys.k();

  CheckItem iso{"isotropy", true, "omega vanishes on every pair of constraint rows"};
  for (int a = 0; a < k && iso.ok; ++a)
    for (int b = a + 1; b < k; ++b) {
      const double w = symplectic_form(RVec(sys.constraints.row(a).transpose()), RVec(sys.constraints.row(b).transpose()));
      const double scale = sys.constraints.row(a).norm() * sys.constraints.row(b).norm();
      if (std::abs(w) > 1e-10 * std::max(1.0, scale)) {
        iso = {"isotropy", false,
               "constraint rows " + std::to_string(a) + " and " + std::to_string(b) + " have omega = " + format_double(w)};
        break;
      }
    }
  out.push_back(iso);

  const int rank = k == 0 ? 0 : linalg::numerical_rank(sys.constraints);
  out.push_back({"independence", rank == k,
                 rank == k ? "constraint rows are linearly independent"
                           : "constraint rows have rank " + std::to_string(rank) + " < " + std::to_string(k)});

  std::optional<ConstraintPlane> plane;
  if (iso.ok && rank == k) {
    try {
      plane = sys.plane();
    } catch (const Error& e) {
      out.push_back({"plane", false, e.what()});
    }
  }

  std::optional<GaugeSurface> gauge;
  if (plane) {
    try {
      gauge = sys.gauge_surface();
      out.push_back({"gauge", true, sys.gauge ? "declared gauge surface is isotropic and dual to the constraints"
                                              : "gauge surface derived from the constraints"});
    } catch (const Error& e) {
      out.push_back({"gauge", false, e.what()});
    }
  } else {
    out.push_back({"gauge", false, "skipped: the constraint plane is invalid"});
  }

  if (plane && gauge) {
    const CompatibilityReport rep =
        check_compatibility(sys.hamiltonian(), make_reduced_space(*plane, *gauge));
    std::string detail = "gauge-gauge residual " + format_double(rep.gg_residual) + ", gauge-quotient residual " +
                         format_double(rep.gu_residual) + " (tolerance " + format_double(rep.tol) + ")";
    if (!rep.compatible) {
      detail = std::string(rep.gg_residual > rep.tol ? "gauge-gauge" : "gauge-quotient") +
               " block of gamma does not vanish; " + detail;
    }
    out.push_back({"compatibility", rep.compatible, detail});
  } else {
    out.push_back({"compatibility", false, "skipped: the constraint plane or gauge surface is invalid"});
  }

  if (sys.gaussian) {
    try {
      make_gaussian(sys.gaussian->A, sys.gaussian->b, sys.gaussian->c);
      out.push_back({"gaussian", true, "A is symmetric with Im A positive definite"});
    } catch (const Error& e) {
      out.push_back({"gaussian", false, e.what()});
    }
  }
  return out;
}

}  // namespace maslov
