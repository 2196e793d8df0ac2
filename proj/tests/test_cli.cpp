#include <string>

#include <json.hpp>

#include "doctest.h"
#include "maslov/commands.hpp"
#include "maslov/system_io.hpp"

using namespace maslov;
using json = nlohmann::json;

namespace {

std::string sample(const std::string& name) { return std::string(MASLOV_SAMPLES_DIR) + "/" + name + ".json"; }

/// Error code and message thrown by parse_system.
std::pair<std::string, std::string> parse_failure(const std::string& text) {
  try {
    parse_system(text);
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  return {"", ""};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("system reader locates errors") {
  const auto syntax = parse_failure("{\n  \"n\": 1,\n  \"gamma\": [[1, 0], [0 1]]\n}");
  CHECK(syntax.first == "parse");
  CHECK(contains(syntax.second, "line 3, column"));

  const auto row = parse_failure(R"({"n": 1, "gamma": [[1, 0], [0, 1, 2]]})");
  CHECK(row.first == "schema");
  CHECK(contains(row.second, "gamma row 1"));

  const auto asym = parse_failure(R"({"n": 1, "gamma": [[1, 0.5], [0, 1]]})");
  CHECK(contains(asym.second, "gamma row 0, column 1"));

  const auto cell = parse_failure(R"({"n": 1, "gamma": [[1, 0], [0, 1]], "gaussian": {"A": [[[0, "x"]]]}})");
  CHECK(contains(cell.second, "gaussian.A row 0, column 0"));

  CHECK(parse_failure(R"({"n": 1, "gamma": [[1, 0], [0, 1]], "gama": 1})").first == "schema");
  CHECK(parse_failure(R"({"gamma": [[1, 0], [0, 1]]})").first == "schema");
  CHECK(parse_failure(R"({"n": 1, "gamma": [[1, 0], [0, 1]], "measure_scale": -1})").first == "schema");

  const SystemDefinition s = parse_system(R"({"n": 1, "gamma": [[1, 0], [0, 1]], "gaussian": {"A": [[[0.5, 2]]]}})");
  REQUIRE(s.gaussian);
  CHECK(s.gaussian->A(0, 0) == cplx(0.5, 2.0));
  CHECK(s.gaussian->c == cplx(1.0, 0.0));
  CHECK(s.k() == 0);
}

TEST_CASE("check command") {
  const CommandOptions opt;
  const CommandResult ok = run_command("check", sample("oscillator"), opt);
  CHECK(ok.exit_code == 0);
  const json okj = json::parse(ok.output);
  CHECK(okj["ok"] == true);
  for (const auto& c : okj["checks"]) CHECK(c["ok"] == true);

  const CommandResult iso = run_command("check", sample("non_isotropic"), opt);
  CHECK(iso.exit_code == 1);
  CHECK(contains(iso.output, "constraint rows 0 and 1"));

  const CommandResult inc = run_command("check", sample("incompatible"), opt);
  CHECK(inc.exit_code == 1);
  CHECK(contains(inc.output, "gauge-gauge block"));

  const CommandResult missing = run_command("norm", sample("does_not_exist"), opt);
  CHECK(missing.exit_code == 1);
  CHECK(json::parse(missing.output)["error"]["code"] == "io");

  const CommandResult invalid = run_command("norm", sample("non_isotropic"), opt);
  CHECK(invalid.exit_code == 1);
  CHECK(json::parse(invalid.output).contains("error"));
}

TEST_CASE("stability and spectrum commands") {
  CommandOptions opt;
  const json st = json::parse(run_command("stability", sample("oscillator"), opt).output);
  CHECK(st["stable"] == true);
  REQUIRE(st["beta"].size() == 1);
  CHECK(st["beta"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  opt.bound = 2;
  const CommandResult sp = run_command("spectrum", sample("oscillator"), opt);
  CHECK(sp.exit_code == 0);
  const json spj = json::parse(sp.output);
  REQUIRE(spj["energies"].size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(spj["energies"][i].get<double>() == doctest::Approx(0.5 + i).epsilon(1e-12));
}

TEST_CASE("norm, equiv and dirac commands") {
  const CommandOptions opt;
  const json p = json::parse(run_command("norm", sample("p_constraint"), opt).output);
  CHECK(p["results"]["norm_squared"]["value"].get<double>() == doctest::Approx(2.0 * 3.14159265358979323846));
  CHECK(p["results"]["norm_squared"].contains("method"));

  CommandOptions eq = opt;
  eq.other = sample("oscillator");
  const CommandResult same = run_command("equiv", sample("oscillator"), eq);
  CHECK(same.exit_code == 0);
  CHECK(json::parse(same.output)["results"]["equivalent"]["value"] == true);

  const CommandResult d = run_command("dirac", sample("p_constraint"), opt);
  CHECK(d.exit_code == 0);
}

TEST_CASE("evolve trace") {
  CommandOptions opt;
  opt.format = "csv";
  opt.steps = 4;
  opt.t = 2.0;
  const CommandResult r = run_command("evolve", sample("constrained_oscillator"), opt);
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("# maslov evolve trace v1\n", 0) == 0);
  CHECK(contains(r.output, "\nt,A_0_0_re,A_0_0_im,A_0_1_re,A_0_1_im,A_1_1_re,A_1_1_im,abs_c,arg_c\n"));
  int lines = 0;
  for (char c : r.output) lines += c == '\n';
  CHECK(lines == 2 + 5);

  opt.format = "json";
  opt.trunc = 24;
  opt.t = 1.0;
  const CommandResult o = run_command("evolve", sample("oscillator"), opt);
  CHECK(o.exit_code == 0);
  CHECK(std::abs(json::parse(o.output)["results"]["oracle_infidelity"]["value"].get<double>()) < 1e-6);
}

TEST_CASE("reports are deterministic") {
  CommandOptions opt;
  opt.count = 3;
  opt.seed = 11;
  const std::string a = run_command("oracle-compare", "", opt).output;
  const std::string b = run_command("oracle-compare", "", opt).output;
  CHECK(a == b);
  opt.seed = 12;
  CHECK(run_command("oracle-compare", "", opt).output != a);
  CHECK(run_command("norm", sample("squeezed"), {}).output == run_command("norm", sample("squeezed"), {}).output);
}

TEST_CASE("oracle-compare on seeded random systems") {
  CommandOptions opt;
  const CommandResult r = run_command("oracle-compare", "", opt);
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.output);
  CHECK(j["cases"].size() == 20);
  CHECK(j["max_rel_delta"].get<double>() < 1e-8);
  for (const auto& c : j["cases"]) CHECK(c.contains("oracle_error_estimate"));

  opt.count = 0;
  const json file = json::parse(run_command("oracle-compare", sample("constrained_oscillator"), opt).output);
  CHECK(file["cases"].size() == 1);
  CHECK(file["max_rel_delta"].get<double>() < 1e-8);
}
