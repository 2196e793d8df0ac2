#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "maslov/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quadratic constrained systems: checks, norms, evolution, spectra and oracle comparisons."};
  app.require_subcommand(1);

  maslov::CommandOptions opt;
  std::string file;

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"check", "validate isotropy, gauge, compatibility and the Gaussian (exit 1 on failure)"},
      {"norm", "constrained norm of the file's Gaussian"},
      {"equiv", "compare the file's Gaussian with the one in --other"},
      {"dirac", "Dirac projection of the file's Gaussian and its Dirac norm"},
      {"evolve", "Gaussian evolution with a trace of A(t) and c(t)"},
      {"stability", "stability of the reduced classical system and its frequencies"},
      {"spectrum", "ground and excited energies up to total occupation --bound"},
      {"oracle-compare", "closed-form products against brute-force quadrature"},
  };
  for (const Spec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    const bool optional_file = std::string(s.name) == "oracle-compare";
    CLI::Option* f = sub->add_option("file", file, "system definition (JSON)");
    if (!optional_file) f->required();
    sub->add_option("--tol", opt.tol, "agreement threshold for cross-checks")->capture_default_str();
    sub->add_option("--format", opt.format, "json, or csv for the evolve trace")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    const std::string name = s.name;
    if (name == "equiv") sub->add_option("--other", opt.other, "file holding the second Gaussian")->required();
    if (name == "evolve") {
      sub->add_option("--t", opt.t, "end time")->capture_default_str();
      sub->add_option("--steps", opt.steps, "trace samples after t = 0")->capture_default_str();
      sub->add_option("--trunc", opt.trunc, "oscillator cutoff for an oracle run at the end time (0 skips, n <= 2)")
          ->capture_default_str();
    }
    if (name == "spectrum") sub->add_option("--bound", opt.bound, "largest total occupation")->capture_default_str();
    if (name == "oracle-compare") {
      sub->add_option("--seed", opt.seed, "seed of the random instance stream")->capture_default_str();
      sub->add_option("--count", opt.count, "random instances (default 20 without a file, 0 with one)");
      sub->add_option("--grid", opt.grid, "Gauss-Hermite nodes per axis, at least 16")->capture_default_str();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const maslov::CommandResult r = maslov::run_command(command, file, opt);
  std::cout << r.output;
  return r.exit_code;
}
