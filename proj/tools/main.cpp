#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "emwf/error.hpp"
#include "emwf/runner.hpp"
#include "emwf/scenario.hpp"

namespace {

int print_errors(const emwf::ScenarioError& e) {
  std::cerr << "invalid scenario: " << e.errors().size() << " error(s)\n";
  for (const auto& m : e.errors()) std::cerr << "  " << m << '\n';
  return emwf::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expectation-value and multipole dynamics of wave packets"};
  app.require_subcommand(1);

  std::string file;
  std::string out;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifact directory");
  run->add_option("scenario", file, "Scenario file")->required();
  run->add_option("--out", out, "Output directory (overrides output.dir)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Seed for randomized seeding (overrides the scenario)");
  run->add_option("--tol-scale", tol_scale, "Multiplier for tolerances and expectations")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a scenario and print its resolved form");
  validate->add_option("scenario", file, "Scenario file")->required();

  std::string dir = emwf::default_scenario_dir().string();
  auto* list = app.add_subcommand("list", "List shipped scenarios");
  list->add_option("--dir", dir, "Scenario directory");

  std::string analysis;
  auto* describe = app.add_subcommand("describe", "Document one analysis");
  describe->add_option("analysis", analysis, "Analysis name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : emwf::kExitValidation;
  }

  if (*list) {
    const auto items = emwf::list_scenarios(dir);
    for (const auto& s : items) std::cout << s.file.filename().string() << "  " << s.name << "  " << s.description << '\n';
    std::cout << items.size() << " scenario(s) in " << dir << '\n';
    return 0;
  }
  if (*describe) {
    try {
      std::cout << emwf::describe(analysis);
      return 0;
    } catch (const emwf::InvalidArgument& e) {
      std::cerr << e.what() << '\n';
      return emwf::kExitValidation;
    }
  }

  emwf::Scenario scenario;
  try {
    scenario = emwf::parse_scenario(file);
  } catch (const emwf::ScenarioError& e) {
    return print_errors(e);
  }
  if (*validate) {
    std::cout << emwf::canonical_echo(scenario);
    std::cout << "# hash: " << emwf::scenario_hash(scenario) << '\n';
    return 0;
  }

  emwf::RunOptions opt;
  if (!out.empty()) opt.out = out;
  opt.threads = threads;
  if (seed_opt->count() > 0) opt.seed = seed;
  opt.tol_scale = tol_scale;
  try {
    const emwf::RunResult r = emwf::run_scenario(scenario, opt);
    for (const auto& st : r.stages)
      std::cout << '[' << st.name << "] " << emwf::to_string(st.status) << ": " << st.reason << '\n';
    for (const auto& c : r.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    std::cout << "output: " << r.directory.string() << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return emwf::kExitAnalysisError;
  }
}
