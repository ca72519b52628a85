#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "emwf/error.hpp"
#include "emwf/runner.hpp"
#include "emwf/scenario.hpp"

using namespace emwf;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
name: minimal
grid: {extent: 20, points: 128}
state: {type: gaussian, sigma: 1}
integrator: {dt: 0.01, t_final: 0.2, save_stride: 2}
)";

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& list, const std::string& needle) {
  for (const auto& s : list)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("emwf_scenario_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ScenarioParse, MinimalFreeGaussianFillsDefaults) {
  const Scenario s = parse_scenario_text(kMinimal);
  EXPECT_EQ(s.name, "minimal");
  EXPECT_EQ(s.potential.type, "free");
  EXPECT_EQ(s.units.hbar, 1.0);
  ASSERT_EQ(s.units.masses.size(), 1u);
  EXPECT_EQ(s.units.masses[0], 1.0);
  EXPECT_EQ(s.state.center, std::vector<double>{0.0});
  EXPECT_EQ(s.integrator.kind, "split_step");
  EXPECT_EQ(s.integrator.snapshot_every, 1u);
  EXPECT_EQ(s.tolerances.dipole, 1e-8);
  EXPECT_EQ(s.tolerances.ehrenfest, 1e-5);
  EXPECT_EQ(s.output.dir, "runs/minimal");

  const std::string echo = canonical_echo(s);
  EXPECT_NE(echo.find("type: free"), std::string::npos);
  EXPECT_NE(echo.find("dt: 0.01"), std::string::npos);
  EXPECT_NE(echo.find("ehrenfest: 1e-05"), std::string::npos);
}

TEST(ScenarioParse, EchoIsAFixedPoint) {
  const Scenario s = parse_scenario_text(kMinimal);
  const Scenario again = parse_scenario_text(canonical_echo(s));
  EXPECT_EQ(canonical_echo(s), canonical_echo(again));
  EXPECT_EQ(scenario_hash(s), scenario_hash(again));
  EXPECT_EQ(scenario_hash(s).size(), 64u);
}

TEST(ScenarioParse, ShippedScenariosRoundTrip) {
  for (const auto& item : list_scenarios(default_scenario_dir())) {
    const Scenario s = parse_scenario(item.file);
    EXPECT_EQ(canonical_echo(parse_scenario_text(canonical_echo(s))), canonical_echo(s)) << item.file;
  }
}

TEST(ScenarioParse, DtAboveFinalTimeIsRejected) {
  const auto errs = errors_of(R"(
name: bad
grid: {extent: 20, points: 128}
state: {type: gaussian}
integrator: {dt: 0.5, t_final: 0.2}
)");
  ASSERT_FALSE(errs.empty());
  EXPECT_TRUE(any_contains(errs, "dt exceeds t_final"));
}

TEST(ScenarioParse, SaveWindowBeyondFinalTimeIsRejected) {
  const auto errs = errors_of(R"(
name: bad
grid: {extent: 20, points: 128}
state: {type: gaussian}
integrator: {dt: 0.1, t_final: 0.2, save_stride: 5}
)");
  EXPECT_TRUE(any_contains(errs, "save window"));
}

TEST(ScenarioParse, UnknownKeyNamesNearestMatch) {
  const auto errs = errors_of(R"(
name: typo
grid: {extent: 20, points: 128}
potental: {type: harmonic}
state: {type: gaussian}
integrator: {dt: 0.01, t_final: 0.2}
)");
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_NE(errs[0].find("potental"), std::string::npos);
  EXPECT_NE(errs[0].find("did you mean 'potential'"), std::string::npos);
  EXPECT_NE(errs[0].find("line 4"), std::string::npos);
}

TEST(ScenarioParse, AllErrorsAreListed) {
  const auto errs = errors_of(R"(
name: many
grid: {extent: -1, points: 100}
units: {hbar: 0}
potential: {type: harmonc}
state: {type: gaussian, sigma: [1, 2]}
integrator: {dt: 0.01, t_fnal: 0.2}
analyses: [clasify]
)");
  EXPECT_GE(errs.size(), 6u);
  EXPECT_TRUE(any_contains(errs, "extents must be positive"));
  EXPECT_TRUE(any_contains(errs, "powers of two"));
  EXPECT_TRUE(any_contains(errs, "units.hbar"));
  EXPECT_TRUE(any_contains(errs, "did you mean 'harmonic'"));
  EXPECT_TRUE(any_contains(errs, "expected 1 entries"));
  EXPECT_TRUE(any_contains(errs, "did you mean 't_final'"));
  EXPECT_TRUE(any_contains(errs, "did you mean 'classify'"));
}

TEST(ScenarioParse, EffectiveNeedsClassifyOrCauchyData) {
  const std::string base = R"(
name: eff
grid: {extent: 20, points: 128}
potential: {type: harmonic}
state: {type: coherent, displacement: 1}
integrator: {dt: 0.01, t_final: 0.2}
)";
  EXPECT_TRUE(any_contains(errors_of(base + "analyses: [effective]\n"), "classify or explicit x0/v0"));
  EXPECT_TRUE(errors_of(base + "analyses: [classify, effective]\n").empty());
  EXPECT_TRUE(errors_of(base + "analyses:\n  - effective: {x0: 1, v0: 0}\n").empty());
  EXPECT_TRUE(any_contains(errors_of(base + "analyses:\n  - effective: {x0: 1}\n"), "together"));
}

TEST(ScenarioParse, UnitsMustFitTheState) {
  const auto pair = errors_of(R"(
name: pair
grid: {extent: 16, points: 64}
units: {m: 1}
potential: {type: two_body, external: {type: harmonic}}
state: {type: product, particles: [{type: gaussian}, {type: gaussian}]}
integrator: {dt: 0.01, t_final: 0.2}
)");
  EXPECT_TRUE(any_contains(pair, "m1 and m2"));

  const auto rel = errors_of(R"(
name: rel
grid: {extent: 20, points: 128}
units: {m1: 1, m2: 1}
state: {type: gaussian}
integrator: {kind: relativistic, dt: 0.01, t_final: 0.2}
)");
  EXPECT_TRUE(any_contains(rel, "requires c"));

  const auto single = errors_of(R"(
name: single
grid: {extent: 20, points: 128}
units: {m1: 1, m2: 2}
state: {type: gaussian}
integrator: {dt: 0.01, t_final: 0.2}
)");
  EXPECT_TRUE(any_contains(single, "m1/m2"));
}

TEST(ScenarioParse, AnalysisConstraints) {
  const auto wig = errors_of(R"(
name: w
grid: {dims: 2, extent: 12, points: 32}
units: {m1: 1, m2: 1}
potential: {type: free}
state: {type: product, particles: [{type: gaussian}, {type: gaussian}]}
integrator: {dt: 0.01, t_final: 0.2}
analyses: [wigner]
)");
  EXPECT_TRUE(any_contains(wig, "at most two configuration axes"));

  const auto dup = errors_of(std::string(kMinimal) + "analyses: [classify, classify]\n");
  EXPECT_TRUE(any_contains(dup, "requested twice"));

  const auto bohm = errors_of(std::string(kMinimal).replace(std::string(kMinimal).find("save_stride: 2"), 14,
                                                            "save_stride: 2, snapshot_every: 2") +
                              "analyses: [bohm]\n");
  EXPECT_TRUE(any_contains(bohm, "snapshot_every = 1"));
}

TEST(ScenarioParse, MixtureWeightsMustSumToOne) {
  const auto errs = errors_of(R"(
name: mix
grid: {extent: 16, points: 64}
units: {m1: 1, m2: 1}
potential: {type: two_body, external: {type: harmonic}}
state: {type: product, particles: [{type: coherent}, {type: coherent}]}
integrator: {dt: 0.01, t_final: 0.2}
analyses:
  - mixture:
      components:
        - {weight: 0.5, state: {type: product, particles: [{type: coherent}, {type: coherent}]}}
        - {weight: 0.4, state: {type: product, particles: [{type: coherent}, {type: coherent}]}}
)");
  EXPECT_TRUE(any_contains(errs, "weights sum to 0.9"));
}

TEST(ScenarioParse, StateTouchingTheBoxIsRejected) {
  const auto errs = errors_of(R"(
name: edge
grid: {extent: 8, points: 64}
state: {type: gaussian, center: 3.5, sigma: 1}
integrator: {dt: 0.01, t_final: 0.2}
)");
  EXPECT_TRUE(any_contains(errs, "box edge"));
}

TEST(ScenarioParse, MissingFileAndMalformedYaml) {
  EXPECT_THROW(parse_scenario("/nonexistent/none.scn"), ScenarioError);
  EXPECT_TRUE(any_contains(errors_of("name: [unclosed\n"), "malformed YAML"));
}

TEST(ScenarioParse, BuildersProduceTheDescribedState) {
  const Scenario s = parse_scenario_text(R"(
name: pair
grid: {extent: 16, points: 64}
units: {m1: 1, m2: 2}
potential: {type: two_body, pair: {type: harmonic, stiffness: 0.5}}
state: {type: product, particles: [{type: gaussian, center: 1}, {type: gaussian, center: -1}]}
integrator: {dt: 0.01, t_final: 0.2}
)");
  const WaveFunction psi = build_initial_state(s);
  EXPECT_EQ(psi.grid().dims(), 2u);
  EXPECT_EQ(psi.units().masses, (std::vector<double>{1.0, 2.0}));
  EXPECT_NEAR(psi.squared_norm(), 1.0, 1e-12);
  const PotentialPtr v = build_potential(s.potential, 1);
  const std::vector<double> x{1.0, -1.0};
  EXPECT_NEAR(v->value(x), 0.25 * 4.0, 1e-14);
}

TEST(ScenarioText, EditDistanceAndSuggestions) {
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("potental", "potential"), 1u);
  const auto s = suggestions("efective", analysis_names());
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(s.front(), "effective");
  EXPECT_TRUE(suggestions("zzzzzzzz", analysis_names()).empty());
}

TEST(ScenarioText, Sha256KnownDigests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ScenarioDocs, DescribeAndList) {
  const std::string eff = describe("effective");
  EXPECT_NE(eff.find("frozen"), std::string::npos);
  EXPECT_NE(eff.find("time_interpolated"), std::string::npos);
  for (const auto& name : analysis_names()) EXPECT_FALSE(describe(name).empty());
  try {
    describe("efective");
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("effective"), std::string::npos);
  }
  const auto listing = list_scenarios(default_scenario_dir());
  EXPECT_GE(listing.size(), 8u);
  for (const auto& item : listing) EXPECT_EQ(item.description.rfind("invalid", 0), std::string::npos) << item.file;
}

TEST(Runner, WritesReportManifestAndDeterministicCsv) {
  const Scenario s = parse_scenario_text(R"(
name: small_trap
grid: {extent: 16, points: 128}
potential: {type: harmonic}
state: {type: coherent, displacement: 1}
integrator: {dt: 0.01, t_final: 1, save_stride: 5}
analyses:
  - classify
  - effective: {orders: [1, 2]}
  - wigner
  - bohm: {seeds: 50, seeding: density}
expect: {verdict: EMWF, trajectory_error: 1.0e-3}
)");
  RunOptions opt;
  opt.out = scratch("a");
  const RunResult a = run_scenario(s, opt);
  EXPECT_EQ(a.exit_code, kExitOk);
  EXPECT_FALSE(fs::exists(fs::path(opt.out->string() + ".partial")));
  const std::string report = slurp(*opt.out / "report.txt");
  for (const char* stage : {"[evolve] pass", "[moments] pass", "[classify] pass", "[effective] pass",
                            "[wigner] pass", "[bohm] pass", "PASS verdict", "PASS trajectory_error"})
    EXPECT_NE(report.find(stage), std::string::npos) << stage;

  std::istringstream manifest(slurp(*opt.out / "manifest.txt"));
  std::string hash, rel;
  int files = 0;
  while (manifest >> hash >> rel) {
    EXPECT_EQ(sha256_file(*opt.out / rel), hash) << rel;
    ++files;
  }
  EXPECT_GE(files, 12);

  RunOptions again = opt;
  again.out = scratch("b");
  run_scenario(s, again);
  for (const auto& entry : fs::recursive_directory_iterator(*opt.out)) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path rel_path = fs::relative(entry.path(), *opt.out);
    EXPECT_EQ(slurp(entry.path()), slurp(*again.out / rel_path)) << rel_path;
  }
  fs::remove_all(*opt.out);
  fs::remove_all(*again.out);
}

TEST(Runner, SeedOverrideChangesRandomSeedingOnly) {
  const Scenario s = parse_scenario_text(R"(
name: seeds
grid: {extent: 16, points: 128}
potential: {type: harmonic}
state: {type: coherent, displacement: 1}
integrator: {dt: 0.01, t_final: 0.2, save_stride: 5}
analyses:
  - bohm: {seeds: 20, seeding: density, euler: false}
)");
  RunOptions a, b;
  a.out = scratch("seed_a");
  b.out = scratch("seed_b");
  b.seed = 7;
  run_scenario(s, a);
  run_scenario(s, b);
  EXPECT_EQ(slurp(*a.out / "expectations.csv"), slurp(*b.out / "expectations.csv"));
  EXPECT_NE(slurp(*a.out / "bohm_trajectories.csv"), slurp(*b.out / "bohm_trajectories.csv"));
  fs::remove_all(*a.out);
  fs::remove_all(*b.out);
}

TEST(Runner, StageErrorSetsExitCodeAndSkipsDependents) {
  // The packet runs into the box edge, so evolve raises a boundary leak.
  const Scenario s = parse_scenario_text(R"(
name: leak
grid: {extent: 16, points: 128}
state: {type: gaussian, center: 3, momentum: 8, sigma: 0.5}
integrator: {dt: 0.01, t_final: 2}
analyses: [classify, wigner]
)");
  RunOptions opt;
  opt.out = scratch("leak");
  const RunResult r = run_scenario(s, opt);
  EXPECT_EQ(r.exit_code, kExitAnalysisError);
  const std::string report = slurp(*opt.out / "report.txt");
  EXPECT_NE(report.find("[evolve] error"), std::string::npos);
  EXPECT_NE(report.find("[classify] skip: evolve did not complete"), std::string::npos);
  EXPECT_NE(report.find("[wigner] skip"), std::string::npos);
  fs::remove_all(*opt.out);
}

TEST(Runner, FailedExpectationIsReportedWithoutErrorExit) {
  const Scenario s = parse_scenario_text(std::string(kMinimal) + "analyses: [classify]\nexpect: {verdict: neither}\n");
  RunOptions opt;
  opt.out = scratch("fail");
  const RunResult r = run_scenario(s, opt);
  EXPECT_EQ(r.exit_code, kExitOk);
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_FALSE(r.checks[0].passed);
  EXPECT_NE(slurp(*opt.out / "report.txt").find("[classify] fail: check verdict failed"), std::string::npos);
  fs::remove_all(*opt.out);
}
