#include <gtest/gtest.h>

#include <filesystem>

#include "emwf/runner.hpp"
#include "emwf/scenario.hpp"

namespace fs = std::filesystem;
using namespace emwf;

class ShippedScenario : public ::testing::TestWithParam<std::string> {};

TEST_P(ShippedScenario, RunsWithEveryExpectationMet) {
  const Scenario s = parse_scenario(default_scenario_dir() / (GetParam() + ".scn"));
  RunOptions opt;
  opt.out = fs::temp_directory_path() / ("emwf_shipped_" + GetParam());
  const RunResult r = run_scenario(s, opt);
  EXPECT_EQ(r.exit_code, kExitOk);
  for (const auto& stage : r.stages) EXPECT_EQ(stage.status, StageStatus::pass) << stage.name << ": " << stage.reason;
  EXPECT_FALSE(r.checks.empty());
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  fs::remove_all(*opt.out);
}

INSTANTIATE_TEST_SUITE_P(All, ShippedScenario,
                         ::testing::Values("double_gaussian_bohm", "first_excited_wigner", "free_packet",
                                           "harmonic_coherent", "harmonic_ground", "mixture_coherent",
                                           "mixture_entangled", "quartic_orders", "relativistic_free",
                                           "two_body_spring"),
                         [](const auto& info) { return info.param; });
