#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "emwf/effective.hpp"
#include "emwf/grid.hpp"
#include "emwf/potential.hpp"

namespace emwf {

// Every validation problem of one scenario, in document order.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Per-particle lattice; two-particle states use it once per particle.
struct GridSpec {
  std::size_t dims = 1;
  std::vector<double> extent;
  std::vector<std::size_t> points;
};

struct UnitsSpec {
  double hbar = 1.0;
  // One entry for single-particle states, two (m1, m2) otherwise.
  std::vector<double> masses{1.0};
  std::optional<double> c;
};

struct PotentialSpec {
  std::string type = "free";
  double stiffness = 1.0;
  double lambda = 0.1;
  double depth = 1.0;
  double width = 1.0;
  std::shared_ptr<PotentialSpec> pair;
  std::shared_ptr<PotentialSpec> external;
};

struct StateSpec {
  std::string type = "gaussian";
  std::vector<double> center;
  std::vector<double> momentum;
  std::vector<double> sigma;
  double omega = 1.0;
  std::vector<int> quanta;
  std::vector<Complex> coefficients;
  // superposition components, or the two particle states of product/entangled.
  std::vector<StateSpec> parts;

  bool two_particle() const { return type == "product" || type == "entangled"; }
};

struct IntegratorSpec {
  std::string kind = "split_step";
  double dt = 1e-3;
  double t_final = 1.0;
  std::size_t save_stride = 1;
  std::size_t snapshot_every = 1;
  bool subtract_rest = true;
};

struct ClassifySpec {};

struct EffectiveSpec {
  std::vector<int> orders{1, 2};
  MultipoleSource source = MultipoleSource::frozen;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<double>> v0;
  double threshold = 1e-3;
  int substeps = 1;
};

struct WignerSpec {
  // Negative selects the final saved time.
  double at = -1.0;
  std::size_t csv_stride = 4;
  int c_max = 2;
};

struct BohmSpec {
  std::size_t seeds = 1000;
  // stratified, density or uniform.
  std::string seeding = "stratified";
  std::optional<std::vector<double>> lo;
  std::optional<std::vector<double>> hi;
  std::size_t bins = 64;
  bool euler = true;
  int monopole_order = 0;
};

struct MixtureComponentSpec {
  double weight = 0.0;
  std::string label;
  StateSpec state;
};

struct MixtureSpec {
  std::vector<MixtureComponentSpec> components;
  std::size_t axis1 = 0;
  std::size_t axis2 = 0;
};

using AnalysisSpec = std::variant<ClassifySpec, EffectiveSpec, WignerSpec, BohmSpec, MixtureSpec>;
std::string analysis_name(const AnalysisSpec& a);

struct OutputSpec {
  std::string dir;
  bool snapshots = false;
};

struct ToleranceSpec {
  double dipole = 1e-8;
  double ehrenfest = 1e-5;
};

// Optional pass/fail checks evaluated by the runner. Numeric values are upper
// bounds except mixture_residual_above.
struct ExpectSpec {
  std::optional<std::string> verdict;
  std::optional<double> trajectory_error;
  std::optional<bool> order_monotone;
  std::optional<double> tv_distance;
  std::optional<bool> wigner_negative;
  std::optional<double> monopole_remainder;
  std::optional<bool> mixture_classical;
  std::optional<double> mixture_residual;
  std::optional<double> mixture_residual_above;
  std::optional<double> momentum_drift;
};

struct Scenario {
  std::string name;
  std::string description;
  GridSpec grid;
  UnitsSpec units;
  PotentialSpec potential;
  StateSpec state;
  IntegratorSpec integrator;
  std::vector<AnalysisSpec> analyses;
  OutputSpec output;
  ToleranceSpec tolerances;
  std::uint64_t seed = 0;
  ExpectSpec expect;
  std::filesystem::path source;

  template <class T>
  const T* find() const {
    for (const auto& a : analyses)
      if (const T* p = std::get_if<T>(&a)) return p;
    return nullptr;
  }
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& origin = {});

// Fully resolved scenario as YAML; the hash is SHA-256 of this text.
std::string canonical_echo(const Scenario& s);
std::string scenario_hash(const Scenario& s);

// Configuration-space lattice and units of the evolved state.
Grid build_grid(const Scenario& s);
Units build_units(const Scenario& s);
PotentialPtr build_potential(const PotentialSpec& p, std::size_t axes_per_particle);
WaveFunction build_state(const StateSpec& spec, const Grid& particle_grid, const Units& units);
WaveFunction build_initial_state(const Scenario& s);

struct ScenarioListing {
  std::filesystem::path file;
  std::string name;
  std::string description;
};

// *.scn files of `dir` sorted by file name; unreadable files report their error as description.
std::vector<ScenarioListing> list_scenarios(const std::filesystem::path& dir);
std::filesystem::path default_scenario_dir();

std::vector<std::string> analysis_names();
// Throws InvalidArgument naming the closest analyses for unknown names.
std::string describe(const std::string& analysis);

std::size_t edit_distance(const std::string& a, const std::string& b);
// Candidates within distance max(2, |word|/3), nearest first.
std::vector<std::string> suggestions(const std::string& word, const std::vector<std::string>& candidates);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace emwf
