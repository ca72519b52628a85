#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emwf/classifier.hpp"
#include "emwf/grid.hpp"
#include "emwf/potential.hpp"
#include "emwf/record.hpp"

namespace emwf {

// One diagonal term of the decohered two-particle density matrix. Either a
// full record (two particles, snapshots for the quantum side) or bare
// per-particle trajectories.
struct MixtureComponent {
  double weight = 0.0;
  std::string label;
  std::shared_ptr<const TrajectoryRecord> record;
  std::vector<double> times;
  std::vector<std::vector<double>> x1;
  std::vector<std::vector<double>> x2;
};

MixtureComponent component_from_record(double weight, TrajectoryRecord record, std::string label = {});
MixtureComponent component_from_trajectories(double weight, std::vector<double> times,
                                             std::vector<std::vector<double>> x1, std::vector<std::vector<double>> x2,
                                             std::string label = {});

inline constexpr double kWeightSumTolerance = 1e-12;

struct MixtureEnsemble {
  std::vector<MixtureComponent> components;
  std::size_t axes_per_particle = 0;
  std::optional<Grid> grid;

  // sum_w p_w |psi_w(t)|^2; every component needs a snapshot at t.
  RealField density_at(double t) const;
};

// Validates weights (nonnegative, sum 1 within 1e-12), particle layout and a
// common grid across records.
MixtureEnsemble reduced_density(std::vector<MixtureComponent> components);

struct ComponentClassicality {
  std::string label;
  double weight = 0.0;
  // Maxima over snapshot times; NaN for trajectory-only components.
  double dipole1 = 0.0;
  double dipole2 = 0.0;
  double cross_dipole = 0.0;
  bool audited = false;
  std::optional<Verdict> verdict;
  bool passed = false;
};

struct ClassicalityReport {
  std::vector<ComponentClassicality> components;
  double tolerance = kDefaultDipoleTolerance;
  bool classical = false;
};

// Particle dipoles about each particle's <x> and the cross dipole
// <(x1 - <x1>)(x2 - <x2>)> per component. With a potential, the EMWF
// verdict of each record is required too. Trajectory-only components are
// reported unaudited and do not fail the flag.
ClassicalityReport classicality_check(const MixtureEnsemble& ensemble, double tol = kDefaultDipoleTolerance,
                                      const Potential* v = nullptr,
                                      double tol_ehrenfest = kDefaultEhrenfestTolerance);

struct MixtureExpectation {
  double time = 0.0;
  double classical = 0.0;
  std::optional<double> quantum;
  std::optional<double> residual;
  std::vector<std::string> warnings;
};

// <x1^i x2^j> of the mixture at time t: quantum from the snapshots, classical
// from the component trajectories. i and j are axes of particle 1 and 2.
MixtureExpectation mixture_expectation(const MixtureEnsemble& ensemble, std::size_t i, std::size_t j, double t,
                                       const ClassicalityReport* audit = nullptr);

// The same at every saved time shared by all components.
std::vector<MixtureExpectation> mixture_series(const MixtureEnsemble& ensemble, std::size_t i, std::size_t j,
                                               const ClassicalityReport* audit = nullptr);

// Per component w: unweighted max over times of |quantum_w - classical_w|.
std::vector<double> component_residuals(const MixtureEnsemble& ensemble, std::size_t i, std::size_t j);

// Rows w,label,weight,dipole1,dipole2,cross_dipole,verdict,residual and a
// final "mixture" row carrying the classical flag and the ensemble residual.
void write_mixture_report(const MixtureEnsemble& ensemble, const ClassicalityReport& audit,
                          const std::vector<MixtureExpectation>& series, const std::filesystem::path& path,
                          std::size_t i = 0, std::size_t j = 0);

}  // namespace emwf
