#pragma once

#include <cstddef>
#include <string>

#include "emwf/grid.hpp"
#include "emwf/potential.hpp"
#include "emwf/record.hpp"

namespace emwf {

struct EnergyParts {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
};

// <H> split into kinetic (Fourier space) and potential (position space)
// parts. Throws DegenerateState unless psi is normalized within 1e-6.
EnergyParts hamiltonian_expectation(const WaveFunction& psi, const Potential& v);

// Strang step exp(-iV dt/2hbar) exp(-iT dt/hbar) exp(-iV dt/2hbar) with the
// phase tables precomputed for one grid, mass set and dt.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid& grid, const Units& units, const Potential& v, double dt);

  void step(ComplexField& psi) const;
  double dt() const { return dt_; }

 private:
  Grid grid_;
  double dt_;
  ComplexField half_potential_;
  ComplexField kinetic_;
};

// dt = 0 is the identity; dt < 0 is rejected. Throws NumericalFailure on
// non-finite amplitudes.
WaveFunction split_step(const WaveFunction& psi, const Potential& v, double dt);

struct EvolveOptions {
  double t_final = 1.0;
  double dt = 1e-3;
  // Expectations are stored every `save_stride` steps.
  std::size_t save_stride = 1;
  // Snapshots are stored at every `snapshot_every`-th saved time; 0 keeps none.
  std::size_t snapshot_every = 1;
  std::string scenario_hash;
};

// floor(t_final/dt) Strang steps from psi0; the record starts at psi0.time().
TrajectoryRecord evolve(const WaveFunction& psi0, const Potential& v, const EvolveOptions& options);

// Relative-motion energy c(sqrt(m1^2c^2 + pi^2) + sqrt(m2^2c^2 + pi^2)),
// minus (m1 + m2)c^2 when `subtract_rest` is set.
double relativistic_energy(double pi2, double m1, double m2, double c, bool subtract_rest = true);

// Free relative motion by the exact multiplier exp(-iE(pi)dtau/hbar). A
// potential of the relative coordinate is added by Strang splitting.
class RelativisticPropagator {
 public:
  RelativisticPropagator(const Grid& grid, double hbar, double m1, double m2, double c, double dtau,
                         const Potential* v = nullptr, bool subtract_rest = true);

  void step(ComplexField& psi) const;

 private:
  Grid grid_;
  ComplexField kinetic_;
  ComplexField half_potential_;
};

WaveFunction relativistic_step(const WaveFunction& psi_rel, double m1, double m2, double c, double dtau,
                               bool subtract_rest = true);

// Relativistic counterpart of evolve: energies are <E(pi)> + <V>.
TrajectoryRecord evolve_relativistic(const WaveFunction& psi0, double m1, double m2, double c, const Potential* v,
                                     const EvolveOptions& options, bool subtract_rest = true);

}  // namespace emwf
