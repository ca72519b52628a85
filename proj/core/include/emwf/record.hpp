#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "emwf/grid.hpp"

namespace emwf {

struct RecordMetadata {
  std::string scenario_hash;
  std::string integrator;
  std::string potential;
  double dt = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  std::size_t save_stride = 1;
  std::size_t snapshot_every = 1;
  std::map<std::string, std::string> extra;
};

// Saved times with per-time expectations. Snapshots are kept at every
// `snapshot_every`-th saved time; snapshot_index maps each one to its time.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<WaveFunction> snapshots;
  std::vector<std::size_t> snapshot_index;
  std::vector<std::vector<double>> position;
  std::vector<std::vector<double>> momentum;
  // <-grad V>
  std::vector<std::vector<double>> force;
  std::vector<double> energy;
  std::vector<double> norm;
  Units units;
  RecordMetadata meta;

  std::size_t size() const { return times.size(); }
  std::size_t dims() const { return position.empty() ? 0 : position.front().size(); }
  bool has_all_snapshots() const { return snapshots.size() == times.size(); }
  // Snapshot at time index i, or nullptr when that time was not kept.
  const WaveFunction* snapshot_at(std::size_t i) const;
  // Mass of configuration axis a.
  double mass(std::size_t axis) const { return units.masses.at(axis / (dims() / units.particles())); }
  // Uniform spacing of the saved times; throws InvalidArgument otherwise.
  double uniform_stride(double rel_tol = 1e-9) const;
  // Copy keeping only every `k`-th saved time, starting from the first.
  TrajectoryRecord thinned(std::size_t k) const;
  // Throws InvalidArgument when lengths disagree or times are not increasing.
  void validate() const;
};

}  // namespace emwf
