#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "emwf/moments.hpp"
#include "emwf/potential.hpp"
#include "emwf/record.hpp"

namespace emwf {

using DensityMoments = std::map<MultiIndex, double>;

enum class MultipoleSource { frozen, time_interpolated, prescribed };
std::string to_string(MultipoleSource s);

// Density moments as a function of time, labeled with their origin.
struct MultipoleSchedule {
  MultipoleSource source = MultipoleSource::frozen;
  std::function<DensityMoments(double)> at;
};

// Constant moments taken from one set (typically the initial state).
MultipoleSchedule frozen_multipoles(const MultipoleSet& initial);
// Cubic Lagrange interpolation in time through the four nearest sets.
MultipoleSchedule interpolated_multipoles(std::vector<double> times, const std::vector<MultipoleSet>& sets);
MultipoleSchedule prescribed_multipoles(std::function<DensityMoments(double)> moments);

// Moment sets of a record's snapshots with their times.
std::pair<std::vector<double>, std::vector<MultipoleSet>> snapshot_multipoles(const TrajectoryRecord& record, int order,
                                                                             unsigned threads = 1);

// F_i = -d_i V(x) - sum_{2 <= |alpha| <= N} mu_alpha / alpha! d^(alpha + e_i) V(x)
// over configuration-space axes. Throws when V lacks order N + 1 or a moment
// of order <= N is missing.
std::vector<double> effective_force(std::span<const double> x, const Potential& v, const DensityMoments& moments,
                                    int order);

struct EffectiveState {
  std::vector<double> x;
  std::vector<double> v;
  double t = 0.0;
  int force_order = 1;
  MultipoleSource source = MultipoleSource::frozen;
};

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
  int order = 1;
  MultipoleSource source = MultipoleSource::frozen;
};

// Classic RK4 for m_a x_a'' = F_a on the given increasing time grid, with
// `substeps` equal steps per grid interval. Masses are per axis.
ClassicalTrajectory integrate_effective(const EffectiveState& initial, const Potential& v,
                                        const std::vector<double>& masses, const MultipoleSchedule& schedule,
                                        const std::vector<double>& t_grid, int substeps = 1);

// Per-axis masses from particle masses for a configuration space of `dims` axes.
std::vector<double> axis_masses(const Units& units, std::size_t dims);

struct TwoBodyForces {
  std::vector<double> f1;
  std::vector<double> f2;
};

// Two-particle force from the double expansion about (x1, x2). The particle
// dipoles and the cross dipole mu_(1,1) must vanish within `dipole_tol`.
TwoBodyForces two_body_force(std::span<const double> x1, std::span<const double> x2, const Potential& v,
                             const DensityMoments& moments, int order, double dipole_tol = 1e-8);

// Equal-mass relative momentum pi = m v / sqrt(4 - v^2/c^2); requires |v| < 2c.
std::vector<double> relativistic_relative_momentum(std::span<const double> velocity, double m, double c);
// v(pi) = c pi (1/sqrt(m1^2c^2 + pi^2) + 1/sqrt(m2^2c^2 + pi^2)).
std::vector<double> relativistic_relative_velocity(std::span<const double> pi, double m1, double m2, double c);

struct ComparisonMetrics {
  double max_position_error = 0.0;
  double rms_position_error = 0.0;
  double error_vs_hbar2_bound = 0.0;
  double horizon = 0.0;
};

// Classical positions are interpolated to the quantum times (cubic Lagrange).
// The horizon is the first quantum time at which the error exceeds
// `threshold`, or the final time when it never does. error_vs_hbar2_bound = max error / (hbar^2 * scale).
ComparisonMetrics compare_trajectories(const std::vector<double>& quantum_times,
                                       const std::vector<std::vector<double>>& quantum_x,
                                       const ClassicalTrajectory& classical, double threshold, double hbar = 1.0,
                                       double scale = 1.0);

// Cubic Lagrange interpolation of samples y(t) at time t.
double lagrange4(const std::vector<double>& times, const std::vector<double>& values, double t);

// t, x.., v.. rows.
void write_classical_trajectory(const ClassicalTrajectory& trajectory, const std::filesystem::path& path);

}  // namespace emwf
