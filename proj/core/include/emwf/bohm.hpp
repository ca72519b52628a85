#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "emwf/grid.hpp"
#include "emwf/moments.hpp"
#include "emwf/potential.hpp"
#include "emwf/record.hpp"

namespace emwf {

inline constexpr double kDefaultNodeFraction = 1e-10;

// Polar-form fields of one snapshot. Points with rho < node_threshold are
// masked; velocity and quantum potential are zero there.
struct PilotWaveFields {
  Grid grid;
  double time = 0.0;
  RealField sqrt_density;
  std::vector<RealField> velocity;
  RealField quantum_potential;
  std::vector<unsigned char> node_mask;
  double node_threshold = 0.0;

  bool on_node(std::size_t i) const { return node_mask[i] != 0; }
};

// v_B = j / (m rho) and Q = -sum_a hbar^2/(2 m_a) d_a^2 sqrt(rho) / sqrt(rho),
// the latter through Re(d^2 psi / psi) + Im(d psi / psi)^2.
PilotWaveFields pilot_fields(const WaveFunction& psi, double node_fraction = kDefaultNodeFraction);

// (hbar / m) Im(grad psi / psi); NaN on nodes.
std::vector<RealField> log_derivative_velocity(const WaveFunction& psi, double node_fraction = kDefaultNodeFraction);

struct BohmOptions {
  std::size_t upsample = 4;
  int stencil = 6;
  double node_fraction = kDefaultNodeFraction;
  unsigned threads = 1;
  // Warn when v_B at a trajectory point changes by more than this fraction
  // of the bundle speed scale between saved times.
  double velocity_change_warning = 0.1;
};

// positions[seed][k] is the position at times[k]; a truncated trajectory
// stops at the last time before it entered the node mask.
struct BohmBundle {
  std::vector<double> times;
  std::vector<std::vector<std::vector<double>>> positions;
  std::vector<unsigned char> truncated;
  std::vector<double> truncated_at;
  bool order_preserved = true;
  double max_relative_velocity_change = 0.0;

  std::size_t seeds() const { return positions.size(); }
  std::size_t completed() const;
  // Final positions of the trajectories that reached the last time.
  std::vector<std::vector<double>> final_positions() const;
};

// RK4 on the saved times; the half-step field is the cubic Lagrange
// interpolant in time of v_B evaluated at the stage point. Needs every
// snapshot of the record.
BohmBundle integrate_bohm_trajectories(const TrajectoryRecord& record, const std::vector<std::vector<double>>& seeds,
                                       const BohmOptions& options = {});

// `count` points uniform in the box [lo, hi).
std::vector<std::vector<double>> seed_uniform(const std::vector<double>& lo, const std::vector<double>& hi,
                                              std::size_t count, std::uint64_t seed);
// Density-weighted seeds. In 1D the inverse of the piecewise-linear CDF is
// applied to stratified levels (k + 1/2)/count, or to uniform draws when a
// seed is given. Higher dimensions pick a cell by mass and jitter inside it.
std::vector<std::vector<double>> seed_from_density(const WaveFunction& psi, std::size_t count,
                                                   std::optional<std::uint64_t> seed = std::nullopt);

struct EquivarianceReport {
  double tv_distance = 0.0;
  std::size_t samples = 0;
  std::size_t lost = 0;
  RealField histogram;
  RealField expected;
};

// Total-variation distance between the histogram of final bundle positions
// and the bin masses of |psi|^2 over `bins` equal cells of [lo, hi) (1D).
// Truncated trajectories count as misplaced mass.
EquivarianceReport equivariance_check(const BohmBundle& bundle, const WaveFunction& final_state, std::size_t bins,
                                      double lo, double hi);

struct EulerResidual {
  double stride = 0.0;
  std::vector<double> times;
  std::vector<double> max_residual;
  double overall_max = 0.0;
};

// m_a (d_t + v.grad) v_a + d_a (V + Q) at interior saved times, maximized
// over points with rho >= evaluation_fraction * max rho. Time derivatives are
// central differences of neighbouring snapshots.
EulerResidual euler_residual(const TrajectoryRecord& record, const Potential& v, double evaluation_fraction = 1e-6);

struct MonopoleRelation {
  std::vector<double> momentum;
  std::vector<double> bohm_momentum;
  // partial_sums[n][r]: sum over |alpha| <= n of mu_alpha / alpha! d^alpha (m v_r)
  std::vector<std::vector<double>> partial_sums;
  // remainder[n] = max_r |<p_r> - partial_sums[n][r]|
  std::vector<double> remainder;
};

MonopoleRelation monopole_relation_check(const WaveFunction& psi, const MultipoleSet& multipoles, int order,
                                         double node_fraction = kDefaultNodeFraction);

// seed_id,t,x.. rows in seed order.
void write_bohm_trajectories(const BohmBundle& bundle, const std::filesystem::path& path);
void write_pilot_fields(const PilotWaveFields& fields, const std::filesystem::path& dir);

}  // namespace emwf
