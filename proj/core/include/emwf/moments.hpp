#pragma once

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "emwf/grid.hpp"
#include "emwf/multi_index.hpp"

namespace emwf {

struct TrajectoryRecord;

inline constexpr int kMaxMomentOrder = 8;
inline constexpr int kMaxPairOrder = 4;

// rho = |psi|^2 and the momentum density j^r = hbar Im(psi* d_r psi), so that
// the integral of j is <p>.
struct DensityField {
  Grid grid;
  RealField rho;
  std::vector<RealField> current;
};

DensityField density(const WaveFunction& psi);

// <x> and <p>. Both throw BoundaryLeak when the density reaches the box edge.
std::vector<double> position_expectation(const WaveFunction& psi);
std::vector<double> momentum_expectation(const WaveFunction& psi);

// Key of an integral  int (x - c)^position  d^conj psi*  d^psi psi  dV.
struct PairKey {
  MultiIndex conj;
  MultiIndex psi;
  MultiIndex position;
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};
using PairMoments = std::map<PairKey, Complex>;

// Central moments about `center` up to `order`. Multi-indices are exponent
// vectors, so every tensor is symmetric by construction.
struct MultipoleSet {
  std::vector<double> center;
  int order = 0;
  std::map<MultiIndex, double> density_moments;
  std::map<std::pair<std::size_t, MultiIndex>, double> momentum_moments;
  std::optional<PairMoments> pair_moments;

  std::size_t dims() const { return center.size(); }
  double density(const MultiIndex& alpha) const;
  double momentum(std::size_t component, const MultiIndex& alpha) const;
  Complex pair(const PairKey& key) const;
  // Order-2 density moments as a dims x dims matrix.
  std::vector<std::vector<double>> covariance() const;
};

MultipoleSet central_moments(const DensityField& field, const std::vector<double>& center, int order,
                             int order_cap = kMaxMomentOrder);

// Checks the monopole (= 1 within `tol`) and positive semidefiniteness of the
// covariance; throws NumericalFailure on violation.
void check_multipoles(const MultipoleSet& m, double tol = 1e-9);

// Every integral of d^conj psi* d^psi psi (x - center)^beta with
// |conj| + |psi| <= c_max and |beta| <= position_order.
PairMoments derivative_pair_moments(const WaveFunction& psi, const std::vector<double>& center, int c_max,
                                    int position_order = 0);

struct Uncertainties {
  std::vector<double> dx;
  std::vector<double> dp;
};

// Requires multipoles about <x> with order >= 2 and pair moments up to c = 2.
Uncertainties uncertainties(const WaveFunction& psi, const MultipoleSet& multipoles);

struct AngularMomentum {
  std::array<double, 3> expectation{};
  std::array<double, 3> classical{};
  std::array<double, 3> residual{};
};

// <L> = x_c x <p> + antisymmetric part of the momentum dipole, for 3D states.
AngularMomentum angular_momentum_expectation(const WaveFunction& psi, const MultipoleSet& multipoles);

// Density and momentum moments about <x> at every snapshot of a record.
std::vector<MultipoleSet> record_multipoles(const TrajectoryRecord& record, int order, unsigned threads = 1);

}  // namespace emwf
