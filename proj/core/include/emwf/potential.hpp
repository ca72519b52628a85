#pragma once

#include <memory>
#include <span>
#include <string>

#include "emwf/grid.hpp"
#include "emwf/multi_index.hpp"

namespace emwf {

// Derivative order reported by potentials whose derivatives are known in
// closed form to any order.
inline constexpr int kUnlimitedDerivativeOrder = 1 << 20;

// External potential V on configuration space. Implementations are immutable
// and safe to share between threads.
class Potential {
 public:
  virtual ~Potential() = default;

  // d^alpha V at the configuration-space point x; alpha = 0 is the value.
  virtual double derivative(std::span<const double> x, const MultiIndex& alpha) const = 0;
  virtual int max_derivative_order() const = 0;
  virtual std::string describe() const = 0;
  virtual bool is_free() const { return false; }

  double value(std::span<const double> x) const { return derivative(x, MultiIndex(x.size(), 0)); }

  // Values of d^alpha V on every lattice point.
  virtual RealField sample_derivative(const Grid& grid, const MultiIndex& alpha) const;
  RealField sample(const Grid& grid) const { return sample_derivative(grid, MultiIndex(grid.dims(), 0)); }
};

using PotentialPtr = std::shared_ptr<const Potential>;

PotentialPtr free_potential();
// V = k |x|^2 / 2.
PotentialPtr harmonic_potential(double stiffness);
// V = lambda * sum_a x_a^4.
PotentialPtr quartic_potential(double lambda);
// V = -depth * exp(-|x|^2 / (2 width^2)).
PotentialPtr gaussian_well(double depth, double width);
// Samples on a lattice. Derivatives come from spectral differentiation; a
// warning is issued for requested orders above 4.
PotentialPtr tabulated_potential(const Grid& grid, RealField samples);
// V(x1, x2) = pair(x1 - x2) + external(x1) + external(x2) with
// `axes_per_particle` axes per particle. Either part may be null.
PotentialPtr two_body_potential(PotentialPtr pair, PotentialPtr external, std::size_t axes_per_particle);

// -grad V sampled on the grid, one field per axis.
std::vector<RealField> force_fields(const Potential& v, const Grid& grid);

}  // namespace emwf
