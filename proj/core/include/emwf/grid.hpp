#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace emwf {

using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;
using RealField = std::vector<double>;

inline constexpr std::size_t kDefaultMaxGridPoints = std::size_t{1} << 24;

// Uniform periodic lattice on the box [-L_a/2, L_a/2) per axis, row-major with
// the last axis fastest. Momentum modes follow the FFT order, k in [-N/2, N/2).
class Grid {
 public:
  Grid(std::vector<double> extents, std::vector<std::size_t> points,
       std::size_t max_points = kDefaultMaxGridPoints);

  std::size_t dims() const { return points_.size(); }
  std::size_t size() const { return size_; }
  std::size_t points(std::size_t axis) const { return points_.at(axis); }
  double extent(std::size_t axis) const { return extents_.at(axis); }
  double spacing(std::size_t axis) const { return extents_.at(axis) / static_cast<double>(points_.at(axis)); }
  double cell_volume() const { return cell_volume_; }
  std::size_t stride(std::size_t axis) const { return strides_.at(axis); }
  const std::vector<std::size_t>& shape() const { return points_; }
  const std::vector<double>& extents() const { return extents_; }

  double coordinate(std::size_t axis, std::size_t i) const {
    return -0.5 * extents_[axis] + static_cast<double>(i) * spacing(axis);
  }
  std::vector<double> coordinates(std::size_t axis) const;

  // Signed mode number of FFT slot i: i for i < N/2, i - N otherwise.
  long signed_mode(std::size_t axis, std::size_t i) const {
    const auto n = static_cast<long>(points_[axis]);
    const auto k = static_cast<long>(i);
    return k < n / 2 ? k : k - n;
  }
  // Angular wavenumber 2*pi*k/L of FFT slot i; momentum is hbar times this.
  double wavenumber(std::size_t axis, std::size_t i) const;
  std::vector<double> wavenumbers(std::size_t axis) const;

  // Index along `axis` of flat position `flat`.
  std::size_t axis_index(std::size_t flat, std::size_t axis) const {
    return (flat / strides_[axis]) % points_[axis];
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_ && a.extents_ == b.extents_;
  }

 private:
  std::vector<double> extents_;
  std::vector<std::size_t> points_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
  double cell_volume_ = 1.0;
};

// Validating factory; `dims` must match the lengths of extents and points.
Grid make_grid(std::size_t dims, std::vector<double> extents, std::vector<std::size_t> points,
               std::size_t max_points = kDefaultMaxGridPoints);

// Physical constants of a state. Configuration-space axes are split evenly
// across particles: axis a belongs to particle a / (dims / particles).
struct Units {
  double hbar = 1.0;
  std::vector<double> masses{1.0};
  std::optional<double> c;

  std::size_t particles() const { return masses.size(); }
};

class WaveFunction {
 public:
  WaveFunction(Grid grid, ComplexField amplitudes, Units units = {}, double time = 0.0);

  const Grid& grid() const { return grid_; }
  const Units& units() const { return units_; }
  double time() const { return time_; }
  double hbar() const { return units_.hbar; }
  const ComplexField& values() const { return amplitudes_; }
  std::span<const Complex> amplitudes() const { return amplitudes_; }

  std::size_t particles() const { return units_.particles(); }
  std::size_t axes_per_particle() const { return grid_.dims() / units_.particles(); }
  std::size_t particle_of_axis(std::size_t axis) const { return axis / axes_per_particle(); }
  double mass(std::size_t axis) const { return units_.masses[particle_of_axis(axis)]; }

  // Riemann sum of |psi|^2 times the cell volume.
  double squared_norm() const;

  WaveFunction with_amplitudes(ComplexField amplitudes) const;
  WaveFunction with_time(double time) const;

 private:
  Grid grid_;
  ComplexField amplitudes_;
  Units units_;
  double time_;
};

WaveFunction normalize(const WaveFunction& psi);

// <psi|phi> = sum conj(psi) phi dV.
Complex inner_product(const WaveFunction& psi, const WaveFunction& phi);

// Largest |psi|^2 on the first and last lattice layer of every axis.
double boundary_density(const WaveFunction& psi);
double boundary_density(const Grid& grid, std::span<const double> rho);

// Thresholds of the boundary-leak monitor.
inline constexpr double kBoundaryWarnDensity = 1e-6;
inline constexpr double kBoundaryErrorDensity = 1e-3;

// Warns above kBoundaryWarnDensity and throws BoundaryLeak above
// kBoundaryErrorDensity. `context` names the caller in messages.
void check_boundary(const WaveFunction& psi, const char* context);
void check_boundary(const Grid& grid, std::span<const double> rho, double time, const char* context);

}  // namespace emwf
