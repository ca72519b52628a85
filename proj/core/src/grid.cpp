#include "emwf/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "emwf/diagnostics.hpp"
#include "emwf/error.hpp"

namespace emwf {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(std::vector<double> extents, std::vector<std::size_t> points, std::size_t max_points)
    : extents_(std::move(extents)), points_(std::move(points)) {
  if (points_.empty()) throw InvalidArgument("grid needs at least one axis");
  if (points_.size() != extents_.size())
    throw InvalidArgument("grid extents and point counts differ in length");
  for (std::size_t a = 0; a < points_.size(); ++a) {
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a]))
      throw InvalidArgument("grid extent on axis " + std::to_string(a) + " must be positive");
    if (!is_power_of_two(points_[a]))
      throw InvalidArgument("grid points on axis " + std::to_string(a) + " (" + std::to_string(points_[a]) +
                            ") is not a power of two");
    if (points_[a] < 8)
      throw InvalidArgument("grid points on axis " + std::to_string(a) + " must be at least 8");
    if (size_ > max_points / points_[a])
      throw InvalidArgument("grid exceeds the configured cap of " + std::to_string(max_points) + " points");
    size_ *= points_[a];
    cell_volume_ *= spacing(a);
  }
  strides_.assign(points_.size(), 1);
  for (std::size_t a = points_.size() - 1; a > 0; --a) strides_[a - 1] = strides_[a] * points_[a];
}

std::vector<double> Grid::coordinates(std::size_t axis) const {
  std::vector<double> x(points_.at(axis));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = coordinate(axis, i);
  return x;
}

double Grid::wavenumber(std::size_t axis, std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(signed_mode(axis, i)) / extents_[axis];
}

std::vector<double> Grid::wavenumbers(std::size_t axis) const {
  std::vector<double> k(points_.at(axis));
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = wavenumber(axis, i);
  return k;
}

Grid make_grid(std::size_t dims, std::vector<double> extents, std::vector<std::size_t> points,
               std::size_t max_points) {
  if (dims < 1 || dims > 6) throw InvalidArgument("grid dimension must be between 1 and 6");
  if (extents.size() != dims || points.size() != dims)
    throw InvalidArgument("grid specification does not match dimension " + std::to_string(dims));
  return Grid(std::move(extents), std::move(points), max_points);
}

WaveFunction::WaveFunction(Grid grid, ComplexField amplitudes, Units units, double time)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), units_(std::move(units)), time_(time) {
  if (amplitudes_.size() != grid_.size()) throw InvalidArgument("amplitude count does not match grid size");
  if (!(units_.hbar > 0.0)) throw InvalidArgument("hbar must be positive");
  if (units_.masses.empty()) throw InvalidArgument("at least one particle mass is required");
  for (double m : units_.masses)
    if (!(m > 0.0)) throw InvalidArgument("particle masses must be positive");
  if (grid_.dims() % units_.masses.size() != 0)
    throw InvalidArgument("grid dimension is not divisible by the particle count");
  if (units_.c && !(*units_.c > 0.0)) throw InvalidArgument("speed of light must be positive");
  for (const Complex& z : amplitudes_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalFailure("wave function has non-finite amplitudes");
}

double WaveFunction::squared_norm() const {
  double s = 0.0;
  for (const Complex& z : amplitudes_) s += std::norm(z);
  return s * grid_.cell_volume();
}

WaveFunction WaveFunction::with_amplitudes(ComplexField amplitudes) const {
  return WaveFunction(grid_, std::move(amplitudes), units_, time_);
}

WaveFunction WaveFunction::with_time(double time) const {
  WaveFunction copy(*this);
  copy.time_ = time;
  return copy;
}

WaveFunction normalize(const WaveFunction& psi) {
  const double n2 = psi.squared_norm();
  if (!(n2 > 0.0)) throw DegenerateState("cannot normalize a zero wave function");
  const double scale = 1.0 / std::sqrt(n2);
  ComplexField out(psi.values());
  for (Complex& z : out) z *= scale;
  return psi.with_amplitudes(std::move(out));
}

Complex inner_product(const WaveFunction& psi, const WaveFunction& phi) {
  if (!(psi.grid() == phi.grid())) throw InvalidArgument("inner product of states on different grids");
  Complex s{0.0, 0.0};
  const auto& a = psi.values();
  const auto& b = phi.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * psi.grid().cell_volume();
}

double boundary_density(const Grid& grid, std::span<const double> rho) {
  double worst = 0.0;
  for (std::size_t flat = 0; flat < rho.size(); ++flat) {
    for (std::size_t a = 0; a < grid.dims(); ++a) {
      const std::size_t i = grid.axis_index(flat, a);
      if (i == 0 || i + 1 == grid.points(a)) {
        worst = std::max(worst, rho[flat]);
        break;
      }
    }
  }
  return worst;
}

double boundary_density(const WaveFunction& psi) {
  RealField rho(psi.values().size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values()[i]);
  return boundary_density(psi.grid(), rho);
}

void check_boundary(const Grid& grid, std::span<const double> rho, double time, const char* context) {
  const double b = boundary_density(grid, rho);
  if (b > kBoundaryErrorDensity) {
    std::ostringstream msg;
    msg << context << ": boundary density " << b << " exceeds " << kBoundaryErrorDensity
        << " (state wraps around the periodic box)";
    throw BoundaryLeak(msg.str(), b);
  }
  if (b > kBoundaryWarnDensity) {
    std::ostringstream msg;
    msg << context << ": boundary density " << b << " exceeds " << kBoundaryWarnDensity << " at t=" << time;
    warn(msg.str());
  }
}

void check_boundary(const WaveFunction& psi, const char* context) {
  RealField rho(psi.values().size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values()[i]);
  check_boundary(psi.grid(), rho, psi.time(), context);
}

}  // namespace emwf
