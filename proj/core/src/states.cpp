#include "emwf/states.hpp"

#include <cmath>
#include <numbers>

#include "emwf/error.hpp"

namespace emwf {
namespace {

void require_axes(const Grid& grid, const std::vector<double>& v, const char* what) {
  if (v.size() != grid.dims())
    throw InvalidArgument(std::string(what) + " needs one entry per grid axis (" + std::to_string(grid.dims()) + ")");
}

double axis_mass(const Grid& grid, const Units& units, std::size_t axis) {
  const std::size_t per = grid.dims() / units.masses.size();
  return units.masses.at(axis / per);
}

// Normalized Hermite function phi_n(xi) via the stable three-term recurrence.
double hermite_function(int n, double xi) {
  double prev = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (n == 0) return prev;
  double cur = std::sqrt(2.0) * xi * prev;
  for (int k = 1; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

WaveFunction gaussian_state(const Grid& grid, const Units& units, const std::vector<double>& center,
                            const std::vector<double>& momentum, const std::vector<double>& sigma) {
  require_axes(grid, center, "gaussian center");
  require_axes(grid, momentum, "gaussian momentum");
  require_axes(grid, sigma, "gaussian width");
  for (double s : sigma)
    if (!(s > 0.0)) throw InvalidArgument("gaussian width must be positive");
  ComplexField amp(grid.size());
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    double log_mod = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < grid.dims(); ++a) {
      const double x = grid.coordinate(a, grid.axis_index(flat, a));
      const double u = x - center[a];
      log_mod -= u * u / (4.0 * sigma[a] * sigma[a]);
      phase += momentum[a] * x / units.hbar;
    }
    amp[flat] = std::polar(std::exp(log_mod), phase);
  }
  return normalize(WaveFunction(grid, std::move(amp), units));
}

WaveFunction harmonic_eigenstate(const Grid& grid, const Units& units, double omega, const std::vector<int>& quanta) {
  if (quanta.size() != grid.dims()) throw InvalidArgument("eigenstate needs one quantum number per axis");
  if (!(omega > 0.0)) throw InvalidArgument("oscillator frequency must be positive");
  std::vector<RealField> factors(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    if (quanta[a] < 0) throw InvalidArgument("quantum numbers must be nonnegative");
    const double length = std::sqrt(units.hbar / (axis_mass(grid, units, a) * omega));
    factors[a].resize(grid.points(a));
    for (std::size_t i = 0; i < grid.points(a); ++i)
      factors[a][i] = hermite_function(quanta[a], grid.coordinate(a, i) / length) / std::sqrt(length);
  }
  ComplexField amp(grid.size());
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    double v = 1.0;
    for (std::size_t a = 0; a < grid.dims(); ++a) v *= factors[a][grid.axis_index(flat, a)];
    amp[flat] = v;
  }
  return normalize(WaveFunction(grid, std::move(amp), units));
}

WaveFunction coherent_state(const Grid& grid, const Units& units, double omega, const std::vector<double>& displacement,
                            const std::vector<double>& momentum) {
  if (!(omega > 0.0)) throw InvalidArgument("oscillator frequency must be positive");
  std::vector<double> sigma(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a)
    sigma[a] = std::sqrt(units.hbar / (2.0 * axis_mass(grid, units, a) * omega));
  return gaussian_state(grid, units, displacement, momentum, sigma);
}

WaveFunction superposition(const std::vector<WaveFunction>& components, const std::vector<Complex>& coefficients) {
  if (components.empty()) throw InvalidArgument("superposition needs at least one component");
  if (components.size() != coefficients.size())
    throw InvalidArgument("superposition needs one coefficient per component");
  const Grid& g = components.front().grid();
  ComplexField amp(g.size(), Complex{0.0, 0.0});
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (!(components[c].grid() == g)) throw InvalidArgument("superposition components live on different grids");
    const auto& v = components[c].values();
    for (std::size_t i = 0; i < amp.size(); ++i) amp[i] += coefficients[c] * v[i];
  }
  return normalize(components.front().with_amplitudes(std::move(amp)));
}

WaveFunction product_state(const WaveFunction& first, const WaveFunction& second) {
  std::vector<double> extents(first.grid().extents());
  std::vector<std::size_t> points(first.grid().shape());
  extents.insert(extents.end(), second.grid().extents().begin(), second.grid().extents().end());
  points.insert(points.end(), second.grid().shape().begin(), second.grid().shape().end());
  Grid grid(extents, points);
  Units units = first.units();
  units.masses.insert(units.masses.end(), second.units().masses.begin(), second.units().masses.end());
  if (first.hbar() != second.hbar()) throw InvalidArgument("product of states with different hbar");
  const auto& a = first.values();
  const auto& b = second.values();
  ComplexField amp(grid.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) amp[i * b.size() + j] = a[i] * b[j];
  return WaveFunction(grid, std::move(amp), units, first.time());
}

WaveFunction entangled_pair(const WaveFunction& a, const WaveFunction& b) {
  const WaveFunction ab = product_state(a, b);
  const WaveFunction ba = product_state(b, a);
  return superposition({ab, ba}, {Complex{1.0, 0.0}, Complex{1.0, 0.0}});
}

Grid particle_grid(const Grid& combined, std::size_t particles, std::size_t particle) {
  if (particles == 0 || combined.dims() % particles != 0 || particle >= particles)
    throw InvalidArgument("cannot split grid into particle blocks");
  const std::size_t per = combined.dims() / particles;
  std::vector<double> extents(combined.extents().begin() + static_cast<long>(particle * per),
                              combined.extents().begin() + static_cast<long>((particle + 1) * per));
  std::vector<std::size_t> points(combined.shape().begin() + static_cast<long>(particle * per),
                                  combined.shape().begin() + static_cast<long>((particle + 1) * per));
  return Grid(extents, points);
}

}  // namespace emwf
