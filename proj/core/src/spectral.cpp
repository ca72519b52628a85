#include "emwf/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "emwf/error.hpp"

namespace emwf {
namespace {

constexpr double kSpectralNoiseFloor = 1e-14;

// FFTW plans for one shape and direction. Plans are created in place with
// FFTW_UNALIGNED and executed through the new-array interface, which is
// thread safe.
class Plan {
 public:
  Plan(const std::vector<std::size_t>& shape, int sign) {
    std::vector<int> n(shape.begin(), shape.end());
    std::size_t total = 1;
    for (auto s : shape) total *= s;
    std::vector<Complex> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    plan_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_) throw NumericalFailure("FFTW could not create a plan");
  }
  ~Plan() { fftw_destroy_plan(plan_); }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute(std::span<Complex> data) const {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_, buf, buf);
  }

 private:
  fftw_plan plan_ = nullptr;
};

const Plan& plan_for(const std::vector<std::size_t>& shape, int sign) {
  static std::mutex mutex;
  static std::map<std::pair<std::vector<std::size_t>, int>, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{shape, sign}];
  if (!slot) slot = std::make_unique<Plan>(shape, sign);
  return *slot;
}

std::size_t total_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

Complex ipow(double k, int q) {
  // (i k)^q
  static const Complex phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return phases[q % 4] * std::pow(k, q);
}

}  // namespace

void fft_shape(const std::vector<std::size_t>& shape, std::span<Complex> data, int sign) {
  if (data.size() != total_size(shape)) throw InvalidArgument("FFT buffer size does not match shape");
  plan_for(shape, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD).execute(data);
}

void fft_forward(const Grid& grid, std::span<Complex> data) { fft_shape(grid.shape(), data, -1); }

void fft_inverse(const Grid& grid, std::span<Complex> data) {
  fft_shape(grid.shape(), data, +1);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (Complex& z : data) z *= scale;
}

ComplexField tabulate_symbol(const Grid& grid, double hbar, const MomentumSymbol& symbol) {
  ComplexField table(grid.size());
  std::vector<double> p(grid.dims());
  std::vector<std::vector<double>> k(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) k[a] = grid.wavenumbers(a);
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    for (std::size_t a = 0; a < grid.dims(); ++a) p[a] = hbar * k[a][grid.axis_index(flat, a)];
    const Complex v = symbol(p);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw InvalidArgument("Fourier multiplier symbol is not finite on the momentum lattice");
    table[flat] = v;
  }
  return table;
}

ComplexField apply_spectral_table(const Grid& grid, std::span<const Complex> field, std::span<const Complex> table) {
  if (field.size() != grid.size() || table.size() != grid.size())
    throw InvalidArgument("spectral table does not match grid");
  ComplexField work(field.begin(), field.end());
  fft_forward(grid, work);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= table[i];
  fft_inverse(grid, work);
  return work;
}

WaveFunction apply_fourier_multiplier(const WaveFunction& psi, const FourierMultiplier& multiplier) {
  const ComplexField table = tabulate_symbol(psi.grid(), psi.hbar(), multiplier.symbol);
  return psi.with_amplitudes(apply_spectral_table(psi.grid(), psi.values(), table));
}

ComplexField spectral_derivative(const Grid& grid, std::span<const Complex> field, const MultiIndex& alpha) {
  if (alpha.size() != grid.dims()) throw InvalidArgument("derivative multi-index does not match grid dimension");
  if (field.size() != grid.size()) throw InvalidArgument("field does not match grid");
  if (order(alpha) == 0) return ComplexField(field.begin(), field.end());

  std::vector<ComplexField> factors(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    const std::size_t n = grid.points(a);
    factors[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool nyquist = grid.signed_mode(a, i) == -static_cast<long>(n / 2);
      factors[a][i] = (nyquist && alpha[a] % 2 == 1) ? Complex{0.0, 0.0} : ipow(grid.wavenumber(a, i), alpha[a]);
    }
  }
  ComplexField work(field.begin(), field.end());
  fft_forward(grid, work);
  for (std::size_t flat = 0; flat < work.size(); ++flat) {
    Complex f{1.0, 0.0};
    for (std::size_t a = 0; a < grid.dims(); ++a)
      if (alpha[a]) f *= factors[a][grid.axis_index(flat, a)];
    work[flat] *= f;
  }
  fft_inverse(grid, work);
  return work;
}

ComplexField spectral_gradient(const WaveFunction& psi, std::size_t axis) {
  if (axis >= psi.grid().dims())
    throw InvalidArgument("gradient axis " + std::to_string(axis) + " out of range");
  return spectral_derivative(psi.grid(), psi.values(), unit_index(psi.grid().dims(), axis));
}

double momentum_cell_volume(const Grid& grid, double hbar) {
  double v = 1.0;
  for (std::size_t a = 0; a < grid.dims(); ++a) v *= 2.0 * std::numbers::pi * hbar / grid.extent(a);
  return v;
}

RealField momentum_density(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  ComplexField work(psi.values());
  fft_forward(g, work);
  // |psi~|^2 = dV^2 / (2 pi hbar)^d |DFT|^2
  const double scale = g.cell_volume() * g.cell_volume() / std::pow(2.0 * std::numbers::pi * psi.hbar(), g.dims());
  RealField rho(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) rho[i] = scale * std::norm(work[i]);
  return rho;
}

BandLimitedField::BandLimitedField(const Grid& grid, std::span<const Complex> samples)
    : grid_(grid), spectrum_(samples.begin(), samples.end()) {
  if (samples.size() != grid.size()) throw InvalidArgument("samples do not match grid");
  fft_forward(grid_, spectrum_);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  double peak = 0.0;
  for (Complex& z : spectrum_) peak = std::max(peak, std::abs(z *= scale));
  // modes at the transform's roundoff floor carry no signal; derivatives would amplify them
  for (Complex& z : spectrum_)
    if (std::abs(z) < kSpectralNoiseFloor * peak) z = 0.0;
}

Complex BandLimitedField::derivative(std::span<const double> x, const MultiIndex& alpha) const {
  if (x.size() != grid_.dims() || alpha.size() != grid_.dims())
    throw InvalidArgument("evaluation point does not match grid dimension");
  std::vector<ComplexField> basis(grid_.dims());
  for (std::size_t a = 0; a < grid_.dims(); ++a) {
    const std::size_t n = grid_.points(a);
    const double u = x[a] - grid_.coordinate(a, 0);
    basis[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = grid_.wavenumber(a, i);
      if (grid_.signed_mode(a, i) == -static_cast<long>(n / 2)) {
        // d^q/du^q cos(k u) = |k|^q cos(k u + q pi / 2) with k -> |k| (cos is even)
        const double kk = std::abs(k);
        basis[a][i] = std::pow(kk, alpha[a]) * std::cos(kk * u + alpha[a] * std::numbers::pi / 2.0);
      } else {
        basis[a][i] = ipow(k, alpha[a]) * std::polar(1.0, k * u);
      }
    }
  }
  Complex sum{0.0, 0.0};
  for (std::size_t flat = 0; flat < spectrum_.size(); ++flat) {
    Complex term = spectrum_[flat];
    for (std::size_t a = 0; a < grid_.dims(); ++a) term *= basis[a][grid_.axis_index(flat, a)];
    sum += term;
  }
  return sum;
}

SampledField upsample(const Grid& grid, std::span<const Complex> field, std::size_t factor) {
  if (factor == 0 || (factor & (factor - 1)) != 0) throw InvalidArgument("upsampling factor must be a power of two");
  std::vector<std::size_t> fine_points(grid.shape());
  for (auto& n : fine_points) n *= factor;
  Grid fine(grid.extents(), fine_points, std::numeric_limits<std::size_t>::max());
  if (factor == 1) return {fine, ComplexField(field.begin(), field.end())};

  ComplexField coarse(field.begin(), field.end());
  fft_forward(grid, coarse);
  ComplexField out(fine.size(), Complex{0.0, 0.0});
  const double scale = static_cast<double>(fine.size()) / static_cast<double>(grid.size());

  std::vector<std::vector<std::pair<std::size_t, double>>> targets(grid.dims());
  for (std::size_t flat = 0; flat < coarse.size(); ++flat) {
    for (std::size_t a = 0; a < grid.dims(); ++a) {
      const auto n = static_cast<long>(grid.points(a));
      const auto nf = static_cast<long>(fine.points(a));
      const long m = grid.signed_mode(a, grid.axis_index(flat, a));
      targets[a].clear();
      if (m == -n / 2) {
        targets[a].push_back({static_cast<std::size_t>((m + nf) % nf), 0.5});
        targets[a].push_back({static_cast<std::size_t>(-m), 0.5});
      } else {
        targets[a].push_back({static_cast<std::size_t>((m + nf) % nf), 1.0});
      }
    }
    // Cartesian product of the per-axis targets.
    std::size_t combos = 1;
    for (const auto& t : targets) combos *= t.size();
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rem = c;
      std::size_t idx = 0;
      double w = scale;
      for (std::size_t a = 0; a < grid.dims(); ++a) {
        const auto& [slot, weight] = targets[a][rem % targets[a].size()];
        rem /= targets[a].size();
        idx += slot * fine.stride(a);
        w *= weight;
      }
      out[idx] += w * coarse[flat];
    }
  }
  fft_inverse(fine, out);
  return {fine, std::move(out)};
}

LocalInterpolator::LocalInterpolator(SampledField field, int width) : field_(std::move(field)), width_(width) {
  if (width_ < 2 || width_ % 2 != 0) throw InvalidArgument("interpolation stencil width must be even and >= 2");
}

Complex LocalInterpolator::operator()(std::span<const double> x) const {
  const Grid& g = field_.grid;
  const std::size_t d = g.dims();
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double h = g.spacing(a);
    const auto n = static_cast<long>(g.points(a));
    const double s = (x[a] - g.coordinate(a, 0)) / h;
    const long base = static_cast<long>(std::floor(s)) - (width_ / 2 - 1);
    stencil[a].resize(static_cast<std::size_t>(width_));
    for (int j = 0; j < width_; ++j) {
      double w = 1.0;
      const double node = static_cast<double>(base + j);
      for (int l = 0; l < width_; ++l)
        if (l != j) w *= (s - static_cast<double>(base + l)) / (node - static_cast<double>(base + l));
      const long wrapped = ((base + j) % n + n) % n;
      stencil[a][static_cast<std::size_t>(j)] = {static_cast<std::size_t>(wrapped), w};
    }
  }
  Complex sum{0.0, 0.0};
  std::vector<std::size_t> pick(d, 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(width_, static_cast<double>(d)));
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t rem = t;
    std::size_t idx = 0;
    double w = 1.0;
    for (std::size_t a = d; a-- > 0;) {
      const std::size_t j = rem % static_cast<std::size_t>(width_);
      rem /= static_cast<std::size_t>(width_);
      idx += stencil[a][j].first * g.stride(a);
      w *= stencil[a][j].second;
    }
    sum += w * field_.values[idx];
  }
  return sum;
}

}  // namespace emwf
