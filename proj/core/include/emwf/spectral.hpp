#pragma once

#include <functional>
#include <span>
#include <string>

#include "emwf/grid.hpp"
#include "emwf/multi_index.hpp"

namespace emwf {

// In-place unnormalized forward DFT (exp(-i k x)) over the whole grid.
void fft_forward(const Grid& grid, std::span<Complex> data);
// In-place inverse DFT including the 1/N factor.
void fft_inverse(const Grid& grid, std::span<Complex> data);
// In-place multi-dimensional transform of an arbitrary row-major shape.
// sign = -1 forward, +1 backward; unnormalized.
void fft_shape(const std::vector<std::size_t>& shape, std::span<Complex> data, int sign);

// Function of the momentum vector p (p_a = hbar * k_a on the lattice).
using MomentumSymbol = std::function<Complex(std::span<const double> momentum)>;

struct FourierMultiplier {
  MomentumSymbol symbol;
  std::string name;
};

// Evaluates the symbol on every lattice mode (FFT order). Throws
// InvalidArgument if any value is NaN or infinite.
ComplexField tabulate_symbol(const Grid& grid, double hbar, const MomentumSymbol& symbol);

// Multiplies the spectrum of `field` by a tabulated symbol and transforms back.
ComplexField apply_spectral_table(const Grid& grid, std::span<const Complex> field,
                                  std::span<const Complex> table);

WaveFunction apply_fourier_multiplier(const WaveFunction& psi, const FourierMultiplier& multiplier);

// Spectral partial derivative d^alpha. The Nyquist mode is dropped on axes
// where alpha is odd, so real fields stay real.
ComplexField spectral_derivative(const Grid& grid, std::span<const Complex> field, const MultiIndex& alpha);

ComplexField spectral_gradient(const WaveFunction& psi, std::size_t axis);

// |psi~(p)|^2 on the momentum lattice in FFT order, normalized so that
// sum rho_p * (2 pi hbar / L)^d equals the position-space squared norm.
RealField momentum_density(const WaveFunction& psi);

// Volume of one momentum-lattice cell, prod_a 2 pi hbar / L_a.
double momentum_cell_volume(const Grid& grid, double hbar);

// Maps centered index j (p ascending from -N/2) to the FFT slot.
inline std::size_t fft_slot_from_centered(std::size_t j, std::size_t n) { return (j + n / 2) % n; }

// Trigonometric interpolant of periodic samples, evaluable with derivatives
// anywhere in the box. The Nyquist mode uses its cosine form.
class BandLimitedField {
 public:
  BandLimitedField(const Grid& grid, std::span<const Complex> samples);

  Complex value(std::span<const double> x) const { return derivative(x, MultiIndex(grid_.dims(), 0)); }
  Complex derivative(std::span<const double> x, const MultiIndex& alpha) const;

  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  ComplexField spectrum_;
};

struct SampledField {
  Grid grid;
  ComplexField values;
};

// Band-limited refinement by zero padding: `factor` times more points per axis.
SampledField upsample(const Grid& grid, std::span<const Complex> field, std::size_t factor);

// Tensor-product Lagrange interpolation (stencil of `width` points per axis)
// on a periodic lattice, typically applied to an upsampled field.
class LocalInterpolator {
 public:
  LocalInterpolator(SampledField field, int width = 6);

  Complex operator()(std::span<const double> x) const;

  const Grid& grid() const { return field_.grid; }

 private:
  SampledField field_;
  int width_;
};

}  // namespace emwf
