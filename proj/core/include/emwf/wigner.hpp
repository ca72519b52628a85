#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "emwf/grid.hpp"
#include "emwf/moments.hpp"
#include "emwf/multi_index.hpp"

namespace emwf {

// W(x, p) on the position lattice times the FFT-conjugate momentum lattice.
// Momenta are stored in ascending (centered) order, row-major, last axis
// fastest; the flat index is x_flat * momentum_size() + p_flat.
// Normalization: sum W dx dp / (2 pi hbar)^d = 1.
// psi is taken periodic, so W carries image terms of size |psi(x +- L/4)|^2;
// both marginals are exact regardless.
struct WignerGrid {
  Grid position;
  std::vector<std::vector<double>> momenta;
  double hbar = 1.0;
  RealField values;
  // max |Im W| / max |W| before the real part was taken.
  double imaginary_residue = 0.0;

  std::size_t dims() const { return position.dims(); }
  std::size_t momentum_size() const;
  double momentum(std::size_t axis, std::size_t p_flat) const;
  double at(std::size_t x_flat, std::size_t p_flat) const { return values[x_flat * momentum_size() + p_flat]; }
  // dx dp / (2 pi hbar)^d for one phase-space cell.
  double cell_weight() const;
  double min_value() const;
};

inline constexpr std::size_t kMaxWignerDims = 2;

WignerGrid wigner_transform(const WaveFunction& psi, unsigned threads = 1);

// Sum of coefficient * x^position * p^momentum. With weyl_ordered == false the
// monomials stand for x^position p^momentum with every x to the left.
struct PhaseSpacePolynomial {
  using Monomial = std::pair<MultiIndex, MultiIndex>;
  std::map<Monomial, double> terms;
  bool weyl_ordered = true;

  static constexpr int kMaxDegree = 4;

  PhaseSpacePolynomial& add(const MultiIndex& position, const MultiIndex& momentum, double coefficient);
  static PhaseSpacePolynomial constant(std::size_t dims, double value);
  static PhaseSpacePolynomial monomial(const MultiIndex& position, const MultiIndex& momentum);
  int degree() const;
  std::size_t dims() const;
};

// For a standard-ordered polynomial this is the expectation of its Hermitian
// part; ordered_expectation returns the full complex value.
double wigner_expectation(const WignerGrid& w, const PhaseSpacePolynomial& poly);
Complex ordered_expectation(const WignerGrid& w, const PhaseSpacePolynomial& poly);

struct Marginals {
  RealField position;  // same layout as the position grid
  RealField momentum;  // centered order, sum * (2 pi hbar / L)^d = 1
};

Marginals marginals(const WignerGrid& w);

// sum W^2 dx dp / (2 pi hbar)^d; equals one for pure states.
double purity(const WignerGrid& w);

// Phase-space moments int int (x - center)^beta p^gamma W dx dp / (2 pi hbar)^d
// keyed by (gamma, beta) with |gamma| <= c_max, |beta| <= n_max.
struct WignerCoefficients {
  std::vector<double> center;
  int c_max = 0;
  int n_max = 0;
  std::map<std::pair<MultiIndex, MultiIndex>, Complex> table;

  double at(const MultiIndex& gamma, const MultiIndex& beta) const;
  double max_imaginary() const;
};

WignerCoefficients wigner_multipole_coefficients(const PairMoments& pairs, double hbar,
                                                 const std::vector<double>& center, int c_max, int n_max);
WignerCoefficients wigner_multipole_coefficients(const WaveFunction& psi, const std::vector<double>& center,
                                                 int c_max, int n_max);

// Mixed expectations <x^i p^j> and <p^j x^i> assembled from the center, the
// momentum monopole and the first momentum moments, next to their direct
// operator quadratures. Matrices are indexed [i][j].
struct CommutatorCheck {
  using Matrix = std::vector<std::vector<Complex>>;
  Matrix x_p;
  Matrix p_x;
  Matrix difference;
  Matrix direct_x_p;
  Matrix direct_p_x;
  double max_commutator_error = 0.0;  // |difference - i hbar delta|
  double max_direct_mismatch = 0.0;
};

CommutatorCheck commutator_check(const WaveFunction& psi, const MultipoleSet& multipoles);

// Flat binary using the snapshot header scheme: axes are the position axes
// followed by the momentum axes, extents the box and momentum-window widths.
void write_wigner_binary(const WignerGrid& w, const std::filesystem::path& path);
// Columns x.., p.., W keeping every `stride`-th point per axis.
void write_wigner_csv(const WignerGrid& w, const std::filesystem::path& path, std::size_t stride = 4);

}  // namespace emwf
