#include "emwf/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "emwf/error.hpp"
#include "emwf/parallel.hpp"
#include "emwf/record_io.hpp"
#include "emwf/spectral.hpp"

namespace emwf {
namespace {

constexpr std::size_t kMaxPhaseSpacePoints = std::size_t{1} << 25;

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

long floor_half(long m) { return m >= 0 ? m / 2 : -((-m + 1) / 2); }
long ceil_half(long m) { return -floor_half(-m); }

// psi(x + s dx / 2) for every corner s of {0, 1}^d, indexed by the bit mask of s.
// The Nyquist mode has no half-lattice value in its cosine form and is dropped.
std::vector<ComplexField> half_shifted_copies(const Grid& g, const ComplexField& psi) {
  const std::size_t d = g.dims();
  ComplexField spectrum(psi);
  fft_forward(g, spectrum);
  std::vector<ComplexField> out(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < out.size(); ++mask) {
    if (mask == 0) {
      out[0] = psi;
      continue;
    }
    ComplexField s(spectrum);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        if (!(mask >> a & 1u)) continue;
        const std::size_t slot = g.axis_index(i, a);
        const std::size_t n = g.points(a);
        if (n % 2 == 0 && slot == n / 2) {
          s[i] = 0.0;
          break;
        }
        s[i] *= std::polar(1.0, 0.5 * g.wavenumber(a, slot) * g.spacing(a));
      }
    }
    fft_inverse(g, s);
    out[mask] = std::move(s);
  }
  return out;
}

// Weyl-ordered integral of x^beta p^gamma against W.
double weyl_moment(const WignerGrid& w, const MultiIndex& beta, const MultiIndex& gamma) {
  const std::size_t d = w.dims();
  const std::size_t np = w.momentum_size();
  RealField pmono(np, 1.0);
  for (std::size_t k = 0; k < np; ++k)
    for (std::size_t a = 0; a < d; ++a) pmono[k] *= std::pow(w.momentum(a, k), gamma[a]);
  double total = 0.0;
  for (std::size_t i = 0; i < w.position.size(); ++i) {
    double xm = 1.0;
    for (std::size_t a = 0; a < d; ++a) xm *= std::pow(w.position.coordinate(a, w.position.axis_index(i, a)), beta[a]);
    if (xm == 0.0) continue;
    const double* row = &w.values[i * np];
    double s = 0.0;
    for (std::size_t k = 0; k < np; ++k) s += pmono[k] * row[k];
    total += xm * s;
  }
  return total * w.cell_weight();
}

void require_dims(const MultiIndex& a, std::size_t d) {
  if (a.size() != d) throw InvalidArgument("multi-index " + to_string(a) + " has wrong dimension");
  for (int e : a)
    if (e < 0) throw InvalidArgument("multi-index " + to_string(a) + " has a negative exponent");
}

}  // namespace

std::size_t WignerGrid::momentum_size() const {
  std::size_t n = 1;
  for (const auto& p : momenta) n *= p.size();
  return n;
}

double WignerGrid::momentum(std::size_t axis, std::size_t p_flat) const {
  std::size_t stride = 1;
  for (std::size_t a = momenta.size(); a-- > axis + 1;) stride *= momenta[a].size();
  return momenta[axis][(p_flat / stride) % momenta[axis].size()];
}

double WignerGrid::cell_weight() const { return 1.0 / static_cast<double>(position.size()); }

double WignerGrid::min_value() const { return *std::min_element(values.begin(), values.end()); }

WignerGrid wigner_transform(const WaveFunction& psi, unsigned threads) {
  const Grid& g = psi.grid();
  const std::size_t d = g.dims();
  if (d > kMaxWignerDims) throw InvalidArgument("Wigner transform supports 1D and 2D states only");
  if (std::abs(psi.squared_norm() - 1.0) > 1e-8) throw InvalidArgument("Wigner transform needs a normalized state");
  if (g.size() > kMaxPhaseSpacePoints / g.size()) throw InvalidArgument("phase-space lattice too large");

  WignerGrid w{g, {}, psi.hbar(), RealField(g.size() * g.size()), 0.0};
  for (std::size_t a = 0; a < d; ++a) {
    const std::size_t n = g.points(a);
    const double dp = psi.hbar() * 2.0 * std::numbers::pi / g.extent(a);
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = (static_cast<double>(j) - static_cast<double>(n / 2)) * dp;
    w.momenta.push_back(std::move(p));
  }

  const auto shifted = half_shifted_copies(g, psi.values());
  double dxv = 1.0;
  for (std::size_t a = 0; a < d; ++a) dxv *= g.spacing(a);
  const std::size_t n = g.size();
  std::vector<double> imag_max(n, 0.0);

  parallel_for(n, threads, [&](std::size_t x) {
    ComplexField f(n);
    std::vector<std::size_t> xi(d);
    for (std::size_t a = 0; a < d; ++a) xi[a] = g.axis_index(x, a);
    for (std::size_t slot = 0; slot < n; ++slot) {
      std::size_t mask = 0, lo = 0, hi = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const long m = g.signed_mode(a, g.axis_index(slot, a));
        if (m % 2 != 0) mask |= std::size_t{1} << a;
        const auto base = static_cast<long>(xi[a]);
        lo += wrap(base - ceil_half(m), g.points(a)) * g.stride(a);
        hi += wrap(base + floor_half(m), g.points(a)) * g.stride(a);
      }
      f[slot] = shifted[mask][lo] * std::conj(shifted[mask][hi]);
    }
    fft_shape(g.shape(), f, +1);
    double* row = &w.values[x * n];
    double im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t slot = 0;
      for (std::size_t a = 0; a < d; ++a)
        slot += fft_slot_from_centered(g.axis_index(k, a), g.points(a)) * g.stride(a);
      row[k] = f[slot].real() * dxv;
      im = std::max(im, std::abs(f[slot].imag()) * dxv);
    }
    imag_max[x] = im;
  });

  double wmax = 0.0;
  for (double v : w.values) wmax = std::max(wmax, std::abs(v));
  if (!std::isfinite(wmax)) throw NumericalFailure("non-finite Wigner function");
  w.imaginary_residue = *std::max_element(imag_max.begin(), imag_max.end()) / wmax;
  return w;
}

PhaseSpacePolynomial& PhaseSpacePolynomial::add(const MultiIndex& position, const MultiIndex& momentum,
                                                double coefficient) {
  if (position.size() != momentum.size()) throw InvalidArgument("position and momentum exponents differ in dimension");
  if (!terms.empty() && position.size() != dims()) throw InvalidArgument("polynomial terms differ in dimension");
  require_dims(position, position.size());
  require_dims(momentum, momentum.size());
  if (order(position) + order(momentum) > kMaxDegree)
    throw InvalidArgument("phase-space polynomial degree exceeds " + std::to_string(kMaxDegree));
  if (!std::isfinite(coefficient)) throw InvalidArgument("polynomial coefficient is not finite");
  terms[{position, momentum}] += coefficient;
  return *this;
}

PhaseSpacePolynomial PhaseSpacePolynomial::constant(std::size_t dims, double value) {
  PhaseSpacePolynomial p;
  p.add(MultiIndex(dims, 0), MultiIndex(dims, 0), value);
  return p;
}

PhaseSpacePolynomial PhaseSpacePolynomial::monomial(const MultiIndex& position, const MultiIndex& momentum) {
  PhaseSpacePolynomial p;
  p.add(position, momentum, 1.0);
  return p;
}

int PhaseSpacePolynomial::degree() const {
  int deg = 0;
  for (const auto& [mono, c] : terms) deg = std::max(deg, order(mono.first) + order(mono.second));
  return deg;
}

std::size_t PhaseSpacePolynomial::dims() const { return terms.empty() ? 0 : terms.begin()->first.first.size(); }

Complex ordered_expectation(const WignerGrid& w, const PhaseSpacePolynomial& poly) {
  if (poly.terms.empty()) return 0.0;
  const std::size_t d = w.dims();
  if (poly.dims() != d) throw InvalidArgument("polynomial dimension differs from the Wigner grid");
  Complex total = 0.0;
  const Complex half_ih{0.0, 0.5 * w.hbar};
  for (const auto& [mono, c] : poly.terms) {
    const auto& [beta, gamma] = mono;
    if (poly.weyl_ordered) {
      total += c * weyl_moment(w, beta, gamma);
      continue;
    }
    // x^beta p^gamma = sum_k (i hbar / 2)^|k| k! C(beta,k) C(gamma,k) {x^(beta-k) p^(gamma-k)}_Weyl
    MultiIndex lim(d);
    for (std::size_t a = 0; a < d; ++a) lim[a] = std::min(beta[a], gamma[a]);
    for (const auto& k : sub_indices(lim)) {
      const Complex f = std::pow(half_ih, order(k)) * factorial(k) * binomial(beta, k) * binomial(gamma, k);
      total += c * f * weyl_moment(w, subtract(beta, k), subtract(gamma, k));
    }
  }
  return total;
}

double wigner_expectation(const WignerGrid& w, const PhaseSpacePolynomial& poly) {
  return ordered_expectation(w, poly).real();
}

Marginals marginals(const WignerGrid& w) {
  const std::size_t nx = w.position.size();
  const std::size_t np = w.momentum_size();
  double dxv = 1.0, ldv = 1.0;
  for (std::size_t a = 0; a < w.dims(); ++a) {
    dxv *= w.position.spacing(a);
    ldv *= w.position.extent(a);
  }
  const double to_p = std::pow(2.0 * std::numbers::pi * w.hbar, -static_cast<double>(w.dims())) * dxv;
  Marginals m{RealField(nx, 0.0), RealField(np, 0.0)};
  for (std::size_t i = 0; i < nx; ++i) {
    const double* row = &w.values[i * np];
    double s = 0.0;
    for (std::size_t k = 0; k < np; ++k) {
      s += row[k];
      m.momentum[k] += row[k] * to_p;
    }
    m.position[i] = s / ldv;
  }
  return m;
}

double purity(const WignerGrid& w) {
  double s = 0.0;
  for (double v : w.values) s += v * v;
  return s * w.cell_weight();
}

double WignerCoefficients::at(const MultiIndex& gamma, const MultiIndex& beta) const {
  auto it = table.find({gamma, beta});
  if (it == table.end()) throw InvalidArgument("Wigner coefficient " + to_string(gamma) + "/" + to_string(beta) + " not computed");
  return it->second.real();
}

double WignerCoefficients::max_imaginary() const {
  double m = 0.0;
  for (const auto& [k, v] : table) m = std::max(m, std::abs(v.imag()));
  return m;
}

WignerCoefficients wigner_multipole_coefficients(const PairMoments& pairs, double hbar,
                                                 const std::vector<double>& center, int c_max, int n_max) {
  const std::size_t d = center.size();
  if (c_max < 0 || n_max < 0) throw InvalidArgument("coefficient orders must be nonnegative");
  WignerCoefficients out{center, c_max, n_max, {}};
  const Complex pref{0.0, -0.5 * hbar};
  for (const auto& gamma : indices_up_to(d, c_max)) {
    for (const auto& beta : indices_up_to(d, n_max)) {
      Complex s = 0.0;
      for (const auto& sigma : sub_indices(gamma)) {
        const MultiIndex rest = subtract(gamma, sigma);
        auto it = pairs.find({rest, sigma, beta});
        if (it == pairs.end())
          throw InvalidArgument("pair moment " + to_string(rest) + "|" + to_string(sigma) + "|" + to_string(beta) +
                                " missing");
        const double sign = order(rest) % 2 == 0 ? 1.0 : -1.0;
        s += sign * binomial(gamma, sigma) * it->second;
      }
      out.table[{gamma, beta}] = std::pow(pref, order(gamma)) * s;
    }
  }
  return out;
}

WignerCoefficients wigner_multipole_coefficients(const WaveFunction& psi, const std::vector<double>& center,
                                                 int c_max, int n_max) {
  return wigner_multipole_coefficients(derivative_pair_moments(psi, center, c_max, n_max), psi.hbar(), center, c_max,
                                       n_max);
}

CommutatorCheck commutator_check(const WaveFunction& psi, const MultipoleSet& m) {
  const Grid& g = psi.grid();
  const std::size_t d = g.dims();
  if (m.dims() != d) throw InvalidArgument("multipoles and state differ in dimension");
  if (m.order < 1) throw InvalidArgument("commutator check needs first momentum moments");
  const double hbar = psi.hbar();
  const Complex ih{0.0, hbar};
  const MultiIndex zero(d, 0);
  const auto zeros = [d] { return CommutatorCheck::Matrix(d, std::vector<Complex>(d, 0.0)); };
  CommutatorCheck out{zeros(), zeros(), zeros(), zeros(), zeros(), 0.0, 0.0};

  std::vector<ComplexField> grad(d);
  for (std::size_t j = 0; j < d; ++j) grad[j] = spectral_gradient(psi, j);
  const auto& v = psi.values();
  for (std::size_t i = 0; i < d; ++i) {
    ComplexField xpsi(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) xpsi[n] = g.coordinate(i, g.axis_index(n, i)) * v[n];
    for (std::size_t j = 0; j < d; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      // symmetrized part plus the ordering term
      const double sym = m.center[i] * m.momentum(j, zero) + m.momentum(j, unit_index(d, i));
      out.x_p[i][j] = sym + 0.5 * ih * delta;
      out.p_x[i][j] = sym - 0.5 * ih * delta;
      out.difference[i][j] = out.x_p[i][j] - out.p_x[i][j];
      out.max_commutator_error = std::max(out.max_commutator_error, std::abs(out.difference[i][j] - ih * delta));

      const ComplexField dxpsi = spectral_derivative(g, xpsi, unit_index(d, j));
      Complex xp = 0.0, px = 0.0;
      for (std::size_t n = 0; n < g.size(); ++n) {
        xp += std::conj(v[n]) * g.coordinate(i, g.axis_index(n, i)) * grad[j][n];
        px += std::conj(v[n]) * dxpsi[n];
      }
      out.direct_x_p[i][j] = -ih * xp * g.cell_volume();
      out.direct_p_x[i][j] = -ih * px * g.cell_volume();
      out.max_direct_mismatch =
          std::max({out.max_direct_mismatch, std::abs(out.direct_x_p[i][j] - out.x_p[i][j]),
                    std::abs(out.direct_p_x[i][j] - out.p_x[i][j])});
    }
  }
  return out;
}

void write_wigner_binary(const WignerGrid& w, const std::filesystem::path& path) {
  std::vector<double> extents(w.position.extents());
  std::vector<std::size_t> points(w.position.shape());
  for (std::size_t a = 0; a < w.dims(); ++a) {
    extents.push_back(static_cast<double>(w.momenta[a].size()) * 2.0 * std::numbers::pi * w.hbar / w.position.extent(a));
    points.push_back(w.momenta[a].size());
  }
  write_real_dump(path, Grid(extents, points, w.values.size()), w.values);
}

void write_wigner_csv(const WignerGrid& w, const std::filesystem::path& path, std::size_t stride) {
  if (stride == 0) throw InvalidArgument("CSV stride must be positive");
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string());
  const std::size_t d = w.dims();
  for (std::size_t a = 0; a < d; ++a) out << "x" << a << ",";
  for (std::size_t a = 0; a < d; ++a) out << "p" << a << ",";
  out << "W\n";
  const std::size_t np = w.momentum_size();
  std::vector<std::size_t> pshape;
  for (const auto& p : w.momenta) pshape.push_back(p.size());
  const auto kept = [&](std::size_t flat, const std::vector<std::size_t>& shape) {
    for (std::size_t a = shape.size(), s = 1; a-- > 0; s *= shape[a])
      if ((flat / s) % shape[a] % stride != 0) return false;
    return true;
  };
  for (std::size_t i = 0; i < w.position.size(); ++i) {
    if (!kept(i, w.position.shape())) continue;
    for (std::size_t k = 0; k < np; ++k) {
      if (!kept(k, pshape)) continue;
      for (std::size_t a = 0; a < d; ++a) out << format_number(w.position.coordinate(a, w.position.axis_index(i, a))) << ",";
      for (std::size_t a = 0; a < d; ++a) out << format_number(w.momentum(a, k)) << ",";
      out << format_number(w.at(i, k)) << "\n";
    }
  }
  if (!out) throw NumericalFailure("failed writing " + path.string());
}

}  // namespace emwf
