#include "emwf/potential.hpp"

#include <cmath>
#include <sstream>

#include "emwf/diagnostics.hpp"
#include "emwf/error.hpp"
#include "emwf/spectral.hpp"

namespace emwf {

RealField Potential::sample_derivative(const Grid& grid, const MultiIndex& alpha) const {
  RealField out(grid.size());
  std::vector<double> x(grid.dims());
  for (std::size_t flat = 0; flat < grid.size(); ++flat) {
    for (std::size_t a = 0; a < grid.dims(); ++a) x[a] = grid.coordinate(a, grid.axis_index(flat, a));
    out[flat] = derivative(x, alpha);
  }
  return out;
}

namespace {

class FreePotential final : public Potential {
 public:
  double derivative(std::span<const double>, const MultiIndex&) const override { return 0.0; }
  int max_derivative_order() const override { return kUnlimitedDerivativeOrder; }
  std::string describe() const override { return "free"; }
  bool is_free() const override { return true; }
};

class HarmonicPotential final : public Potential {
 public:
  explicit HarmonicPotential(double k) : k_(k) {}
  double derivative(std::span<const double> x, const MultiIndex& alpha) const override {
    const int n = order(alpha);
    if (n == 0) {
      double r2 = 0.0;
      for (double xi : x) r2 += xi * xi;
      return 0.5 * k_ * r2;
    }
    for (std::size_t a = 0; a < alpha.size(); ++a) {
      if (alpha[a] == n) {
        if (n == 1) return k_ * x[a];
        if (n == 2) return k_;
        return 0.0;
      }
    }
    return 0.0;
  }
  int max_derivative_order() const override { return kUnlimitedDerivativeOrder; }
  std::string describe() const override {
    std::ostringstream s;
    s << "harmonic(k=" << k_ << ")";
    return s.str();
  }

 private:
  double k_;
};

class QuarticPotential final : public Potential {
 public:
  explicit QuarticPotential(double lambda) : lambda_(lambda) {}
  double derivative(std::span<const double> x, const MultiIndex& alpha) const override {
    const int n = order(alpha);
    if (n == 0) {
      double s = 0.0;
      for (double xi : x) s += xi * xi * xi * xi;
      return lambda_ * s;
    }
    for (std::size_t a = 0; a < alpha.size(); ++a) {
      if (alpha[a] != n) continue;
      const double u = x[a];
      switch (n) {
        case 1: return 4.0 * lambda_ * u * u * u;
        case 2: return 12.0 * lambda_ * u * u;
        case 3: return 24.0 * lambda_ * u;
        case 4: return 24.0 * lambda_;
        default: return 0.0;
      }
    }
    return 0.0;
  }
  int max_derivative_order() const override { return kUnlimitedDerivativeOrder; }
  std::string describe() const override {
    std::ostringstream s;
    s << "quartic(lambda=" << lambda_ << ")";
    return s.str();
  }

 private:
  double lambda_;
};

// d^q/du^q exp(-u^2 / (2 w^2)) = (-1/(w sqrt 2))^q H_q(u / (w sqrt 2)) exp(...)
double gaussian_derivative(double u, double w, int q) {
  const double s = w * std::sqrt(2.0);
  const double t = u / s;
  double h_prev = 1.0;
  double h = 2.0 * t;
  if (q == 0) h = 1.0;
  for (int n = 1; n < q; ++n) {
    const double next = 2.0 * t * h - 2.0 * n * h_prev;
    h_prev = h;
    h = next;
  }
  return std::pow(-1.0 / s, q) * h * std::exp(-t * t);
}

class GaussianWell final : public Potential {
 public:
  GaussianWell(double depth, double width) : depth_(depth), width_(width) {}
  double derivative(std::span<const double> x, const MultiIndex& alpha) const override {
    double v = -depth_;
    for (std::size_t a = 0; a < x.size(); ++a) v *= gaussian_derivative(x[a], width_, alpha[a]);
    return v;
  }
  int max_derivative_order() const override { return kUnlimitedDerivativeOrder; }
  std::string describe() const override {
    std::ostringstream s;
    s << "gaussian-well(depth=" << depth_ << ", width=" << width_ << ")";
    return s.str();
  }

 private:
  double depth_;
  double width_;
};

class TabulatedPotential final : public Potential {
 public:
  TabulatedPotential(const Grid& grid, RealField samples)
      : grid_(grid), samples_(std::move(samples)), field_(grid, to_complex(samples_)) {}

  double derivative(std::span<const double> x, const MultiIndex& alpha) const override {
    note_order(alpha);
    return field_.derivative(x, alpha).real();
  }
  int max_derivative_order() const override { return 8; }
  std::string describe() const override { return "tabulated"; }

  RealField sample_derivative(const Grid& grid, const MultiIndex& alpha) const override {
    if (!(grid == grid_)) return Potential::sample_derivative(grid, alpha);
    note_order(alpha);
    if (order(alpha) == 0) return samples_;
    const ComplexField d = spectral_derivative(grid_, to_complex(samples_), alpha);
    RealField out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].real();
    return out;
  }

 private:
  static ComplexField to_complex(const RealField& r) { return ComplexField(r.begin(), r.end()); }
  static void note_order(const MultiIndex& alpha) {
    if (order(alpha) > 4)
      warn("spectral derivative of order " + std::to_string(order(alpha)) +
           " of a tabulated potential may be inaccurate");
  }

  Grid grid_;
  RealField samples_;
  BandLimitedField field_;
};

class TwoBodyPotential final : public Potential {
 public:
  TwoBodyPotential(PotentialPtr pair, PotentialPtr external, std::size_t per)
      : pair_(std::move(pair)), external_(std::move(external)), per_(per) {}

  double derivative(std::span<const double> x, const MultiIndex& alpha) const override {
    if (x.size() != 2 * per_) throw InvalidArgument("two-body potential evaluated off its configuration space");
    const MultiIndex a1(alpha.begin(), alpha.begin() + static_cast<long>(per_));
    const MultiIndex a2(alpha.begin() + static_cast<long>(per_), alpha.end());
    const auto x1 = x.subspan(0, per_);
    const auto x2 = x.subspan(per_, per_);
    double v = 0.0;
    if (pair_) {
      std::vector<double> rel(per_);
      for (std::size_t a = 0; a < per_; ++a) rel[a] = x1[a] - x2[a];
      const double sign = order(a2) % 2 == 0 ? 1.0 : -1.0;
      v += sign * pair_->derivative(rel, add(a1, a2));
    }
    if (external_) {
      if (order(a2) == 0) v += external_->derivative(x1, a1);
      if (order(a1) == 0) v += external_->derivative(x2, a2);
    }
    return v;
  }
  int max_derivative_order() const override {
    int n = kUnlimitedDerivativeOrder;
    if (pair_) n = std::min(n, pair_->max_derivative_order());
    if (external_) n = std::min(n, external_->max_derivative_order());
    return n;
  }
  std::string describe() const override {
    return "two-body(pair=" + (pair_ ? pair_->describe() : std::string("none")) +
           ", external=" + (external_ ? external_->describe() : std::string("none")) + ")";
  }
  bool is_free() const override { return (!pair_ || pair_->is_free()) && (!external_ || external_->is_free()); }

 private:
  PotentialPtr pair_;
  PotentialPtr external_;
  std::size_t per_;
};

}  // namespace

PotentialPtr free_potential() { return std::make_shared<FreePotential>(); }

PotentialPtr harmonic_potential(double stiffness) {
  if (!std::isfinite(stiffness)) throw InvalidArgument("harmonic stiffness must be finite");
  return std::make_shared<HarmonicPotential>(stiffness);
}

PotentialPtr quartic_potential(double lambda) {
  if (!std::isfinite(lambda)) throw InvalidArgument("quartic coupling must be finite");
  return std::make_shared<QuarticPotential>(lambda);
}

PotentialPtr gaussian_well(double depth, double width) {
  if (!(width > 0.0) || !std::isfinite(depth)) throw InvalidArgument("gaussian well needs finite depth and width > 0");
  return std::make_shared<GaussianWell>(depth, width);
}

PotentialPtr tabulated_potential(const Grid& grid, RealField samples) {
  if (samples.size() != grid.size()) throw InvalidArgument("tabulated potential does not match grid");
  for (double v : samples)
    if (!std::isfinite(v)) throw InvalidArgument("tabulated potential has non-finite samples");
  return std::make_shared<TabulatedPotential>(grid, std::move(samples));
}

PotentialPtr two_body_potential(PotentialPtr pair, PotentialPtr external, std::size_t axes_per_particle) {
  if (axes_per_particle == 0) throw InvalidArgument("two-body potential needs at least one axis per particle");
  return std::make_shared<TwoBodyPotential>(std::move(pair), std::move(external), axes_per_particle);
}

std::vector<RealField> force_fields(const Potential& v, const Grid& grid) {
  std::vector<RealField> f(grid.dims());
  for (std::size_t a = 0; a < grid.dims(); ++a) {
    f[a] = v.sample_derivative(grid, unit_index(grid.dims(), a));
    for (double& x : f[a]) x = -x;
  }
  return f;
}

}  // namespace emwf
