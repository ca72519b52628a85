#include <gtest/gtest.h>

#include <cmath>

#include "emwf/diagnostics.hpp"
#include "emwf/error.hpp"
#include "emwf/potential.hpp"
#include "oracles.hpp"

using namespace emwf;

namespace {

double at(const Potential& v, std::vector<double> x, MultiIndex a) { return v.derivative(x, a); }

// Central finite difference of order-1 derivative along `axis` of d^alpha V.
double numeric(const Potential& v, std::vector<double> x, MultiIndex alpha, std::size_t axis) {
  const double h = 1e-5;
  auto xp = x, xm = x;
  xp[axis] += h;
  xm[axis] -= h;
  return (v.derivative(xp, alpha) - v.derivative(xm, alpha)) / (2 * h);
}

}  // namespace

TEST(Potential, HarmonicDerivatives) {
  const auto v = harmonic_potential(2.0);
  EXPECT_DOUBLE_EQ(at(*v, {1.5, -1.0}, {0, 0}), 0.5 * 2.0 * (2.25 + 1.0));
  EXPECT_DOUBLE_EQ(at(*v, {1.5, -1.0}, {1, 0}), 3.0);
  EXPECT_DOUBLE_EQ(at(*v, {1.5, -1.0}, {0, 2}), 2.0);
  EXPECT_DOUBLE_EQ(at(*v, {1.5, -1.0}, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(at(*v, {1.5, -1.0}, {3, 0}), 0.0);
}

TEST(Potential, QuarticDerivatives) {
  const auto v = quartic_potential(0.1);
  const double x = 1.3;
  EXPECT_NEAR(at(*v, {x}, {0}), 0.1 * std::pow(x, 4), 1e-15);
  EXPECT_NEAR(at(*v, {x}, {1}), 0.4 * x * x * x, 1e-15);
  EXPECT_NEAR(at(*v, {x}, {2}), 1.2 * x * x, 1e-15);
  EXPECT_NEAR(at(*v, {x}, {3}), 2.4 * x, 1e-15);
  EXPECT_NEAR(at(*v, {x}, {4}), 2.4, 1e-15);
  EXPECT_EQ(at(*v, {x}, {5}), 0.0);
}

TEST(Potential, GaussianWellDerivativesAgreeWithFiniteDifferences) {
  const auto v = gaussian_well(2.0, 0.8);
  const std::vector<double> x{0.3, -0.6};
  for (const MultiIndex& a : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{2, 1}, MultiIndex{3, 2}})
    for (std::size_t axis = 0; axis < 2; ++axis) {
      MultiIndex up = a;
      ++up[axis];
      EXPECT_NEAR(v->derivative(x, up), numeric(*v, x, a, axis), 1e-6);
    }
  EXPECT_NEAR(at(*v, {0.0, 0.0}, {0, 0}), -2.0, 1e-15);
}

TEST(Potential, TabulatedUsesSpectralDerivativesAndWarnsAtHighOrder) {
  const Grid g = make_grid(1, {20.0}, {256});
  const auto smooth = gaussian_well(1.0, 1.0);
  const auto tab = tabulated_potential(g, smooth->sample(g));
  for (int n = 0; n <= 3; ++n) {
    const RealField exact = smooth->sample_derivative(g, {n});
    const RealField approx = tab->sample_derivative(g, {n});
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(approx[i], exact[i], 1e-9);
  }
  EXPECT_NEAR(tab->value(std::vector<double>{0.0123}), smooth->value(std::vector<double>{0.0123}), 1e-10);
  int warnings = 0;
  auto previous = set_warning_handler([&](const std::string&) { ++warnings; });
  (void)tab->sample_derivative(g, {5});
  set_warning_handler(previous);
  EXPECT_EQ(warnings, 1);
}

TEST(Potential, TwoBodyCombinesPairAndExternalParts) {
  const auto pair = quartic_potential(0.2);
  const auto ext = harmonic_potential(1.0);
  const auto v = two_body_potential(pair, ext, 1);
  const std::vector<double> x{0.7, -0.4};
  const double r = 1.1;
  EXPECT_NEAR(at(*v, x, {0, 0}), 0.2 * std::pow(r, 4) + 0.5 * (0.49 + 0.16), 1e-14);
  // d/dx2 of pair(x1 - x2) is -pair'
  EXPECT_NEAR(at(*v, x, {0, 1}), -0.8 * r * r * r - 0.4, 1e-14);
  EXPECT_NEAR(at(*v, x, {1, 1}), -2.4 * r * r, 1e-14);
  for (const MultiIndex& a : {MultiIndex{1, 0}, MultiIndex{2, 1}, MultiIndex{0, 2}})
    for (std::size_t axis = 0; axis < 2; ++axis) {
      MultiIndex up = a;
      ++up[axis];
      EXPECT_NEAR(v->derivative(x, up), numeric(*v, x, a, axis), 1e-6);
    }
  EXPECT_THROW(at(*v, {0.0}, {0}), InvalidArgument);
}

TEST(Potential, ForceFieldsAreNegativeGradient) {
  const Grid g = make_grid(2, {8.0, 8.0}, {16, 16});
  const auto f = force_fields(*harmonic_potential(3.0), g);
  for (std::size_t i = 0; i < g.size(); i += 13) {
    EXPECT_DOUBLE_EQ(f[0][i], -3.0 * g.coordinate(0, g.axis_index(i, 0)));
    EXPECT_DOUBLE_EQ(f[1][i], -3.0 * g.coordinate(1, g.axis_index(i, 1)));
  }
}

TEST(Potential, ParameterValidation) {
  EXPECT_THROW(gaussian_well(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(quartic_potential(std::nan("")), InvalidArgument);
  const Grid g = make_grid(1, {8.0}, {16});
  EXPECT_THROW(tabulated_potential(g, RealField(8)), InvalidArgument);
}
