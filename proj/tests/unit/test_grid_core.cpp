#include <gtest/gtest.h>

#include <cmath>

#include "emwf/error.hpp"
#include "emwf/grid.hpp"
#include "emwf/spectral.hpp"
#include "emwf/states.hpp"
#include "oracles.hpp"

using namespace emwf;

namespace {

Grid line(double l = 20.0, std::size_t n = 256) { return make_grid(1, {l}, {n}); }

WaveFunction plane_wave(const Grid& g, long mode) {
  const double k = 2.0 * oracle::kPi * static_cast<double>(mode) / g.extent(0);
  return oracle::sampled(g, {}, [&](const std::vector<double>& x) { return std::polar(1.0, k * x[0]); });
}

}  // namespace

TEST(MakeGrid, SpacingFromExtentAndPoints) {
  const Grid g = line(20.0, 256);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.078125);
  EXPECT_DOUBLE_EQ(g.coordinate(0, 0), -10.0);
}

TEST(MakeGrid, ThreeDimensionalPointCount) {
  const Grid g = make_grid(3, {10, 10, 10}, {64, 64, 64});
  EXPECT_EQ(g.size(), 262144u);
}

TEST(MakeGrid, RejectsInvalidShapes) {
  EXPECT_THROW(make_grid(1, {10.0}, {100}), InvalidArgument);
  EXPECT_THROW(make_grid(1, {0.0}, {64}), InvalidArgument);
  EXPECT_THROW(make_grid(1, {-1.0}, {64}), InvalidArgument);
  EXPECT_THROW(make_grid(1, {10.0}, {4}), InvalidArgument);
  EXPECT_THROW(make_grid(2, {10.0}, {64}), InvalidArgument);
  EXPECT_THROW(Grid({1.0, 1.0}, {4096, 8192}, 1 << 20), InvalidArgument);
}

TEST(MakeGrid, MomentumLatticeFollowsFftOrder) {
  const Grid g = line(10.0, 8);
  EXPECT_EQ(g.signed_mode(0, 3), 3);
  EXPECT_EQ(g.signed_mode(0, 4), -4);
  EXPECT_NEAR(g.wavenumber(0, 1), 2.0 * oracle::kPi / 10.0, 1e-15);
}

TEST(Normalize, ScalesToUnitNorm) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.0}, {0.0}, {1.0});
  ComplexField doubled(psi.values());
  for (auto& z : doubled) z *= 2.0;
  const WaveFunction big = psi.with_amplitudes(doubled);
  EXPECT_NEAR(big.squared_norm(), 4.0, 1e-12);
  const WaveFunction back = normalize(big);
  EXPECT_NEAR(back.squared_norm(), 1.0, 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(back.values()[i] - psi.values()[i]), 0.0, 1e-12);
}

TEST(Normalize, IdempotentOnNormalizedState) {
  const WaveFunction psi = gaussian_state(line(), {}, {0.5}, {1.0}, {0.8});
  const WaveFunction again = normalize(psi);
  for (std::size_t i = 0; i < psi.values().size(); ++i)
    EXPECT_NEAR(std::abs(again.values()[i] - psi.values()[i]), 0.0, 1e-12);
}

TEST(Normalize, ZeroFieldIsDegenerate) {
  const Grid g = line();
  EXPECT_THROW(normalize(WaveFunction(g, ComplexField(g.size()))), DegenerateState);
}

TEST(WaveFunctionInvariants, RejectsNonFiniteAmplitudes) {
  const Grid g = line();
  ComplexField v(g.size(), 1.0);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(WaveFunction(g, v), NumericalFailure);
}

TEST(InnerProduct, NormalizedStateHasUnitOverlap) {
  const WaveFunction psi = gaussian_state(line(), {}, {1.0}, {2.0}, {1.0});
  const Complex s = inner_product(psi, psi);
  EXPECT_NEAR(s.real(), 1.0, 1e-10);
  EXPECT_NEAR(s.imag(), 0.0, 1e-10);
}

TEST(InnerProduct, OscillatorEigenstatesAreOrthogonal) {
  const Grid g = line();
  const WaveFunction e0 = oracle::sampled(g, {}, [](const auto& x) { return oracle::hermite0(x[0]); });
  const WaveFunction e1 = oracle::sampled(g, {}, [](const auto& x) { return oracle::hermite1(x[0]); });
  EXPECT_NEAR(std::abs(inner_product(e0, e1)), 0.0, 1e-12);
  EXPECT_NEAR(inner_product(e0, e0).real(), 1.0, 1e-12);
}

TEST(InnerProduct, LinearAndConjugateSymmetric) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.0}, {1.0}, {1.0});
  const WaveFunction phi = gaussian_state(g, {}, {0.7}, {-0.5}, {1.3});
  ComplexField iv(psi.values());
  for (auto& z : iv) z *= Complex(0.0, 1.0);
  const Complex ii = inner_product(psi, psi.with_amplitudes(iv));
  EXPECT_NEAR(ii.real(), 0.0, 1e-10);
  EXPECT_NEAR(ii.imag(), 1.0, 1e-10);
  const Complex a = inner_product(psi, phi);
  const Complex b = inner_product(phi, psi);
  EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-15);
  EXPECT_THROW(inner_product(psi, gaussian_state(line(20.0, 128), {}, {0.0}, {0.0}, {1.0})), InvalidArgument);
}

TEST(SpectralGradient, PlaneWaveIsEigenfunction) {
  const Grid g = line();
  const WaveFunction w = plane_wave(g, 5);
  const double k = 2.0 * oracle::kPi * 5.0 / g.extent(0);
  const ComplexField d = spectral_gradient(w, 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(d[i] - Complex(0.0, k) * w.values()[i]), 0.0, 1e-10);
}

TEST(SpectralGradient, RealGaussianGivesOddRealField) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.0}, {0.0}, {1.0});
  const ComplexField d = spectral_gradient(psi, 0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_NEAR(d[i].imag(), 0.0, 1e-12);
    EXPECT_NEAR(d[i].real(), -d[g.size() - i].real(), 1e-12);
  }
}

TEST(SpectralGradient, ConstantFieldHasZeroDerivative) {
  const Grid g = line();
  const WaveFunction c(g, ComplexField(g.size(), 0.3));
  for (const Complex& z : spectral_gradient(c, 0)) EXPECT_NEAR(std::abs(z), 0.0, 1e-14);
  EXPECT_THROW(spectral_gradient(c, 1), InvalidArgument);
}

TEST(SpectralGradient, TwiceEqualsSecondDerivativeMultiplier) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.5}, {1.5}, {1.0});
  const ComplexField once = spectral_gradient(psi, 0);
  const ComplexField twice = spectral_gradient(psi.with_amplitudes(once), 0);
  const WaveFunction direct =
      apply_fourier_multiplier(psi, {[&](std::span<const double> p) { return Complex(-p[0] * p[0], 0.0); }, "(ik)^2"});
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    scale = std::max(scale, std::abs(direct.values()[i]));
    err = std::max(err, std::abs(twice[i] - direct.values()[i]));
  }
  EXPECT_LT(err / scale, 1e-9);
}

TEST(FourierMultiplier, KineticSymbolOnPlaneWave) {
  const Grid g = line();
  const WaveFunction w = plane_wave(g, 3);
  const double p = 2.0 * oracle::kPi * 3.0 / g.extent(0);
  const WaveFunction out =
      apply_fourier_multiplier(w, {[](std::span<const double> q) { return Complex(q[0] * q[0] / 2.0, 0.0); }, "T"});
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(out.values()[i] - 0.5 * p * p * w.values()[i]), 0.0, 1e-10);
}

TEST(FourierMultiplier, SquareRootSymbolOnPlaneWave) {
  const Grid g = line();
  const WaveFunction w = plane_wave(g, -7);
  const double p = 2.0 * oracle::kPi * -7.0 / g.extent(0);
  const double m = 1.3, c = 2.0;
  const WaveFunction out = apply_fourier_multiplier(
      w, {[&](std::span<const double> q) { return Complex(std::sqrt(m * m * c * c + q[0] * q[0]), 0.0); }, "sqrt"});
  const double e = std::sqrt(m * m * c * c + p * p);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(out.values()[i] - e * w.values()[i]), 0.0, 1e-10);
}

TEST(FourierMultiplier, UnitSymbolIsIdentityAndPhasesAreUnitary) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.5}, {1.5}, {1.0});
  const WaveFunction same = apply_fourier_multiplier(psi, {[](std::span<const double>) { return Complex(1.0); }, "1"});
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(same.values()[i] - psi.values()[i]), 0.0, 1e-12);
  const WaveFunction rotated = apply_fourier_multiplier(
      psi, {[](std::span<const double> p) { return std::polar(1.0, -0.37 * p[0] * p[0]); }, "phase"});
  EXPECT_NEAR(rotated.squared_norm(), 1.0, 1e-12);
}

TEST(FourierMultiplier, NonFiniteSymbolRejected) {
  const WaveFunction psi = gaussian_state(line(), {}, {0.0}, {0.0}, {1.0});
  EXPECT_THROW(apply_fourier_multiplier(psi, {[](std::span<const double> p) { return Complex(1.0 / p[0]); }, "1/p"}),
               InvalidArgument);
}

TEST(Parseval, PositionAndMomentumNormsAgree) {
  const Grid g = make_grid(2, {16.0, 12.0}, {64, 32});
  const WaveFunction psi = gaussian_state(g, {}, {0.5, -1.0}, {1.0, 2.0}, {1.0, 0.8});
  const RealField rp = momentum_density(psi);
  double s = 0.0;
  for (double v : rp) s += v;
  s *= momentum_cell_volume(g, psi.hbar());
  EXPECT_NEAR(s, psi.squared_norm(), 1e-10);
}

TEST(BandLimitedField, InterpolatesSmoothFieldBetweenNodes) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.3}, {1.0}, {1.0});
  const BandLimitedField f(g, psi.values());
  const double x = 0.123;
  const Complex exact = oracle::free_packet(x, 0.3, 1.0, 1.0, 1.0, 1.0, 0.0);
  const Complex phase = psi.values()[128] / oracle::free_packet(0.0, 0.3, 1.0, 1.0, 1.0, 1.0, 0.0);
  EXPECT_NEAR(std::abs(f.value(std::vector<double>{x}) - phase * exact), 0.0, 1e-10);
}

TEST(Upsample, RefinedFieldMatchesOriginalOnCoarseNodes) {
  const Grid g = line(20.0, 128);
  const WaveFunction psi = gaussian_state(g, {}, {0.3}, {1.0}, {1.0});
  const SampledField fine = upsample(g, psi.values(), 4);
  ASSERT_EQ(fine.grid.points(0), 512u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(fine.values[4 * i] - psi.values()[i]), 0.0, 1e-12);
  const LocalInterpolator interp(fine);
  const BandLimitedField exact(g, psi.values());
  for (double x : {-1.234, 0.0101, 2.5}) {
    const std::vector<double> p{x};
    EXPECT_NEAR(std::abs(interp(p) - exact.value(p)), 0.0, 1e-8);
  }
}
