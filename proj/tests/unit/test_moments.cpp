#include <gtest/gtest.h>

#include <cmath>

#include "emwf/dynamics.hpp"
#include "emwf/error.hpp"
#include "emwf/moments.hpp"
#include "emwf/spectral.hpp"
#include "emwf/states.hpp"
#include "oracles.hpp"

using namespace emwf;

namespace {

Grid line() { return make_grid(1, {24.0}, {256}); }

double integral(const Grid& g, const RealField& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * g.cell_volume();
}

}  // namespace

TEST(Density, RealStateCarriesNoCurrent) {
  const DensityField f = density(harmonic_eigenstate(line(), {}, 1.0, {2}));
  for (double j : f.current[0]) EXPECT_NEAR(j, 0.0, 1e-12);
  EXPECT_NEAR(integral(f.grid, f.rho), 1.0, 1e-9);
}

TEST(Density, BoostedGaussianCurrentIntegratesToMomentum) {
  const DensityField f = density(gaussian_state(line(), {}, {0.0}, {1.7}, {1.0}));
  EXPECT_NEAR(integral(f.grid, f.current[0]), 1.7, 1e-8);
  for (double r : f.rho) EXPECT_GE(r, -1e-14);
}

TEST(Expectations, GaussianCenterAndBoost) {
  const WaveFunction psi = gaussian_state(line(), {}, {1.5}, {3.0}, {0.8});
  EXPECT_NEAR(position_expectation(psi)[0], 1.5, 1e-8);
  EXPECT_NEAR(momentum_expectation(psi)[0], 3.0, 1e-8);
}

TEST(Expectations, ParityEigenstateHasZeroMean) {
  const WaveFunction psi = harmonic_eigenstate(line(), {}, 1.0, {3});
  EXPECT_NEAR(position_expectation(psi)[0], 0.0, 1e-10);
}

TEST(Expectations, BoundaryLeakIsAnError) {
  const Grid g = make_grid(1, {8.0}, {64});
  const WaveFunction psi = gaussian_state(g, {}, {3.0}, {0.0}, {1.0});
  EXPECT_THROW(position_expectation(psi), BoundaryLeak);
  EXPECT_THROW(central_moments(density(psi), {0.0}, 2), BoundaryLeak);
}

TEST(CentralMoments, GaussianQuadrupole) {
  const WaveFunction psi = gaussian_state(line(), {}, {0.4}, {0.0}, {0.5});
  const auto x = position_expectation(psi);
  const MultipoleSet m = central_moments(density(psi), x, 4);
  EXPECT_NEAR(m.density({0}), 1.0, 1e-9);
  EXPECT_NEAR(m.density({1}), 0.0, 1e-10);
  EXPECT_NEAR(m.density({2}), 0.25, 1e-6);
  EXPECT_NEAR(m.density({3}), 0.0, 1e-10);
  EXPECT_NEAR(m.density({4}), 3.0 * 0.0625, 1e-6);
  check_multipoles(m);
}

TEST(CentralMoments, DipoleVanishesAboutMeanAndShiftsWithCenter) {
  const Grid g = make_grid(2, {16.0, 16.0}, {64, 64});
  const WaveFunction psi = superposition({gaussian_state(g, {}, {1.0, -0.5}, {0.3, 0.0}, {0.9, 0.7}),
                                          gaussian_state(g, {}, {-1.0, 1.5}, {0.0, -1.0}, {0.7, 0.8})},
                                         {1.0, Complex(0.3, 0.5)});
  const auto x = position_expectation(psi);
  const DensityField f = density(psi);
  const MultipoleSet m = central_moments(f, x, 2);
  EXPECT_NEAR(m.density({1, 0}), 0.0, 1e-10);
  EXPECT_NEAR(m.density({0, 1}), 0.0, 1e-10);
  const MultipoleSet shifted = central_moments(f, {x[0] + 0.3, x[1] - 0.2}, 2);
  EXPECT_NEAR(shifted.density({1, 0}), -0.3, 1e-9);
  EXPECT_NEAR(shifted.density({0, 1}), 0.2, 1e-9);
  check_multipoles(m);
  const auto cov = m.covariance();
  EXPECT_DOUBLE_EQ(cov[0][1], cov[1][0]);
}

TEST(CentralMoments, RejectsBadArguments) {
  const DensityField f = density(gaussian_state(line(), {}, {0.0}, {0.0}, {1.0}));
  EXPECT_THROW(central_moments(f, {0.0}, 9), InvalidArgument);
  EXPECT_THROW(central_moments(f, {100.0}, 2), InvalidArgument);
  EXPECT_THROW(central_moments(f, {0.0, 0.0}, 2), InvalidArgument);
}

TEST(CentralMoments, CheckRejectsBrokenSets) {
  MultipoleSet m;
  m.center = {0.0, 0.0};
  m.order = 2;
  m.density_moments[{0, 0}] = 1.0;
  m.density_moments[{2, 0}] = 1.0;
  m.density_moments[{0, 2}] = 1.0;
  m.density_moments[{1, 1}] = 2.0;
  EXPECT_THROW(check_multipoles(m), NumericalFailure);
  m.density_moments[{1, 1}] = 0.5;
  EXPECT_NO_THROW(check_multipoles(m));
  m.density_moments[{0, 0}] = 0.9;
  EXPECT_THROW(check_multipoles(m), NumericalFailure);
}

TEST(CentralMoments, TranslationCovariance) {
  const Grid g = line();
  const WaveFunction psi = gaussian_state(g, {}, {0.3}, {1.0}, {0.9});
  // shift by 10 lattice cells
  ComplexField shifted(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) shifted[(i + 10) % g.size()] = psi.values()[i];
  const WaveFunction moved = psi.with_amplitudes(shifted);
  const auto x0 = position_expectation(psi);
  const auto x1 = position_expectation(moved);
  EXPECT_NEAR(x1[0] - x0[0], 10.0 * g.spacing(0), 1e-10);
  const MultipoleSet a = central_moments(density(psi), x0, 4);
  const MultipoleSet b = central_moments(density(moved), x1, 4);
  for (const auto& [alpha, v] : a.density_moments) EXPECT_NEAR(b.density(alpha), v, 1e-10);
  for (const auto& [key, v] : a.momentum_moments) EXPECT_NEAR(b.momentum(key.first, key.second), v, 1e-10);
}

TEST(Continuity, DensityChangeMatchesBoundaryFlux) {
  const Grid g = make_grid(1, {40.0}, {512});
  const WaveFunction psi0 = gaussian_state(g, {}, {-1.0}, {1.5}, {1.0});
  EvolveOptions opt;
  opt.t_final = 0.02;
  opt.dt = 1e-3;
  opt.save_stride = 10;
  const TrajectoryRecord rec = evolve(psi0, *harmonic_potential(0.3), opt);
  // Omega = [a, b] in lattice indices
  const std::size_t ia = 230, ib = 270;
  auto mass = [&](const WaveFunction& s) {
    double m = 0.0;
    for (std::size_t i = ia; i < ib; ++i) m += std::norm(s.values()[i]);
    return m * g.cell_volume();
  };
  const double dmdt = (mass(rec.snapshots[2]) - mass(rec.snapshots[0])) / (rec.times[2] - rec.times[0]);
  const DensityField f = density(rec.snapshots[1]);
  // cell-centered flux at the lower edges of cells ia and ib
  const BandLimitedField j(g, ComplexField(f.current[0].begin(), f.current[0].end()));
  const double xa = g.coordinate(0, ia) - 0.5 * g.spacing(0);
  const double xb = g.coordinate(0, ib) - 0.5 * g.spacing(0);
  const double flux = j.value(std::vector<double>{xb}).real() - j.value(std::vector<double>{xa}).real();
  EXPECT_NEAR(dmdt, -flux, 1e-4);
}

TEST(DerivativePairs, MonopoleIsNormalization) {
  const PairMoments p = derivative_pair_moments(gaussian_state(line(), {}, {0.2}, {0.5}, {1.0}), {0.2}, 0);
  EXPECT_NEAR(p.at({{0}, {0}, {0}}).real(), 1.0, 1e-9);
}

TEST(DerivativePairs, SecondOrderMatchesFourierSpaceMomentumSquare) {
  const WaveFunction psi = gaussian_state(line(), {}, {0.2}, {1.3}, {0.7});
  const PairMoments p = derivative_pair_moments(psi, {0.2}, 2);
  const RealField rp = momentum_density(psi);
  double p2 = 0.0;
  const Grid& g = psi.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double q = g.wavenumber(0, i);
    p2 += q * q * rp[i];
  }
  p2 *= momentum_cell_volume(g, 1.0);
  EXPECT_NEAR(-p.at({{0}, {2}, {0}}).real(), p2, 1e-8);
  // int d psi* d psi = <p^2> / hbar^2 too
  EXPECT_NEAR(p.at({{1}, {1}, {0}}).real(), p2, 1e-8);
}

TEST(DerivativePairs, HermitianUnderSwap) {
  const Grid g = make_grid(2, {12.0, 12.0}, {32, 32});
  const WaveFunction psi = gaussian_state(g, {}, {0.5, -0.3}, {1.0, -0.7}, {1.0, 0.8});
  const PairMoments p = derivative_pair_moments(psi, {0.5, -0.3}, 3, 1);
  for (const auto& [key, v] : p) {
    const Complex swapped = p.at({key.psi, key.conj, key.position});
    EXPECT_NEAR(std::abs(v - std::conj(swapped)), 0.0, 1e-12);
  }
  EXPECT_THROW(derivative_pair_moments(psi, {0.0, 0.0}, 5), InvalidArgument);
}

TEST(Uncertainties, MinimalGaussianSaturatesHeisenberg) {
  const WaveFunction psi = gaussian_state(line(), {}, {0.3}, {0.8}, {0.6});
  MultipoleSet m = central_moments(density(psi), position_expectation(psi), 2);
  m.pair_moments = derivative_pair_moments(psi, m.center, 2);
  const Uncertainties u = uncertainties(psi, m);
  EXPECT_NEAR(u.dx[0] * u.dp[0], 0.5, 1e-6);
  EXPECT_NEAR(u.dx[0], 0.6, 1e-8);
}

TEST(Uncertainties, FirstExcitedOscillatorState) {
  const WaveFunction psi = harmonic_eigenstate(line(), {}, 1.0, {1});
  MultipoleSet m = central_moments(density(psi), position_expectation(psi), 2);
  m.pair_moments = derivative_pair_moments(psi, m.center, 2);
  const Uncertainties u = uncertainties(psi, m);
  EXPECT_NEAR(u.dx[0] * u.dp[0], 1.5, 1e-5);
}

TEST(Uncertainties, HeisenbergBoundAlongEvolution) {
  const Grid g = make_grid(1, {30.0}, {256});
  EvolveOptions opt;
  opt.t_final = 2.0;
  opt.dt = 1e-3;
  opt.save_stride = 200;
  const TrajectoryRecord rec = evolve(gaussian_state(g, {}, {1.0}, {0.0}, {0.5}), *quartic_potential(0.1), opt);
  for (const WaveFunction& s : rec.snapshots) {
    MultipoleSet m = central_moments(density(s), position_expectation(s), 2);
    m.pair_moments = derivative_pair_moments(s, m.center, 2);
    const Uncertainties u = uncertainties(s, m);
    EXPECT_GE(u.dx[0] * u.dp[0], 0.5 - 1e-9);
  }
}

TEST(AngularMomentum, RealGaussianAtRest) {
  const Grid g = make_grid(3, {10.0, 10.0, 10.0}, {32, 32, 32});
  const WaveFunction psi = gaussian_state(g, {}, {0.5, -0.2, 0.1}, {0.0, 0.0, 0.0}, {0.8, 0.9, 1.0});
  const MultipoleSet m = central_moments(density(psi), position_expectation(psi), 1);
  const AngularMomentum l = angular_momentum_expectation(psi, m);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(l.expectation[i], 0.0, 1e-10);
    EXPECT_NEAR(l.classical[i], 0.0, 1e-10);
    EXPECT_NEAR(l.residual[i], 0.0, 1e-10);
  }
}

TEST(AngularMomentum, BoostedOffAxisGaussian) {
  const Grid g = make_grid(3, {12.0, 12.0, 12.0}, {32, 32, 32});
  const WaveFunction psi = gaussian_state(g, {}, {1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.9, 0.9, 0.9});
  const MultipoleSet m = central_moments(density(psi), position_expectation(psi), 1);
  const AngularMomentum l = angular_momentum_expectation(psi, m);
  EXPECT_NEAR(l.classical[2], 2.0, 1e-6);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(l.residual[i], 0.0, 1e-6);
}

TEST(AngularMomentum, EigenstateOfLz) {
  // (x + i y) exp(-r^2/2): L_z = hbar
  const Grid g = make_grid(3, {12.0, 12.0, 12.0}, {32, 32, 32});
  const WaveFunction psi = normalize(oracle::sampled(g, {}, [](const auto& x) {
    return Complex(x[0], x[1]) * std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
  }));
  const MultipoleSet m = central_moments(density(psi), position_expectation(psi), 1);
  const AngularMomentum l = angular_momentum_expectation(psi, m);
  EXPECT_NEAR(l.expectation[2], 1.0, 1e-5);
  EXPECT_NEAR(l.expectation[0], 0.0, 1e-10);
  EXPECT_THROW(angular_momentum_expectation(gaussian_state(line(), {}, {0.0}, {0.0}, {1.0}), m), InvalidArgument);
}

TEST(RecordMultipoles, OnePerSnapshotIndependentOfThreads) {
  const Grid g = make_grid(1, {24.0}, {256});
  EvolveOptions opt;
  opt.t_final = 0.5;
  opt.dt = 1e-2;
  opt.save_stride = 5;
  const TrajectoryRecord rec = evolve(gaussian_state(g, {}, {1.0}, {0.5}, {0.7}), *quartic_potential(0.1), opt);
  const auto a = record_multipoles(rec, 4, 1);
  const auto b = record_multipoles(rec, 4, 3);
  ASSERT_EQ(a.size(), rec.snapshots.size());
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a[s].density_moments, b[s].density_moments);
}
