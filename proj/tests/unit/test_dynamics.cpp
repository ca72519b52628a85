#include <gtest/gtest.h>

#include <cmath>

#include "emwf/dynamics.hpp"
#include "emwf/error.hpp"
#include "emwf/moments.hpp"
#include "emwf/states.hpp"
#include "oracles.hpp"

using namespace emwf;

namespace {

double fidelity(const WaveFunction& a, const WaveFunction& b) { return std::abs(inner_product(a, b)); }

}  // namespace

TEST(SplitStep, FreePlaneWaveRotatesPhaseOnly) {
  const Grid g = make_grid(1, {20.0}, {128});
  const double k = 2.0 * oracle::kPi * 4.0 / 20.0;
  const WaveFunction w = normalize(oracle::sampled(g, {}, [&](const auto& x) { return std::polar(1.0, k * x[0]); }));
  const double dt = 0.37;
  const WaveFunction out = split_step(w, *free_potential(), dt);
  const Complex phase = std::polar(1.0, -k * k * dt / 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(out.values()[i] - phase * w.values()[i]), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(out.time(), dt);
}

TEST(SplitStep, ZeroStepIsIdentityAndNegativeStepRejected) {
  const Grid g = make_grid(1, {20.0}, {128});
  const WaveFunction psi = gaussian_state(g, {}, {0.0}, {1.0}, {1.0});
  const WaveFunction same = split_step(psi, *harmonic_potential(1.0), 0.0);
  EXPECT_EQ(same.values(), psi.values());
  EXPECT_THROW(split_step(psi, *harmonic_potential(1.0), -1e-3), InvalidArgument);
}

TEST(SplitStep, PreservesNormPerStep) {
  const Grid g = make_grid(1, {30.0}, {512});
  const WaveFunction psi = coherent_state(g, {}, 1.0, {2.0}, {0.0});
  const WaveFunction out = split_step(psi, *quartic_potential(0.1), 1e-2);
  EXPECT_LT(std::abs(out.squared_norm() - 1.0), 1e-13);
}

TEST(SplitStep, CoherentStateReturnsAfterOnePeriod) {
  const Grid g = make_grid(1, {30.0}, {512});
  const WaveFunction psi0 = coherent_state(g, {}, 1.0, {2.0}, {0.0});
  const double period = 2.0 * oracle::kPi;
  const std::size_t steps = 2000;
  const SplitStepPropagator prop(g, psi0.units(), *harmonic_potential(1.0), period / steps);
  ComplexField amps(psi0.values());
  for (std::size_t s = 0; s < steps; ++s) prop.step(amps);
  // exp(-i omega T / 2) global phase drops out of the modulus.
  EXPECT_GT(fidelity(psi0, psi0.with_amplitudes(amps)), 1.0 - 1e-6);
}

TEST(SplitStep, NonFiniteAmplitudesAreReported) {
  const Grid g = make_grid(1, {20.0}, {64});
  const WaveFunction psi = gaussian_state(g, {}, {0.0}, {0.0}, {1.0});
  const auto v = tabulated_potential(g, RealField(g.size(), 1e308));
  EXPECT_THROW(split_step(psi, *v, 1e10), NumericalFailure);
}

TEST(Evolve, FreePacketDriftsAndSpreadsAnalytically) {
  const Grid g = make_grid(1, {60.0}, {1024});
  const WaveFunction psi0 = gaussian_state(g, {}, {-5.0}, {2.0}, {1.0});
  EvolveOptions opt;
  opt.t_final = 2.0;
  opt.dt = 1e-3;
  opt.save_stride = 100;
  const TrajectoryRecord rec = evolve(psi0, *free_potential(), opt);
  ASSERT_EQ(rec.size(), 21u);
  EXPECT_EQ(rec.meta.steps, 2000u);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double t = rec.times[i];
    EXPECT_NEAR(rec.position[i][0], -5.0 + 2.0 * t, 1e-6);
    const WaveFunction* s = rec.snapshot_at(i);
    ASSERT_NE(s, nullptr);
    const MultipoleSet m = central_moments(density(*s), rec.position[i], 2);
    const double exact = oracle::free_variance(1.0, 1.0, 1.0, t);
    EXPECT_NEAR(m.density({2}) / exact, 1.0, 1e-5);
  }
  EXPECT_LT(std::abs(rec.norm.back() - 1.0), 1e-9);
  rec.validate();
}

TEST(Evolve, HarmonicGroundStateStaysAtOrigin) {
  const Grid g = make_grid(1, {20.0}, {256});
  const WaveFunction psi0 = harmonic_eigenstate(g, {}, 1.0, {0});
  EvolveOptions opt;
  opt.t_final = 2.0;
  opt.dt = 1e-3;
  opt.save_stride = 50;
  opt.snapshot_every = 0;
  const TrajectoryRecord rec = evolve(psi0, *harmonic_potential(1.0), opt);
  EXPECT_TRUE(rec.snapshots.empty());
  for (const auto& x : rec.position) EXPECT_NEAR(x[0], 0.0, 1e-8);
}

TEST(Evolve, RejectsBadOptions) {
  const Grid g = make_grid(1, {20.0}, {64});
  const WaveFunction psi0 = gaussian_state(g, {}, {0.0}, {0.0}, {1.0});
  EvolveOptions opt;
  opt.t_final = -1.0;
  EXPECT_THROW(evolve(psi0, *free_potential(), opt), InvalidArgument);
  opt.t_final = 1.0;
  opt.save_stride = 0;
  EXPECT_THROW(evolve(psi0, *free_potential(), opt), InvalidArgument);
}

TEST(Evolve, BoundaryLeakStopsTheRun) {
  const Grid g = make_grid(1, {10.0}, {128});
  const WaveFunction psi0 = gaussian_state(g, {}, {0.0}, {20.0}, {0.5});
  EvolveOptions opt;
  opt.t_final = 1.0;
  opt.dt = 1e-3;
  opt.save_stride = 10;
  EXPECT_THROW(evolve(psi0, *free_potential(), opt), BoundaryLeak);
}

TEST(Evolve, SecondOrderConvergenceOnQuartic) {
  const Grid g = make_grid(1, {20.0}, {256});
  const WaveFunction psi0 = gaussian_state(g, {}, {1.5}, {0.0}, {0.5});
  const auto v = quartic_potential(0.1);
  auto endpoint = [&](double dt) {
    EvolveOptions opt;
    opt.t_final = 2.0;
    opt.dt = dt;
    opt.save_stride = static_cast<std::size_t>(std::lround(2.0 / dt));
    opt.snapshot_every = 0;
    return evolve(psi0, *v, opt).position.back()[0];
  };
  const double reference = endpoint(2.5e-5);
  const double e1 = std::abs(endpoint(4e-3) - reference);
  const double e2 = std::abs(endpoint(2e-3) - reference);
  EXPECT_NEAR(e1 / e2, 4.0, 0.8);
}

TEST(Evolve, EnergyIsConservedForStaticPotential) {
  const Grid g = make_grid(1, {30.0}, {512});
  const WaveFunction psi0 = coherent_state(g, {}, 1.0, {2.0}, {0.0});
  EvolveOptions opt;
  opt.t_final = 1.0;
  opt.dt = 1e-4;
  opt.save_stride = 100;
  opt.snapshot_every = 0;
  const TrajectoryRecord rec = evolve(psi0, *harmonic_potential(1.0), opt);
  for (double e : rec.energy) EXPECT_LT(std::abs(e - rec.energy.front()), 1e-8 * std::abs(rec.energy.front()));
}

TEST(Evolve, StationaryDensityIsPreservedOverAPeriod) {
  const Grid g = make_grid(1, {20.0}, {256});
  const WaveFunction psi0 = harmonic_eigenstate(g, {}, 1.0, {1});
  const double period = 2.0 * oracle::kPi;
  const std::size_t steps = 20000;
  const SplitStepPropagator prop(g, psi0.units(), *harmonic_potential(1.0), period / steps);
  ComplexField amps(psi0.values());
  for (std::size_t s = 0; s < steps; ++s) prop.step(amps);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(std::norm(amps[i]) - std::norm(psi0.values()[i])));
  EXPECT_LT(worst, 1e-8);
}

TEST(HamiltonianExpectation, OscillatorGroundStateEnergy) {
  const Grid g = make_grid(1, {20.0}, {256});
  const EnergyParts e = hamiltonian_expectation(harmonic_eigenstate(g, {}, 1.0, {0}), *harmonic_potential(1.0));
  EXPECT_NEAR(e.total, 0.5, 1e-6);
  EXPECT_NEAR(e.kinetic + e.potential, e.total, 1e-10);
  EXPECT_NEAR(e.kinetic, 0.25, 1e-6);
}

TEST(HamiltonianExpectation, FreeGaussianKineticEnergy) {
  const Grid g = make_grid(1, {20.0}, {256});
  const EnergyParts e = hamiltonian_expectation(gaussian_state(g, {}, {0.0}, {0.0}, {1.0}), *free_potential());
  EXPECT_NEAR(e.kinetic, 0.125, 1e-6);
  EXPECT_GE(e.kinetic, 0.0);
  EXPECT_EQ(e.potential, 0.0);
}

TEST(HamiltonianExpectation, NonNormalizedPlaneWaveRejected) {
  const Grid g = make_grid(1, {20.0}, {128});
  const WaveFunction w = oracle::sampled(g, {}, [](const auto& x) { return std::polar(1.0, 0.9424777960769379 * x[0]); });
  EXPECT_THROW(hamiltonian_expectation(w, *free_potential()), DegenerateState);
}

TEST(Relativistic, PlaneWavePhaseFromSquareRootEnergy) {
  const Grid g = make_grid(1, {20.0}, {128});
  const double k = 2.0 * oracle::kPi * 3.0 / 20.0;
  const WaveFunction w = normalize(oracle::sampled(g, {}, [&](const auto& x) { return std::polar(1.0, k * x[0]); }));
  const double m1 = 1.0, m2 = 2.0, c = 3.0, dtau = 0.2;
  const WaveFunction out = relativistic_step(w, m1, m2, c, dtau, false);
  const double e = c * (std::sqrt(m1 * m1 * c * c + k * k) + std::sqrt(m2 * m2 * c * c + k * k));
  const Complex phase = std::polar(1.0, -e * dtau);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(out.values()[i] - phase * w.values()[i]), 0.0, 1e-11);
  const WaveFunction shifted = relativistic_step(w, m1, m2, c, dtau, true);
  const Complex rest = std::polar(1.0, (m1 + m2) * c * c * dtau);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(shifted.values()[i] - rest * out.values()[i]), 0.0, 1e-11);
}

TEST(Relativistic, FreeMomentumIsConserved) {
  const Grid g = make_grid(1, {40.0}, {512});
  const WaveFunction psi = gaussian_state(g, {}, {-3.0}, {1.2}, {1.0});
  const RelativisticPropagator prop(g, 1.0, 1.0, 1.0, 1.0, 1e-3);
  ComplexField amps(psi.values());
  for (int s = 0; s < 1000; ++s) prop.step(amps);
  const WaveFunction out = psi.with_amplitudes(amps);
  EXPECT_NEAR(momentum_expectation(out)[0], momentum_expectation(psi)[0], 1e-12);
  EXPECT_NEAR(out.squared_norm(), 1.0, 1e-12);
}

TEST(Relativistic, LargeCMatchesReducedMassEvolution) {
  const Grid g = make_grid(1, {40.0}, {512});
  const double m1 = 1.0, m2 = 1.0, mu = 0.5;
  const Units u{1.0, {mu}, std::nullopt};
  const WaveFunction psi = gaussian_state(g, u, {-2.0}, {0.5}, {1.0});
  EvolveOptions opt;
  opt.t_final = 2.0;
  opt.dt = 1e-3;
  opt.save_stride = 100;
  opt.snapshot_every = 0;
  const TrajectoryRecord rel = evolve_relativistic(psi, m1, m2, 50.0, nullptr, opt);
  const TrajectoryRecord nr = evolve(psi, *free_potential(), opt);
  for (std::size_t i = 0; i < rel.size(); ++i) EXPECT_NEAR(rel.position[i][0], nr.position[i][0], 5e-4);
}

TEST(Relativistic, EnergyHelperAvoidsCancellation) {
  const double pi2 = 0.25;
  const double e = relativistic_energy(pi2, 1.0, 1.0, 1e6);
  EXPECT_NEAR(e, pi2 / 2.0 + pi2 / 2.0, 1e-10);
  EXPECT_THROW(RelativisticPropagator(make_grid(1, {1.0}, {8}), 1.0, -1.0, 1.0, 1.0, 0.1), InvalidArgument);
}
