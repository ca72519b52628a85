#include <gtest/gtest.h>

#include "emwf/error.hpp"
#include "emwf/moments.hpp"
#include "emwf/states.hpp"
#include "oracles.hpp"

using namespace emwf;

TEST(States, GaussianMatchesClosedForm) {
  const Grid g = make_grid(1, {20.0}, {256});
  const WaveFunction psi = gaussian_state(g, {}, {0.5}, {0.0}, {0.7});
  for (std::size_t i = 0; i < g.size(); i += 17) {
    const double x = g.coordinate(0, i);
    const double exact = std::abs(oracle::free_packet(x, 0.5, 0.0, 0.7, 1.0, 1.0, 0.0));
    EXPECT_NEAR(std::abs(psi.values()[i]), exact, 1e-12);
  }
}

TEST(States, EigenstatesMatchExplicitHermiteFunctions) {
  const Grid g = make_grid(1, {20.0}, {256});
  const WaveFunction e1 = harmonic_eigenstate(g, {}, 1.0, {1});
  const WaveFunction e2 = harmonic_eigenstate(g, {}, 1.0, {2});
  for (std::size_t i = 0; i < g.size(); i += 11) {
    const double x = g.coordinate(0, i);
    EXPECT_NEAR(e1.values()[i].real(), oracle::hermite1(x), 1e-12);
    EXPECT_NEAR(e2.values()[i].real(), oracle::hermite2(x), 1e-12);
  }
}

TEST(States, EigenstateLengthScalesWithMassAndFrequency) {
  const Grid g = make_grid(1, {20.0}, {256});
  const Units u{1.0, {4.0}, std::nullopt};
  const WaveFunction e0 = harmonic_eigenstate(g, u, 1.0, {0});
  // length sqrt(hbar/(m omega)) = 1/2
  const MultipoleSet m = central_moments(density(e0), {0.0}, 2);
  EXPECT_NEAR(m.density({2}), 0.125, 1e-10);
}

TEST(States, CoherentStateHasOscillatorWidthAndMeans) {
  const Grid g = make_grid(1, {30.0}, {512});
  const WaveFunction psi = coherent_state(g, {}, 2.0, {1.5}, {-0.5});
  const auto x = position_expectation(psi);
  const auto p = momentum_expectation(psi);
  EXPECT_NEAR(x[0], 1.5, 1e-10);
  EXPECT_NEAR(p[0], -0.5, 1e-10);
  const MultipoleSet m = central_moments(density(psi), x, 2);
  EXPECT_NEAR(m.density({2}), 0.25, 1e-10);
}

TEST(States, ProductStateFactorizes) {
  const Grid g = make_grid(1, {16.0}, {64});
  const WaveFunction a = gaussian_state(g, {}, {1.0}, {0.0}, {1.0});
  const WaveFunction b = gaussian_state(g, {}, {-2.0}, {1.0}, {0.8});
  const WaveFunction ab = product_state(a, b);
  EXPECT_EQ(ab.grid().dims(), 2u);
  EXPECT_EQ(ab.particles(), 2u);
  EXPECT_NEAR(ab.squared_norm(), 1.0, 1e-12);
  const auto x = position_expectation(ab);
  EXPECT_NEAR(x[0], 1.0, 1e-10);
  EXPECT_NEAR(x[1], -2.0, 1e-10);
  EXPECT_EQ(particle_grid(ab.grid(), 2, 1), g);
}

TEST(States, EntangledPairIsSymmetric) {
  const Grid g = make_grid(1, {16.0}, {64});
  const WaveFunction a = gaussian_state(g, {}, {2.0}, {0.0}, {0.8});
  const WaveFunction b = gaussian_state(g, {}, {-2.0}, {0.0}, {0.8});
  const WaveFunction e = entangled_pair(a, b);
  EXPECT_NEAR(e.squared_norm(), 1.0, 1e-12);
  for (std::size_t i = 0; i < 64; i += 5)
    for (std::size_t j = 0; j < 64; j += 7) EXPECT_NEAR(std::abs(e.values()[i * 64 + j] - e.values()[j * 64 + i]), 0.0, 1e-14);
}

TEST(States, SuperpositionRejectsMismatchedInput) {
  const Grid g = make_grid(1, {16.0}, {64});
  const WaveFunction a = gaussian_state(g, {}, {0.0}, {0.0}, {1.0});
  EXPECT_THROW(superposition({a}, {}), InvalidArgument);
  EXPECT_THROW(superposition({a, a}, {1.0, -1.0}), DegenerateState);
  EXPECT_THROW(gaussian_state(g, {}, {0.0}, {0.0}, {0.0}), InvalidArgument);
}
