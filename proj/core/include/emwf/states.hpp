#pragma once

#include <vector>

#include "emwf/grid.hpp"

namespace emwf {

// Normalized product of Gaussians exp(-(x-x0)^2 / (4 sigma^2) + i p0 x / hbar),
// so sigma is the position standard deviation on each axis.
WaveFunction gaussian_state(const Grid& grid, const Units& units, const std::vector<double>& center,
                            const std::vector<double>& momentum, const std::vector<double>& sigma);

// Harmonic-oscillator eigenfunction with quantum number n_a on axis a,
// frequency omega and the mass of the axis' particle, centered at the origin.
WaveFunction harmonic_eigenstate(const Grid& grid, const Units& units, double omega, const std::vector<int>& quanta);

// Displaced oscillator ground state (Glauber coherent state) with mean
// position `displacement` and mean momentum `momentum`.
WaveFunction coherent_state(const Grid& grid, const Units& units, double omega, const std::vector<double>& displacement,
                            const std::vector<double>& momentum);

// Normalized sum_i c_i psi_i; all components must share grid and units.
WaveFunction superposition(const std::vector<WaveFunction>& components, const std::vector<Complex>& coefficients);

// psi1(x1) psi2(x2) on the concatenated grid; masses are concatenated.
WaveFunction product_state(const WaveFunction& first, const WaveFunction& second);

// Normalized symmetric pair a(x1) b(x2) + b(x1) a(x2).
WaveFunction entangled_pair(const WaveFunction& a, const WaveFunction& b);

// Grid of particle `particle` when `combined` holds `particles` equal blocks of axes.
Grid particle_grid(const Grid& combined, std::size_t particles, std::size_t particle);

}  // namespace emwf
