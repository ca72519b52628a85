#include "emwf/dynamics.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "emwf/error.hpp"
#include "emwf/moments.hpp"
#include "emwf/spectral.hpp"

namespace emwf {
namespace {

ComplexField phase_table(const RealField& energy, double dt, double hbar) {
  ComplexField out(energy.size());
  for (std::size_t i = 0; i < energy.size(); ++i) out[i] = std::polar(1.0, -energy[i] * dt / hbar);
  return out;
}

// Momentum-space energy table over FFT slots.
RealField momentum_table(const Grid& g, double hbar, const std::function<double(std::span<const double>)>& energy) {
  RealField out(g.size());
  std::vector<double> p(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t a = 0; a < g.dims(); ++a) p[a] = hbar * g.wavenumber(a, g.axis_index(i, a));
    out[i] = energy(p);
  }
  return out;
}

RealField kinetic_table(const Grid& g, const Units& units) {
  const std::size_t per = g.dims() / units.particles();
  return momentum_table(g, units.hbar, [&](std::span<const double> p) {
    double t = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) t += p[a] * p[a] / (2.0 * units.masses[a / per]);
    return t;
  });
}

void apply_diagonal(ComplexField& psi, const ComplexField& table) {
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= table[i];
}

void spectral_sandwich(const Grid& g, ComplexField& psi, const ComplexField& half_v, const ComplexField& kinetic) {
  if (!half_v.empty()) apply_diagonal(psi, half_v);
  fft_forward(g, psi);
  apply_diagonal(psi, kinetic);
  fft_inverse(g, psi);
  if (!half_v.empty()) apply_diagonal(psi, half_v);
}

void require_finite(const ComplexField& psi, std::size_t step) {
  for (const Complex& z : psi) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      std::ostringstream msg;
      msg << "non-finite amplitudes after step " << step << " (dt too large or potential pathological)";
      throw NumericalFailure(msg.str());
    }
  }
}

EnergyParts energy_from_tables(const WaveFunction& psi, const RealField& kinetic, const RealField& v) {
  const Grid& g = psi.grid();
  ComplexField work(psi.values());
  fft_forward(g, work);
  double kin = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) kin += kinetic[i] * std::norm(work[i]);
  kin *= g.cell_volume() / static_cast<double>(g.size());
  double pot = 0.0;
  if (!v.empty())
    for (std::size_t i = 0; i < v.size(); ++i) pot += v[i] * std::norm(psi.values()[i]);
  pot *= g.cell_volume();
  return {kin + pot, kin, pot};
}

// Shared time loop: `advance` performs one step in place.
TrajectoryRecord run(const WaveFunction& psi0, const EvolveOptions& opt, const RealField& kinetic,
                     const RealField& v_samples, const std::vector<RealField>& forces,
                     const std::function<void(ComplexField&)>& advance, RecordMetadata meta) {
  if (!(opt.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(opt.t_final > 0.0)) throw InvalidArgument("t_final must be positive");
  if (opt.save_stride == 0) throw InvalidArgument("save_stride must be at least 1");
  if (std::abs(psi0.squared_norm() - 1.0) > 1e-8) throw DegenerateState("initial state is not normalized");

  const Grid& g = psi0.grid();
  const auto steps = static_cast<std::size_t>(std::floor(opt.t_final / opt.dt + 1e-9));
  meta.dt = opt.dt;
  meta.t_final = opt.t_final;
  meta.steps = steps;
  meta.save_stride = opt.save_stride;
  meta.snapshot_every = opt.snapshot_every;
  meta.scenario_hash = opt.scenario_hash;

  TrajectoryRecord rec;
  rec.meta = std::move(meta);
  rec.units = psi0.units();
  std::size_t saved = 0;
  auto save = [&](const ComplexField& amps, std::size_t step) {
    const WaveFunction psi = psi0.with_amplitudes(amps).with_time(psi0.time() + static_cast<double>(step) * opt.dt);
    check_boundary(psi, "evolve");
    rec.times.push_back(psi.time());
    rec.position.push_back(position_expectation(psi));
    rec.momentum.push_back(momentum_expectation(psi));
    rec.energy.push_back(energy_from_tables(psi, kinetic, v_samples).total);
    std::vector<double> f(g.dims(), 0.0);
    for (std::size_t a = 0; a < forces.size(); ++a) {
      for (std::size_t i = 0; i < g.size(); ++i) f[a] += forces[a][i] * std::norm(amps[i]);
      f[a] *= g.cell_volume();
    }
    rec.force.push_back(std::move(f));
    rec.norm.push_back(psi.squared_norm());
    if (opt.snapshot_every > 0 && saved % opt.snapshot_every == 0) {
      rec.snapshot_index.push_back(rec.times.size() - 1);
      rec.snapshots.push_back(psi);
    }
    ++saved;
  };

  ComplexField amps(psi0.values());
  save(amps, 0);
  for (std::size_t s = 1; s <= steps; ++s) {
    advance(amps);
    require_finite(amps, s);
    if (s % opt.save_stride == 0) save(amps, s);
  }
  return rec;
}

}  // namespace

EnergyParts hamiltonian_expectation(const WaveFunction& psi, const Potential& v) {
  if (std::abs(psi.squared_norm() - 1.0) > 1e-6)
    throw DegenerateState("energy expectation needs a normalized state");
  const RealField samples = v.is_free() ? RealField{} : v.sample(psi.grid());
  return energy_from_tables(psi, kinetic_table(psi.grid(), psi.units()), samples);
}

SplitStepPropagator::SplitStepPropagator(const Grid& grid, const Units& units, const Potential& v, double dt)
    : grid_(grid), dt_(dt) {
  if (dt < 0.0 || !std::isfinite(dt)) throw InvalidArgument("dt must be finite and nonnegative");
  if (!v.is_free()) {
    const RealField samples = v.sample(grid);
    for (double x : samples)
      if (!std::isfinite(x)) throw InvalidArgument("potential is not finite on the grid");
    half_potential_ = phase_table(samples, 0.5 * dt, units.hbar);
  }
  kinetic_ = phase_table(kinetic_table(grid, units), dt, units.hbar);
}

void SplitStepPropagator::step(ComplexField& psi) const {
  if (dt_ == 0.0) return;
  spectral_sandwich(grid_, psi, half_potential_, kinetic_);
}

WaveFunction split_step(const WaveFunction& psi, const Potential& v, double dt) {
  if (dt == 0.0) return psi;
  const SplitStepPropagator prop(psi.grid(), psi.units(), v, dt);
  ComplexField amps(psi.values());
  prop.step(amps);
  require_finite(amps, 1);
  return psi.with_amplitudes(std::move(amps)).with_time(psi.time() + dt);
}

TrajectoryRecord evolve(const WaveFunction& psi0, const Potential& v, const EvolveOptions& options) {
  const Grid& g = psi0.grid();
  const SplitStepPropagator prop(g, psi0.units(), v, options.dt);
  const RealField samples = v.is_free() ? RealField{} : v.sample(g);
  const std::vector<RealField> forces = v.is_free() ? std::vector<RealField>{} : force_fields(v, g);
  RecordMetadata meta;
  meta.integrator = "strang-split-step";
  meta.potential = v.describe();
  return run(psi0, options, kinetic_table(g, psi0.units()), samples, forces,
             [&](ComplexField& amps) { prop.step(amps); }, std::move(meta));
}

double relativistic_energy(double pi2, double m1, double m2, double c, bool subtract_rest) {
  if (!subtract_rest) return c * (std::sqrt(m1 * m1 * c * c + pi2) + std::sqrt(m2 * m2 * c * c + pi2));
  // c (sqrt(m^2c^2 + pi^2) - mc) without cancellation.
  auto part = [&](double m) { return c * pi2 / (std::sqrt(m * m * c * c + pi2) + m * c); };
  return part(m1) + part(m2);
}

namespace {

RealField relativistic_table(const Grid& g, double hbar, double m1, double m2, double c, bool subtract_rest) {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(c > 0.0)) throw InvalidArgument("masses and c must be positive");
  return momentum_table(g, hbar, [&](std::span<const double> p) {
    double pi2 = 0.0;
    for (double x : p) pi2 += x * x;
    return relativistic_energy(pi2, m1, m2, c, subtract_rest);
  });
}

}  // namespace

RelativisticPropagator::RelativisticPropagator(const Grid& grid, double hbar, double m1, double m2, double c,
                                               double dtau, const Potential* v, bool subtract_rest)
    : grid_(grid) {
  if (dtau < 0.0 || !std::isfinite(dtau)) throw InvalidArgument("dtau must be finite and nonnegative");
  kinetic_ = phase_table(relativistic_table(grid, hbar, m1, m2, c, subtract_rest), dtau, hbar);
  if (v && !v->is_free()) half_potential_ = phase_table(v->sample(grid), 0.5 * dtau, hbar);
}

void RelativisticPropagator::step(ComplexField& psi) const { spectral_sandwich(grid_, psi, half_potential_, kinetic_); }

WaveFunction relativistic_step(const WaveFunction& psi_rel, double m1, double m2, double c, double dtau,
                               bool subtract_rest) {
  if (dtau == 0.0) return psi_rel;
  const RelativisticPropagator prop(psi_rel.grid(), psi_rel.hbar(), m1, m2, c, dtau, nullptr, subtract_rest);
  ComplexField amps(psi_rel.values());
  prop.step(amps);
  return psi_rel.with_amplitudes(std::move(amps)).with_time(psi_rel.time() + dtau);
}

TrajectoryRecord evolve_relativistic(const WaveFunction& psi0, double m1, double m2, double c, const Potential* v,
                                     const EvolveOptions& options, bool subtract_rest) {
  const Grid& g = psi0.grid();
  const RelativisticPropagator prop(g, psi0.hbar(), m1, m2, c, options.dt, v, subtract_rest);
  const bool free = !v || v->is_free();
  const RealField samples = free ? RealField{} : v->sample(g);
  const std::vector<RealField> forces = free ? std::vector<RealField>{} : force_fields(*v, g);
  RecordMetadata meta;
  meta.integrator = "relativistic-multiplier";
  meta.potential = free ? "free" : v->describe();
  std::ostringstream params;
  params.precision(17);
  params << "m1=" << m1 << " m2=" << m2 << " c=" << c;
  meta.extra["relativistic"] = params.str();
  return run(psi0, options, relativistic_table(g, psi0.hbar(), m1, m2, c, subtract_rest), samples, forces,
             [&](ComplexField& amps) { prop.step(amps); }, std::move(meta));
}

}  // namespace emwf
