#include "emwf/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "emwf/diagnostics.hpp"
#include "emwf/effective.hpp"
#include "emwf/error.hpp"
#include "emwf/record_io.hpp"

namespace emwf {
namespace {

std::optional<std::size_t> saved_index(const std::vector<double>& times, double t) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  return std::nullopt;
}

const std::vector<double>& times_of(const MixtureComponent& c) { return c.record ? c.record->times : c.times; }

void require_in_range(const MixtureComponent& c, double t) {
  const auto& ts = times_of(c);
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  if (ts.empty() || t < ts.front() - slack || t > ts.back() + slack) {
    std::ostringstream msg;
    msg << "time " << t << " outside record range of component '" << c.label << "'";
    throw InvalidArgument(msg.str());
  }
}

double trajectory_coordinate(const MixtureComponent& c, std::size_t particle, std::size_t axis, double t,
                             std::size_t per) {
  require_in_range(c, t);
  const auto& ts = times_of(c);
  std::vector<double> values(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k)
    values[k] = c.record ? c.record->position[k][particle * per + axis] : (particle == 0 ? c.x1 : c.x2)[k][axis];
  if (const auto k = saved_index(ts, t)) return values[*k];
  return lagrange4(ts, values, t);
}

const WaveFunction& snapshot_at_time(const MixtureComponent& c, double t) {
  require_in_range(c, t);
  const auto k = saved_index(c.record->times, t);
  const WaveFunction* s = k ? c.record->snapshot_at(*k) : nullptr;
  if (!s) {
    std::ostringstream msg;
    msg << "component '" << c.label << "' has no snapshot at t=" << t;
    throw InvalidArgument(msg.str());
  }
  return *s;
}

double product_moment(const WaveFunction& psi, std::size_t a, std::size_t b) {
  const Grid& g = psi.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n)
    s += std::norm(psi.values()[n]) * g.coordinate(a, g.axis_index(n, a)) * g.coordinate(b, g.axis_index(n, b));
  return s * g.cell_volume();
}

}  // namespace

MixtureComponent component_from_record(double weight, TrajectoryRecord record, std::string label) {
  record.validate();
  MixtureComponent c;
  c.weight = weight;
  c.label = std::move(label);
  c.record = std::make_shared<const TrajectoryRecord>(std::move(record));
  return c;
}

MixtureComponent component_from_trajectories(double weight, std::vector<double> times,
                                             std::vector<std::vector<double>> x1, std::vector<std::vector<double>> x2,
                                             std::string label) {
  if (times.empty() || x1.size() != times.size() || x2.size() != times.size())
    throw InvalidArgument("trajectory component needs one position per time for both particles");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InvalidArgument("trajectory times must be strictly increasing");
  MixtureComponent c;
  c.weight = weight;
  c.label = std::move(label);
  c.times = std::move(times);
  c.x1 = std::move(x1);
  c.x2 = std::move(x2);
  return c;
}

MixtureEnsemble reduced_density(std::vector<MixtureComponent> components) {
  if (components.empty()) throw InvalidArgument("mixture needs at least one component");
  MixtureEnsemble e;
  double sum = 0.0;
  for (std::size_t w = 0; w < components.size(); ++w) {
    auto& c = components[w];
    if (c.label.empty()) c.label = "w" + std::to_string(w);
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw InvalidArgument("mixture weights must be nonnegative");
    sum += c.weight;
    std::size_t per = 0;
    if (c.record) {
      if (c.record->units.particles() != 2) throw InvalidArgument("mixture components must be two-particle records");
      per = c.record->dims() / 2;
      for (const auto& s : c.record->snapshots) {
        if (!e.grid) e.grid = s.grid();
        if (!(s.grid() == *e.grid)) throw InvalidArgument("mixture components live on different grids");
      }
    } else {
      per = c.x1.front().size();
      for (std::size_t k = 0; k < c.times.size(); ++k)
        if (c.x1[k].size() != per || c.x2[k].size() != per)
          throw InvalidArgument("trajectory component has inconsistent dimensions");
    }
    if (per == 0) throw InvalidArgument("component has no position axes");
    if (e.axes_per_particle == 0) e.axes_per_particle = per;
    if (per != e.axes_per_particle) throw InvalidArgument("components differ in axes per particle");
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg << "mixture weights sum to " << sum << ", not 1";
    throw InvalidArgument(msg.str());
  }
  e.components = std::move(components);
  return e;
}

RealField MixtureEnsemble::density_at(double t) const {
  if (!grid) throw InvalidArgument("mixture has no wave-function components");
  RealField rho(grid->size(), 0.0);
  for (const auto& c : components) {
    if (!c.record) throw InvalidArgument("component '" + c.label + "' carries no wave function");
    const WaveFunction& s = snapshot_at_time(c, t);
    for (std::size_t n = 0; n < rho.size(); ++n) rho[n] += c.weight * std::norm(s.values()[n]);
  }
  return rho;
}

ClassicalityReport classicality_check(const MixtureEnsemble& e, double tol, const Potential* v, double tol_ehrenfest) {
  if (e.components.empty()) throw InvalidArgument("mixture needs at least one component");
  ClassicalityReport r;
  r.tolerance = tol;
  r.classical = true;
  const std::size_t per = e.axes_per_particle;
  for (const auto& c : e.components) {
    ComponentClassicality cc;
    cc.label = c.label;
    cc.weight = c.weight;
    if (!c.record) {
      cc.dipole1 = cc.dipole2 = cc.cross_dipole = std::nan("");
      cc.passed = true;
      r.components.push_back(cc);
      continue;
    }
    const TrajectoryRecord& rec = *c.record;
    if (rec.snapshots.empty()) throw InvalidArgument("component '" + c.label + "' has no snapshots to audit");
    cc.audited = true;
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
      const WaveFunction& psi = rec.snapshots[s];
      const Grid& g = psi.grid();
      const std::vector<double>& traj = rec.position[rec.snapshot_index[s]];
      std::vector<double> dip(2 * per, 0.0);
      std::vector<double> cross(per * per, 0.0);
      for (std::size_t n = 0; n < g.size(); ++n) {
        const double rho = std::norm(psi.values()[n]);
        std::vector<double> u(2 * per);
        for (std::size_t a = 0; a < 2 * per; ++a) {
          u[a] = g.coordinate(a, g.axis_index(n, a)) - traj[a];
          dip[a] += rho * u[a];
        }
        for (std::size_t i = 0; i < per; ++i)
          for (std::size_t j = 0; j < per; ++j) cross[i * per + j] += rho * u[i] * u[per + j];
      }
      double d1 = 0.0, d2 = 0.0;
      for (std::size_t a = 0; a < per; ++a) {
        d1 += dip[a] * dip[a];
        d2 += dip[per + a] * dip[per + a];
      }
      cc.dipole1 = std::max(cc.dipole1, std::sqrt(d1) * g.cell_volume());
      cc.dipole2 = std::max(cc.dipole2, std::sqrt(d2) * g.cell_volume());
      for (double x : cross) cc.cross_dipole = std::max(cc.cross_dipole, std::abs(x) * g.cell_volume());
    }
    cc.passed = cc.dipole1 < tol && cc.dipole2 < tol && cc.cross_dipole < tol;
    if (v) {
      cc.verdict = emwf_check(rec, *v, tol, tol_ehrenfest).verdict;
      cc.passed = cc.passed && *cc.verdict == Verdict::emwf;
    }
    r.classical = r.classical && cc.passed;
    r.components.push_back(cc);
  }
  return r;
}

MixtureExpectation mixture_expectation(const MixtureEnsemble& e, std::size_t i, std::size_t j, double t,
                                       const ClassicalityReport* audit) {
  const std::size_t per = e.axes_per_particle;
  if (i >= per || j >= per) throw InvalidArgument("axis index exceeds axes per particle");
  MixtureExpectation out;
  out.time = t;
  bool have_quantum = true;
  double quantum = 0.0;
  for (const auto& c : e.components) {
    out.classical += c.weight * trajectory_coordinate(c, 0, i, t, per) * trajectory_coordinate(c, 1, j, t, per);
    if (c.record)
      quantum += c.weight * product_moment(snapshot_at_time(c, t), i, per + j);
    else
      have_quantum = false;
  }
  if (have_quantum) {
    out.quantum = quantum;
    out.residual = std::abs(quantum - out.classical);
  }
  if (audit && !audit->classical) {
    out.warnings.emplace_back("ensemble failed the classicality check; the classical value is not expected to agree");
  }
  return out;
}

std::vector<MixtureExpectation> mixture_series(const MixtureEnsemble& e, std::size_t i, std::size_t j,
                                               const ClassicalityReport* audit) {
  std::vector<MixtureExpectation> out;
  const auto& ref = e.components.front();
  for (std::size_t k = 0; k < times_of(ref).size(); ++k) {
    const double t = times_of(ref)[k];
    bool shared = true;
    for (const auto& c : e.components) {
      const auto& ts = times_of(c);
      if (c.record) {
        const auto idx = saved_index(ts, t);
        shared = shared && idx && c.record->snapshot_at(*idx);
      } else {
        shared = shared && t >= ts.front() && t <= ts.back();
      }
    }
    if (shared) out.push_back(mixture_expectation(e, i, j, t, audit));
  }
  if (audit && !audit->classical) warn("mixture contains components that fail the classicality check");
  return out;
}

std::vector<double> component_residuals(const MixtureEnsemble& e, std::size_t i, std::size_t j) {
  const std::size_t per = e.axes_per_particle;
  std::vector<double> out;
  for (const auto& c : e.components) {
    if (!c.record) {
      out.push_back(std::nan(""));
      continue;
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < c.record->snapshots.size(); ++s) {
      const std::size_t k = c.record->snapshot_index[s];
      const auto& x = c.record->position[k];
      worst = std::max(worst, std::abs(product_moment(c.record->snapshots[s], i, per + j) - x[i] * x[per + j]));
    }
    out.push_back(worst);
  }
  return out;
}

void write_mixture_report(const MixtureEnsemble& e, const ClassicalityReport& audit,
                          const std::vector<MixtureExpectation>& series, const std::filesystem::path& path,
                          std::size_t i, std::size_t j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string());
  const auto residuals = component_residuals(e, i, j);
  out << "w,label,weight,dipole1,dipole2,cross_dipole,verdict,residual\n";
  for (std::size_t w = 0; w < audit.components.size(); ++w) {
    const auto& c = audit.components[w];
    out << w << "," << c.label << "," << format_number(c.weight) << "," << format_number(c.dipole1) << ","
        << format_number(c.dipole2) << "," << format_number(c.cross_dipole) << ","
        << (c.verdict ? to_string(*c.verdict) : std::string(c.audited ? "unclassified" : "unaudited")) << ","
        << format_number(residuals[w]) << "\n";
  }
  double worst = 0.0;
  bool any = false;
  for (const auto& m : series) {
    if (m.residual) {
      worst = std::max(worst, *m.residual);
      any = true;
    }
  }
  out << "mixture,all,1," << "," << "," << "," << (audit.classical ? "classical" : "not_classical") << ","
      << (any ? format_number(worst) : std::string("nan")) << "\n";
  if (!out) throw NumericalFailure("failed writing " + path.string());
}

}  // namespace emwf
