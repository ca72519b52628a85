#include "emwf/effective.hpp"

#include <fstream>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "emwf/error.hpp"
#include "emwf/record_io.hpp"

namespace emwf {

std::string to_string(MultipoleSource s) {
  switch (s) {
    case MultipoleSource::frozen: return "frozen";
    case MultipoleSource::time_interpolated: return "time-interpolated";
    case MultipoleSource::prescribed: return "prescribed";
  }
  return "frozen";
}

double lagrange4(const std::vector<double>& times, const std::vector<double>& values, double t) {
  const std::size_t n = times.size();
  if (n == 0 || values.size() != n) throw InvalidArgument("interpolation needs matching nonempty samples");
  if (n == 1) return values[0];
  const double span = times.back() - times.front();
  const double eps = 1e-9 * std::max(1.0, std::abs(span));
  if (t < times.front() - eps || t > times.back() + eps) {
    std::ostringstream msg;
    msg << "time " << t << " outside sampled range [" << times.front() << ", " << times.back() << "]";
    throw InvalidArgument(msg.str());
  }
  const auto upper = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = upper == times.begin() ? 0 : static_cast<std::size_t>(upper - times.begin()) - 1;
  const std::size_t width = std::min<std::size_t>(4, n);
  const std::size_t start = std::min(i > 0 ? i - 1 : 0, n - width);
  double out = 0.0;
  for (std::size_t j = start; j < start + width; ++j) {
    double w = 1.0;
    for (std::size_t k = start; k < start + width; ++k)
      if (k != j) w *= (t - times[k]) / (times[j] - times[k]);
    out += w * values[j];
  }
  return out;
}

MultipoleSchedule frozen_multipoles(const MultipoleSet& initial) {
  return {MultipoleSource::frozen, [m = initial.density_moments](double) { return m; }};
}

MultipoleSchedule interpolated_multipoles(std::vector<double> times, const std::vector<MultipoleSet>& sets) {
  if (times.size() != sets.size() || times.empty()) throw InvalidArgument("interpolation needs one set per time");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("moment times must be strictly increasing");
  std::map<MultiIndex, std::vector<double>> series;
  for (const auto& [alpha, v] : sets.front().density_moments) {
    std::vector<double> s(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) s[i] = sets[i].density(alpha);
    series[alpha] = std::move(s);
  }
  return {MultipoleSource::time_interpolated, [times = std::move(times), series = std::move(series)](double t) {
            DensityMoments m;
            for (const auto& [alpha, s] : series) m[alpha] = lagrange4(times, s, t);
            return m;
          }};
}

MultipoleSchedule prescribed_multipoles(std::function<DensityMoments(double)> moments) {
  if (!moments) throw InvalidArgument("prescribed moments need a function");
  return {MultipoleSource::prescribed, std::move(moments)};
}

std::pair<std::vector<double>, std::vector<MultipoleSet>> snapshot_multipoles(const TrajectoryRecord& record, int order,
                                                                             unsigned threads) {
  std::vector<double> times;
  for (std::size_t i : record.snapshot_index) times.push_back(record.times[i]);
  return {std::move(times), record_multipoles(record, order, threads)};
}

std::vector<double> effective_force(std::span<const double> x, const Potential& v, const DensityMoments& moments,
                                    int order) {
  if (order < 1) throw InvalidArgument("force order must be at least 1");
  if (v.max_derivative_order() < order + 1) {
    std::ostringstream msg;
    msg << "potential " << v.describe() << " supplies derivatives up to order " << v.max_derivative_order()
        << ", force order " << order << " needs " << order + 1;
    throw InvalidArgument(msg.str());
  }
  const std::size_t d = x.size();
  std::vector<double> f(d);
  for (std::size_t i = 0; i < d; ++i) f[i] = -v.derivative(x, unit_index(d, i));
  for (int n = 2; n <= order; ++n) {
    for (const MultiIndex& alpha : indices_of_order(d, n)) {
      const auto it = moments.find(alpha);
      if (it == moments.end()) throw InvalidArgument("moment " + to_string(alpha) + " missing for force order");
      if (it->second == 0.0) continue;
      const double w = it->second / factorial(alpha);
      for (std::size_t i = 0; i < d; ++i) f[i] -= w * v.derivative(x, add(alpha, unit_index(d, i)));
    }
  }
  return f;
}

std::vector<double> axis_masses(const Units& units, std::size_t dims) {
  if (units.particles() == 0 || dims % units.particles() != 0)
    throw InvalidArgument("axes cannot be split evenly across particles");
  const std::size_t per = dims / units.particles();
  std::vector<double> m(dims);
  for (std::size_t a = 0; a < dims; ++a) m[a] = units.masses[a / per];
  return m;
}

ClassicalTrajectory integrate_effective(const EffectiveState& initial, const Potential& v,
                                        const std::vector<double>& masses, const MultipoleSchedule& schedule,
                                        const std::vector<double>& t_grid, int substeps) {
  const std::size_t d = initial.x.size();
  if (initial.v.size() != d || masses.size() != d) throw InvalidArgument("state and masses differ in dimension");
  if (t_grid.empty()) throw InvalidArgument("time grid is empty");
  if (substeps < 1) throw InvalidArgument("substeps must be positive");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
  for (double c : initial.x)
    if (!std::isfinite(c)) throw InvalidArgument("initial position is not finite");
  for (double c : initial.v)
    if (!std::isfinite(c)) throw InvalidArgument("initial velocity is not finite");

  auto accel = [&](double t, const std::vector<double>& x) {
    std::vector<double> a;
    try {
      a = effective_force(x, v, schedule.at(t), initial.force_order);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "force evaluation failed at t=" << t << ": " << e.what();
      throw NumericalFailure(msg.str());
    }
    for (std::size_t i = 0; i < d; ++i) {
      a[i] /= masses[i];
      if (!std::isfinite(a[i])) {
        std::ostringstream msg;
        msg << "non-finite force at t=" << t;
        throw NumericalFailure(msg.str());
      }
    }
    return a;
  };

  ClassicalTrajectory out;
  out.order = initial.force_order;
  out.source = schedule.source;
  std::vector<double> x = initial.x, vel = initial.v;
  out.times.push_back(t_grid.front());
  out.x.push_back(x);
  out.v.push_back(vel);
  std::vector<double> xt(d);
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double h = (t_grid[k] - t_grid[k - 1]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double t = t_grid[k - 1] + s * h;
      const auto a1 = accel(t, x);
      const std::vector<double> v1 = vel;
      for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + 0.5 * h * v1[i];
      std::vector<double> v2(d);
      for (std::size_t i = 0; i < d; ++i) v2[i] = vel[i] + 0.5 * h * a1[i];
      const auto a2 = accel(t + 0.5 * h, xt);
      for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + 0.5 * h * v2[i];
      std::vector<double> v3(d);
      for (std::size_t i = 0; i < d; ++i) v3[i] = vel[i] + 0.5 * h * a2[i];
      const auto a3 = accel(t + 0.5 * h, xt);
      for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + h * v3[i];
      std::vector<double> v4(d);
      for (std::size_t i = 0; i < d; ++i) v4[i] = vel[i] + h * a3[i];
      const auto a4 = accel(t + h, xt);
      for (std::size_t i = 0; i < d; ++i) {
        x[i] += h / 6.0 * (v1[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
        vel[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
      }
    }
    out.times.push_back(t_grid[k]);
    out.x.push_back(x);
    out.v.push_back(vel);
  }
  return out;
}

TwoBodyForces two_body_force(std::span<const double> x1, std::span<const double> x2, const Potential& v,
                             const DensityMoments& moments, int order, double dipole_tol) {
  const std::size_t per = x1.size();
  if (x2.size() != per || per == 0) throw InvalidArgument("particle positions differ in dimension");
  const std::size_t d = 2 * per;
  auto moment = [&](const MultiIndex& alpha) {
    const auto it = moments.find(alpha);
    return it == moments.end() ? 0.0 : it->second;
  };
  for (std::size_t a = 0; a < d; ++a) {
    if (std::abs(moment(unit_index(d, a))) > dipole_tol)
      throw InvalidArgument("particle dipole " + to_string(unit_index(d, a)) + " does not vanish");
  }
  if (order >= 2) {
    for (std::size_t a = 0; a < per; ++a)
      for (std::size_t b = per; b < d; ++b) {
        const MultiIndex cross = add(unit_index(d, a), unit_index(d, b));
        if (std::abs(moment(cross)) > dipole_tol) throw InvalidArgument("cross dipole " + to_string(cross) + " does not vanish");
      }
  }
  std::vector<double> x(x1.begin(), x1.end());
  x.insert(x.end(), x2.begin(), x2.end());
  const auto f = effective_force(x, v, moments, order);
  return {std::vector<double>(f.begin(), f.begin() + static_cast<long>(per)),
          std::vector<double>(f.begin() + static_cast<long>(per), f.end())};
}

std::vector<double> relativistic_relative_momentum(std::span<const double> velocity, double m, double c) {
  if (!(m > 0.0) || !(c > 0.0)) throw InvalidArgument("mass and c must be positive");
  double v2 = 0.0;
  for (double u : velocity) v2 += u * u;
  if (!(v2 < 4.0 * c * c)) throw InvalidArgument("relative speed must stay below 2c");
  const double scale = m / std::sqrt(4.0 - v2 / (c * c));
  std::vector<double> pi(velocity.begin(), velocity.end());
  for (double& p : pi) p *= scale;
  return pi;
}

std::vector<double> relativistic_relative_velocity(std::span<const double> pi, double m1, double m2, double c) {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(c > 0.0)) throw InvalidArgument("masses and c must be positive");
  double p2 = 0.0;
  for (double p : pi) p2 += p * p;
  const double scale = c * (1.0 / std::sqrt(m1 * m1 * c * c + p2) + 1.0 / std::sqrt(m2 * m2 * c * c + p2));
  std::vector<double> v(pi.begin(), pi.end());
  for (double& u : v) u *= scale;
  return v;
}

ComparisonMetrics compare_trajectories(const std::vector<double>& quantum_times,
                                       const std::vector<std::vector<double>>& quantum_x,
                                       const ClassicalTrajectory& classical, double threshold, double hbar,
                                       double scale) {
  if (quantum_times.size() != quantum_x.size()) throw InvalidArgument("quantum times and positions differ in length");
  if (classical.times.empty()) throw InvalidArgument("classical trajectory is empty");
  const double lo = classical.times.front(), hi = classical.times.back();
  const double eps = 1e-9 * std::max(1.0, hi - lo);
  const std::size_t d = classical.x.front().size();
  std::vector<std::vector<double>> columns(d, std::vector<double>(classical.times.size()));
  for (std::size_t k = 0; k < classical.times.size(); ++k)
    for (std::size_t a = 0; a < d; ++a) columns[a][k] = classical.x[k][a];

  ComparisonMetrics m;
  double sum2 = 0.0;
  std::size_t count = 0;
  bool exceeded = false;
  for (std::size_t k = 0; k < quantum_times.size(); ++k) {
    const double t = quantum_times[k];
    if (t < lo - eps || t > hi + eps) continue;
    if (quantum_x[k].size() != d) throw InvalidArgument("quantum and classical trajectories differ in dimension");
    double e2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double diff = quantum_x[k][a] - lagrange4(classical.times, columns[a], std::clamp(t, lo, hi));
      e2 += diff * diff;
    }
    const double e = std::sqrt(e2);
    m.max_position_error = std::max(m.max_position_error, e);
    sum2 += e2;
    ++count;
    if (!exceeded) {
      m.horizon = t;
      if (e > threshold) exceeded = true;
    }
  }
  if (count == 0) throw InvalidArgument("quantum and classical time ranges are disjoint");
  m.rms_position_error = std::sqrt(sum2 / static_cast<double>(count));
  m.error_vs_hbar2_bound = m.max_position_error / (hbar * hbar * scale);
  return m;
}

void write_classical_trajectory(const ClassicalTrajectory& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string());
  const std::size_t d = c.x.empty() ? 0 : c.x.front().size();
  out << "t";
  for (std::size_t a = 0; a < d; ++a) out << ",x" << a;
  for (std::size_t a = 0; a < d; ++a) out << ",v" << a;
  out << "\n";
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    out << format_number(c.times[k]);
    for (double x : c.x[k]) out << "," << format_number(x);
    for (double v : c.v[k]) out << "," << format_number(v);
    out << "\n";
  }
  if (!out) throw NumericalFailure("failed writing " + path.string());
}

}  // namespace emwf
