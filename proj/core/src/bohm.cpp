#include "emwf/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "emwf/diagnostics.hpp"
#include "emwf/error.hpp"
#include "emwf/parallel.hpp"
#include "emwf/record_io.hpp"
#include "emwf/spectral.hpp"

namespace emwf {
namespace {

double max_density(const ComplexField& psi) {
  double m = 0.0;
  for (const auto& z : psi) m = std::max(m, std::norm(z));
  return m;
}

// v_B at arbitrary points from band-limited refinements of psi and grad psi.
class VelocitySampler {
 public:
  VelocitySampler(const WaveFunction& psi, const BohmOptions& opt)
      : psi_(upsample(psi.grid(), psi.values(), opt.upsample), opt.stencil),
        threshold_(opt.node_fraction * max_density(psi.values())),
        hbar_(psi.hbar()) {
    for (std::size_t a = 0; a < psi.grid().dims(); ++a) {
      grad_.emplace_back(upsample(psi.grid(), spectral_gradient(psi, a), opt.upsample), opt.stencil);
      masses_.push_back(psi.mass(a));
    }
  }

  // False when x lies on the node mask.
  bool velocity(std::span<const double> x, std::span<double> out) const {
    const Complex z = psi_(x);
    const double rho = std::norm(z);
    if (!(rho >= threshold_) || rho == 0.0) return false;
    for (std::size_t a = 0; a < grad_.size(); ++a) out[a] = hbar_ * std::imag(std::conj(z) * grad_[a](x)) / (masses_[a] * rho);
    return true;
  }

 private:
  LocalInterpolator psi_;
  std::vector<LocalInterpolator> grad_;
  std::vector<double> masses_;
  double threshold_;
  double hbar_;
};

std::vector<double> lagrange_weights(const std::vector<double>& nodes, double t) {
  std::vector<double> w(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t l = 0; l < nodes.size(); ++l)
      if (l != j) w[j] *= (t - nodes[l]) / (nodes[j] - nodes[l]);
  return w;
}

std::vector<std::size_t> time_window(std::size_t i, std::size_t n) {
  const std::size_t width = std::min<std::size_t>(4, n);
  const std::size_t start = std::min(i == 0 ? 0 : i - 1, n - width);
  std::vector<std::size_t> w(width);
  std::iota(w.begin(), w.end(), start);
  return w;
}

}  // namespace

PilotWaveFields pilot_fields(const WaveFunction& psi, double node_fraction) {
  const Grid& g = psi.grid();
  const std::size_t d = g.dims();
  const auto& v = psi.values();
  const double hbar = psi.hbar();
  PilotWaveFields f{g, psi.time(), RealField(g.size()), std::vector<RealField>(d, RealField(g.size(), 0.0)),
                    RealField(g.size(), 0.0), std::vector<unsigned char>(g.size(), 0),
                    node_fraction * max_density(v)};
  std::vector<ComplexField> d1(d), d2(d);
  for (std::size_t a = 0; a < d; ++a) {
    d1[a] = spectral_gradient(psi, a);
    MultiIndex two(d, 0);
    two[a] = 2;
    d2[a] = spectral_derivative(g, v, two);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = std::norm(v[i]);
    f.sqrt_density[i] = std::sqrt(rho);
    if (!(rho >= f.node_threshold) || rho == 0.0) {
      f.node_mask[i] = 1;
      continue;
    }
    double q = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double m = psi.mass(a);
      const double j = hbar * std::imag(std::conj(v[i]) * d1[a][i]);
      f.velocity[a][i] = j / (m * rho);
      const double im_g = std::imag(std::conj(v[i]) * d1[a][i]) / rho;
      const double re_h = std::real(std::conj(v[i]) * d2[a][i]) / rho;
      q -= hbar * hbar / (2.0 * m) * (re_h + im_g * im_g);
    }
    f.quantum_potential[i] = q;
  }
  return f;
}

std::vector<RealField> log_derivative_velocity(const WaveFunction& psi, double node_fraction) {
  const Grid& g = psi.grid();
  const auto& v = psi.values();
  const double threshold = node_fraction * max_density(v);
  std::vector<RealField> out(g.dims(), RealField(g.size()));
  for (std::size_t a = 0; a < g.dims(); ++a) {
    const ComplexField d = spectral_gradient(psi, a);
    for (std::size_t i = 0; i < g.size(); ++i)
      out[a][i] = std::norm(v[i]) < threshold || v[i] == 0.0 ? std::nan("")
                                                            : psi.hbar() / psi.mass(a) * std::imag(d[i] / v[i]);
  }
  return out;
}

std::size_t BohmBundle::completed() const {
  return static_cast<std::size_t>(std::count(truncated.begin(), truncated.end(), 0));
}

std::vector<std::vector<double>> BohmBundle::final_positions() const {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < seeds(); ++s)
    if (!truncated[s]) out.push_back(positions[s].back());
  return out;
}

BohmBundle integrate_bohm_trajectories(const TrajectoryRecord& rec, const std::vector<std::vector<double>>& seeds,
                                       const BohmOptions& opt) {
  rec.validate();
  if (!rec.has_all_snapshots()) throw InvalidArgument("Bohm trajectories need a snapshot at every saved time");
  if (rec.size() < 2) throw InvalidArgument("Bohm trajectories need at least two saved times");
  const std::size_t d = rec.snapshots.front().grid().dims();
  const std::size_t n = rec.size();
  const std::size_t ns = seeds.size();

  std::map<std::size_t, std::shared_ptr<const VelocitySampler>> cache;
  const auto sampler = [&](std::size_t i) {
    auto it = cache.find(i);
    if (it == cache.end()) it = cache.emplace(i, std::make_shared<VelocitySampler>(rec.snapshots[i], opt)).first;
    return it->second;
  };

  BohmBundle b;
  b.times = rec.times;
  b.positions.resize(ns);
  b.truncated.assign(ns, 0);
  b.truncated_at.assign(ns, std::nan(""));
  {
    const auto s0 = sampler(0);
    std::vector<double> v(d);
    for (std::size_t s = 0; s < ns; ++s) {
      if (seeds[s].size() != d) throw InvalidArgument("seed " + std::to_string(s) + " has wrong dimension");
      if (!s0->velocity(seeds[s], v)) throw InvalidArgument("seed " + std::to_string(s) + " lies on a node");
      b.positions[s].push_back(seeds[s]);
    }
  }

  std::vector<std::size_t> order(ns);
  std::iota(order.begin(), order.end(), 0);
  if (d == 1) std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return seeds[x][0] < seeds[y][0]; });

  std::vector<double> delta(ns), speed(ns);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (auto it = cache.begin(); it != cache.end();)
      it = it->first + 1 < i ? cache.erase(it) : std::next(it);
    const double h = rec.times[i + 1] - rec.times[i];
    const auto window = time_window(i, n);
    std::vector<double> nodes;
    std::vector<std::shared_ptr<const VelocitySampler>> fields;
    for (std::size_t j : window) {
      nodes.push_back(rec.times[j]);
      fields.push_back(sampler(j));
    }
    const auto w_mid = lagrange_weights(nodes, rec.times[i] + 0.5 * h);
    const auto now = sampler(i), next = sampler(i + 1);

    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(speed.begin(), speed.end(), 0.0);
    parallel_for(ns, opt.threads, [&](std::size_t s) {
      if (b.truncated[s]) return;
      const std::vector<double>& x = b.positions[s].back();
      std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d), y(d);
      const auto mid = [&](std::span<const double> p, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t j = 0; j < fields.size(); ++j) {
          if (!fields[j]->velocity(p, tmp)) return false;
          for (std::size_t a = 0; a < d; ++a) out[a] += w_mid[j] * tmp[a];
        }
        return true;
      };
      bool ok = now->velocity(x, k1);
      for (std::size_t a = 0; ok && a < d; ++a) y[a] = x[a] + 0.5 * h * k1[a];
      ok = ok && mid(y, k2);
      for (std::size_t a = 0; ok && a < d; ++a) y[a] = x[a] + 0.5 * h * k2[a];
      ok = ok && mid(y, k3);
      for (std::size_t a = 0; ok && a < d; ++a) y[a] = x[a] + h * k3[a];
      ok = ok && next->velocity(y, k4);
      if (!ok) {
        b.truncated[s] = 1;
        b.truncated_at[s] = rec.times[i];
        return;
      }
      std::vector<double> xn(d);
      double dv = 0.0, sp = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        xn[a] = x[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        dv += (k4[a] - k1[a]) * (k4[a] - k1[a]);
        sp += k1[a] * k1[a];
      }
      delta[s] = std::sqrt(dv);
      speed[s] = std::sqrt(sp);
      b.positions[s].push_back(std::move(xn));
    });

    const double scale = *std::max_element(speed.begin(), speed.end());
    const double change = *std::max_element(delta.begin(), delta.end());
    if (change > 0.0) b.max_relative_velocity_change = std::max(b.max_relative_velocity_change, change / std::max(scale, 1e-300));

    if (d == 1) {
      const std::vector<double>* prev = nullptr;
      std::size_t prev_seed = 0;
      for (std::size_t s : order) {
        if (b.truncated[s]) continue;
        const auto& cur = b.positions[s].back();
        if (prev && seeds[prev_seed][0] < seeds[s][0] && !((*prev)[0] < cur[0])) b.order_preserved = false;
        prev = &cur;
        prev_seed = s;
      }
    }
  }
  if (b.max_relative_velocity_change > opt.velocity_change_warning) {
    std::ostringstream msg;
    msg << "Bohm velocity changes by " << b.max_relative_velocity_change
        << " of the speed scale between saved times; refine the save stride";
    warn(msg.str());
  }
  if (!b.order_preserved) warn("Bohm trajectories crossed in 1D; refine the save stride");
  return b;
}

std::vector<std::vector<double>> seed_uniform(const std::vector<double>& lo, const std::vector<double>& hi,
                                              std::size_t count, std::uint64_t seed) {
  if (lo.size() != hi.size() || lo.empty()) throw InvalidArgument("seed region bounds differ in dimension");
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(hi[a] > lo[a])) throw InvalidArgument("seed region is empty");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(count, std::vector<double>(lo.size()));
  for (auto& p : out)
    for (std::size_t a = 0; a < lo.size(); ++a) p[a] = std::uniform_real_distribution<double>(lo[a], hi[a])(rng);
  return out;
}

std::vector<std::vector<double>> seed_from_density(const WaveFunction& psi, std::size_t count,
                                                   std::optional<std::uint64_t> seed) {
  const Grid& g = psi.grid();
  const std::size_t d = g.dims();
  std::mt19937_64 rng(seed.value_or(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto level = [&](std::size_t k) {
    return seed ? unit(rng) : (static_cast<double>(k) + 0.5) / static_cast<double>(count);
  };
  std::vector<std::vector<double>> out;
  out.reserve(count);
  if (d == 1) {
    const std::size_t n = g.size();
    const double h = g.spacing(0);
    RealField rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = std::norm(psi.values()[i]);
    RealField cdf(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + 0.5 * (rho[i] + rho[(i + 1) % n]) * h;
    if (!(cdf[n] > 0.0)) throw DegenerateState("cannot seed from a vanishing density");
    for (std::size_t k = 0; k < count; ++k) {
      const double target = level(k) * cdf[n];
      const std::size_t c =
          std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin()) - 1);
      const double r0 = rho[c], r1 = rho[(c + 1) % n];
      const double need = target - cdf[c];
      // r0 s + (r1 - r0) s^2 / (2h) = need
      const double a = (r1 - r0) / (2.0 * h);
      double s = std::abs(a) < 1e-300 ? (r0 > 0 ? need / r0 : 0.5 * h)
                                      : (-r0 + std::sqrt(std::max(0.0, r0 * r0 + 4.0 * a * need))) / (2.0 * a);
      s = std::clamp(s, 0.0, h);
      double x = g.coordinate(0, c) + s;
      if (x >= 0.5 * g.extent(0)) x -= g.extent(0);
      out.push_back({x});
    }
    return out;
  }
  RealField cdf(g.size() + 1, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) cdf[i + 1] = cdf[i] + std::norm(psi.values()[i]);
  if (!(cdf.back() > 0.0)) throw DegenerateState("cannot seed from a vanishing density");
  for (std::size_t k = 0; k < count; ++k) {
    const double target = level(k) * cdf.back();
    const std::size_t c = std::min<std::size_t>(
        g.size() - 1, static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin()) - 1);
    std::vector<double> x(d);
    for (std::size_t a = 0; a < d; ++a)
      x[a] = g.coordinate(a, g.axis_index(c, a)) + (unit(rng) - 0.5) * g.spacing(a);
    out.push_back(std::move(x));
  }
  return out;
}

EquivarianceReport equivariance_check(const BohmBundle& bundle, const WaveFunction& psi, std::size_t bins, double lo,
                                      double hi) {
  const Grid& g = psi.grid();
  if (g.dims() != 1) throw InvalidArgument("equivariance histogram is 1D");
  if (bins == 0 || !(hi > lo)) throw InvalidArgument("histogram range is empty");
  if (bundle.seeds() == 0) throw InvalidArgument("empty trajectory bundle");
  EquivarianceReport r{0.0, bundle.seeds(), bundle.seeds() - bundle.completed(), RealField(bins, 0.0),
                       RealField(bins, 0.0)};
  const double width = (hi - lo) / static_cast<double>(bins);
  const auto bin_of = [&](double x) -> long {
    if (x < lo || x >= hi) return -1;
    return std::min(static_cast<long>(bins) - 1, static_cast<long>((x - lo) / width));
  };
  double outside = 0.0;
  for (const auto& p : bundle.final_positions()) {
    const long k = bin_of(p[0]);
    if (k < 0)
      outside += 1.0;
    else
      r.histogram[static_cast<std::size_t>(k)] += 1.0;
  }
  const double total = static_cast<double>(r.samples);
  for (double& h : r.histogram) h /= total;
  outside /= total;

  const SampledField fine = upsample(g, psi.values(), 8);
  double expected_outside = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < fine.grid.size(); ++i) {
    const double m = std::norm(fine.values[i]) * fine.grid.spacing(0);
    mass += m;
    const long k = bin_of(fine.grid.coordinate(0, i));
    if (k < 0)
      expected_outside += m;
    else
      r.expected[static_cast<std::size_t>(k)] += m;
  }
  for (double& e : r.expected) e /= mass;
  expected_outside /= mass;

  double tv = std::abs(outside - expected_outside) + static_cast<double>(r.lost) / total;
  for (std::size_t k = 0; k < bins; ++k) tv += std::abs(r.histogram[k] - r.expected[k]);
  r.tv_distance = 0.5 * tv;
  return r;
}

EulerResidual euler_residual(const TrajectoryRecord& rec, const Potential& pot, double evaluation_fraction) {
  rec.validate();
  if (rec.size() < 3) throw InvalidArgument("Euler residual needs at least three saved times");
  if (!rec.has_all_snapshots()) throw InvalidArgument("Euler residual needs a snapshot at every saved time");
  const double h = rec.uniform_stride();
  const Grid& g = rec.snapshots.front().grid();
  const std::size_t d = g.dims();
  const double hbar = rec.snapshots.front().hbar();

  std::vector<RealField> grad_v(d);
  for (std::size_t a = 0; a < d; ++a) grad_v[a] = pot.sample_derivative(g, unit_index(d, a));

  const auto velocity = [&](const WaveFunction& psi) {
    std::vector<RealField> out(d, RealField(g.size(), 0.0));
    for (std::size_t a = 0; a < d; ++a) {
      const ComplexField da = spectral_gradient(psi, a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double rho = std::norm(psi.values()[i]);
        if (rho > 0.0) out[a][i] = hbar * std::imag(std::conj(psi.values()[i]) * da[i]) / (psi.mass(a) * rho);
      }
    }
    return out;
  };

  EulerResidual r;
  r.stride = h;
  for (std::size_t k = 1; k + 1 < rec.size(); ++k) {
    const WaveFunction& psi = rec.snapshots[k];
    const auto& v = psi.values();
    const auto before = velocity(rec.snapshots[k - 1]);
    const auto after = velocity(rec.snapshots[k + 1]);
    std::map<MultiIndex, ComplexField> deriv;
    const auto get = [&](const MultiIndex& alpha) -> const ComplexField& {
      auto it = deriv.find(alpha);
      if (it == deriv.end()) it = deriv.emplace(alpha, spectral_derivative(g, v, alpha)).first;
      return it->second;
    };
    for (const auto& alpha : indices_up_to(d, 3))
      if (order(alpha) > 0) get(alpha);

    const double threshold = evaluation_fraction * max_density(v);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double rho = std::norm(v[i]);
      if (rho < threshold || rho == 0.0) continue;
      const Complex inv = 1.0 / v[i];
      std::vector<Complex> gl(d);
      for (std::size_t a = 0; a < d; ++a) gl[a] = get(unit_index(d, a))[i] * inv;
      const auto hess = [&](std::size_t a, std::size_t b) { return get(add(unit_index(d, a), unit_index(d, b)))[i] * inv; };
      for (std::size_t a = 0; a < d; ++a) {
        const double ma = psi.mass(a);
        double convect = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
          const double vb = hbar / psi.mass(b) * gl[b].imag();
          const double dbva = hbar / ma * std::imag(hess(a, b) - gl[a] * gl[b]);
          convect += vb * dbva;
        }
        double dq = 0.0;
        for (std::size_t b = 0; b < d; ++b) {
          const MultiIndex abb = add(unit_index(d, a), add(unit_index(d, b), unit_index(d, b)));
          const Complex hbb = hess(b, b);
          const Complex d_hbb = get(abb)[i] * inv - hbb * gl[a];
          const Complex d_gb = hess(a, b) - gl[a] * gl[b];
          dq -= hbar * hbar / (2.0 * psi.mass(b)) * (d_hbb.real() + 2.0 * gl[b].imag() * d_gb.imag());
        }
        const double dvdt = (after[a][i] - before[a][i]) / (2.0 * h);
        const double res = ma * (dvdt + convect) + grad_v[a][i] + dq;
        worst = std::max(worst, std::abs(res));
      }
    }
    r.times.push_back(rec.times[k]);
    r.max_residual.push_back(worst);
    r.overall_max = std::max(r.overall_max, worst);
  }
  return r;
}

MonopoleRelation monopole_relation_check(const WaveFunction& psi, const MultipoleSet& m, int order_n,
                                         double node_fraction) {
  const Grid& g = psi.grid();
  const std::size_t d = g.dims();
  if (m.dims() != d) throw InvalidArgument("multipoles and state differ in dimension");
  if (order_n < 0 || m.order < order_n) throw InvalidArgument("multipoles do not reach the requested order");
  const BandLimitedField field(g, psi.values());
  const std::vector<double>& c = m.center;
  std::map<MultiIndex, Complex> dpsi;
  for (const auto& beta : indices_up_to(d, order_n + 1)) dpsi[beta] = field.derivative(c, beta);
  const Complex psi0 = dpsi[MultiIndex(d, 0)];
  if (std::norm(psi0) < node_fraction * max_density(psi.values()) || psi0 == 0.0)
    throw DegenerateState("expansion center lies on a node of psi");

  MonopoleRelation r;
  r.momentum = momentum_expectation(psi);
  r.partial_sums.assign(static_cast<std::size_t>(order_n) + 1, std::vector<double>(d, 0.0));
  for (std::size_t rr = 0; rr < d; ++rr) {
    const MultiIndex er = unit_index(d, rr);
    // d^alpha g_r with g_r = d_r psi / psi, by the Leibniz rule applied to d_r psi = g_r psi
    std::map<MultiIndex, Complex> dg;
    for (int n = 0; n <= order_n; ++n) {
      for (const auto& alpha : indices_of_order(d, n)) {
        Complex s = dpsi[add(alpha, er)];
        for (const auto& beta : sub_indices(alpha))
          if (beta != alpha) s -= binomial(alpha, beta) * dg[beta] * dpsi[subtract(alpha, beta)];
        dg[alpha] = s / psi0;
      }
    }
    double sum = 0.0;
    for (int n = 0; n <= order_n; ++n) {
      for (const auto& alpha : indices_of_order(d, n))
        sum += m.density(alpha) / factorial(alpha) * psi.hbar() * dg[alpha].imag();
      r.partial_sums[static_cast<std::size_t>(n)][rr] = sum;
    }
  }
  r.bohm_momentum = r.partial_sums.front();
  for (const auto& p : r.partial_sums) {
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a) worst = std::max(worst, std::abs(r.momentum[a] - p[a]));
    r.remainder.push_back(worst);
  }
  return r;
}

void write_bohm_trajectories(const BohmBundle& b, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string());
  const std::size_t d = b.positions.empty() ? 0 : b.positions.front().front().size();
  out << "seed_id,t";
  for (std::size_t a = 0; a < d; ++a) out << ",x" << a;
  out << "\n";
  for (std::size_t s = 0; s < b.seeds(); ++s) {
    for (std::size_t k = 0; k < b.positions[s].size(); ++k) {
      out << s << "," << format_number(b.times[k]);
      for (double x : b.positions[s][k]) out << "," << format_number(x);
      out << "\n";
    }
  }
  if (!out) throw NumericalFailure("failed writing " + path.string());
}

void write_pilot_fields(const PilotWaveFields& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_real_dump(dir / "sqrt_density.bin", f.grid, f.sqrt_density);
  write_real_dump(dir / "quantum_potential.bin", f.grid, f.quantum_potential);
  for (std::size_t a = 0; a < f.velocity.size(); ++a)
    write_real_dump(dir / ("velocity_" + std::to_string(a) + ".bin"), f.grid, f.velocity[a]);
}

}  // namespace emwf
