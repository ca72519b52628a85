#include "emwf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "emwf/bohm.hpp"
#include "emwf/classifier.hpp"
#include "emwf/diagnostics.hpp"
#include "emwf/dynamics.hpp"
#include "emwf/effective.hpp"
#include "emwf/error.hpp"
#include "emwf/mixtures.hpp"
#include "emwf/moments.hpp"
#include "emwf/record_io.hpp"
#include "emwf/states.hpp"
#include "emwf/wigner.hpp"

namespace emwf {

namespace fs = std::filesystem;

std::string to_string(StageStatus s) {
  switch (s) {
    case StageStatus::pass: return "pass";
    case StageStatus::fail: return "fail";
    case StageStatus::skip: return "skip";
    case StageStatus::error: return "error";
  }
  return "error";
}

namespace {

// Minima above -floor * max|W| count as roundoff, not negativity.
constexpr double kNegativityFloor = 1e-6;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class WarningCapture {
 public:
  explicit WarningCapture(std::vector<std::string>& sink) {
    previous_ = set_warning_handler([&sink, this](const std::string& m) {
      sink.push_back(m);
      if (previous_) previous_(m);
    });
  }
  ~WarningCapture() { set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

 private:
  WarningHandler previous_;
};

// State shared between stages of one run.
struct Context {
  Context(const Scenario& scenario, const RunOptions& options, fs::path out)
      : s(scenario), opt(options), dir(std::move(out)) {}

  const Scenario& s;
  const RunOptions& opt;
  fs::path dir;
  std::uint64_t seed = 0;
  PotentialPtr v;
  std::optional<TrajectoryRecord> record;
  std::vector<double> moment_times;
  std::vector<MultipoleSet> moment_sets;
  std::optional<Verdict> verdict;
  std::optional<double> momentum_drift;
  std::vector<double> effective_rms;
  std::vector<double> effective_max;
  std::optional<double> tv;
  std::optional<double> wigner_min;
  double wigner_max = 0.0;
  std::optional<double> monopole_remainder;
  std::optional<bool> mixture_classical;
  std::optional<double> mixture_residual;
};

EvolveOptions evolve_options(const Scenario& s, const std::string& hash) {
  EvolveOptions o;
  o.t_final = s.integrator.t_final;
  o.dt = s.integrator.dt;
  o.save_stride = s.integrator.save_stride;
  o.snapshot_every = s.integrator.snapshot_every;
  o.scenario_hash = hash;
  return o;
}

TrajectoryRecord evolve_state(const Context& c, const WaveFunction& psi0) {
  const EvolveOptions o = evolve_options(c.s, scenario_hash(c.s));
  if (c.s.integrator.kind == "relativistic") {
    const auto& m = c.s.units.masses;
    return evolve_relativistic(psi0, m.at(0), m.at(1), *c.s.units.c, c.v.get(), o, c.s.integrator.subtract_rest);
  }
  return evolve(psi0, *c.v, o);
}

void stage_evolve(Context& c, StageResult& r) {
  const WaveFunction psi0 = build_initial_state(c.s);
  c.record = evolve_state(c, psi0);
  write_record(*c.record, c.dir, RecordWriteOptions{c.s.output.snapshots});
  const TrajectoryRecord& rec = *c.record;
  r.details.push_back("saved times: " + std::to_string(rec.size()) + ", snapshots: " +
                      std::to_string(rec.snapshots.size()));
  r.details.push_back("integrator: " + rec.meta.integrator + ", steps: " + std::to_string(rec.meta.steps));
  double norm_drift = 0.0, energy_drift = 0.0, p_drift = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    norm_drift = std::max(norm_drift, std::abs(rec.norm[k] - rec.norm[0]));
    energy_drift = std::max(energy_drift, std::abs(rec.energy[k] - rec.energy[0]));
    for (std::size_t a = 0; a < rec.dims(); ++a)
      p_drift = std::max(p_drift, std::abs(rec.momentum[k][a] - rec.momentum[0][a]));
  }
  r.details.push_back("norm drift: " + num(norm_drift) + ", energy drift: " + num(energy_drift));
  r.details.push_back("momentum drift: " + num(p_drift));
  c.momentum_drift = p_drift;
}

int needed_moment_order(const Scenario& s) {
  int order = 2;
  if (const auto* e = s.find<EffectiveSpec>()) order = std::max(order, e->orders.back());
  if (const auto* b = s.find<BohmSpec>()) order = std::max(order, b->monopole_order);
  return order;
}

void stage_moments(Context& c, StageResult& r) {
  const int order = needed_moment_order(c.s);
  auto [times, sets] = snapshot_multipoles(*c.record, order, c.opt.threads);
  write_moments_csv(c.dir / "moments.csv", times, sets);
  double max_var = 0.0;
  for (const auto& m : sets)
    for (std::size_t a = 0; a < m.dims(); ++a) max_var = std::max(max_var, m.covariance()[a][a]);
  r.details.push_back("order: " + std::to_string(order) + ", sets: " + std::to_string(sets.size()));
  r.details.push_back("max variance: " + num(max_var));
  c.moment_times = std::move(times);
  c.moment_sets = std::move(sets);
}

void stage_classify(Context& c, StageResult& r) {
  const ClassificationReport rep = emwf_check(*c.record, *c.v, c.s.tolerances.dipole * c.opt.tol_scale,
                                              c.s.tolerances.ehrenfest * c.opt.tol_scale);
  write_classification(rep, c.dir);
  c.verdict = rep.verdict;
  double dmax = 0.0;
  for (double d : rep.dipole.dipole_norm)
    if (std::isfinite(d)) dmax = std::max(dmax, d);
  r.details.push_back("verdict: " + to_string(rep.verdict));
  r.details.push_back("dipole audit max: " + num(dmax) + " (tol " + num(rep.tol_dipole) + ")");
  r.details.push_back("res1 max: " + num(rep.residuals.max_res1()) + ", res2 max: " + num(rep.residuals.max_res2()) +
                      " (tol " + num(rep.tol_ehrenfest_effective) + " at stride " + num(rep.residuals.stride) + ")");
  for (const auto& n : rep.notes) r.details.push_back("note: " + n);
}

void stage_effective(Context& c, const EffectiveSpec& e, StageResult& r) {
  const TrajectoryRecord& rec = *c.record;
  const std::vector<double> masses = axis_masses(rec.units, rec.dims());
  EffectiveState init;
  init.t = rec.times.front();
  if (e.x0) {
    init.x = *e.x0;
    init.v = *e.v0;
  } else {
    init.x = rec.position.front();
    init.v.resize(rec.dims());
    for (std::size_t a = 0; a < rec.dims(); ++a) init.v[a] = rec.momentum.front()[a] / masses[a];
  }
  const MultipoleSchedule schedule = e.source == MultipoleSource::time_interpolated
                                         ? interpolated_multipoles(c.moment_times, c.moment_sets)
                                         : frozen_multipoles(c.moment_sets.front());
  r.details.push_back("multipole source: " + to_string(e.source) + ", cauchy data: " +
                      (e.x0 ? std::string("explicit") : std::string("record")));
  r.details.push_back("N  rms_error  max_error  horizon");
  ClassicalTrajectory last;
  for (int n : e.orders) {
    init.force_order = n;
    ClassicalTrajectory traj = integrate_effective(init, *c.v, masses, schedule, rec.times, e.substeps);
    const ComparisonMetrics m = compare_trajectories(rec.times, rec.position, traj, e.threshold, rec.units.hbar);
    write_classical_trajectory(traj, c.dir / ("classical_N" + std::to_string(n) + ".csv"));
    r.details.push_back(std::to_string(n) + "  " + num(m.rms_position_error) + "  " + num(m.max_position_error) +
                        "  " + num(m.horizon));
    c.effective_rms.push_back(m.rms_position_error);
    c.effective_max.push_back(m.max_position_error);
    last = std::move(traj);
  }
  write_classical_trajectory(last, c.dir / "classical.csv");
}

std::size_t nearest_snapshot(const TrajectoryRecord& rec, double at) {
  if (at < 0.0) return rec.snapshots.size() - 1;
  std::size_t best = 0;
  for (std::size_t k = 1; k < rec.snapshots.size(); ++k)
    if (std::abs(rec.times[rec.snapshot_index[k]] - at) < std::abs(rec.times[rec.snapshot_index[best]] - at)) best = k;
  return best;
}

void stage_wigner(Context& c, const WignerSpec& w, StageResult& r) {
  const TrajectoryRecord& rec = *c.record;
  const std::size_t k = nearest_snapshot(rec, w.at);
  const WaveFunction psi = normalize(rec.snapshots[k]);
  const WignerGrid W = wigner_transform(psi, c.opt.threads);
  write_wigner_binary(W, c.dir / "wigner.bin");
  write_wigner_csv(W, c.dir / "wigner.csv", w.csv_stride);

  const Marginals mg = marginals(W);
  double pos_err = 0.0;
  for (std::size_t i = 0; i < psi.values().size(); ++i)
    pos_err = std::max(pos_err, std::abs(mg.position[i] - std::norm(psi.values()[i])));
  double p_norm = 0.0;
  double dp = 1.0;
  for (std::size_t a = 0; a < psi.grid().dims(); ++a) dp *= 2.0 * M_PI * psi.hbar() / psi.grid().extent(a);
  for (double v : mg.momentum) p_norm += v * dp;

  const std::vector<double> center = position_expectation(psi);
  const MultipoleSet ms = central_moments(density(psi), center, 2);
  const CommutatorCheck cc = commutator_check(psi, ms);
  const WignerCoefficients coef = wigner_multipole_coefficients(psi, center, w.c_max, 0);
  const std::vector<double> p = momentum_expectation(psi);
  double coef_err = 0.0;
  for (std::size_t a = 0; a < psi.grid().dims(); ++a) {
    MultiIndex gamma(psi.grid().dims(), 0);
    gamma[a] = 1;
    coef_err = std::max(coef_err, std::abs(coef.at(gamma, MultiIndex(psi.grid().dims(), 0)) - p[a]));
  }
  c.wigner_min = W.min_value();
  for (double v : W.values) c.wigner_max = std::max(c.wigner_max, std::abs(v));
  r.details.push_back("time: " + num(rec.times[rec.snapshot_index[k]]));
  r.details.push_back("min W: " + num(W.min_value()) + ", purity: " + num(purity(W)));
  r.details.push_back("position marginal error: " + num(pos_err) + ", momentum marginal mass: " + num(p_norm));
  r.details.push_back("momentum coefficient error: " + num(coef_err) +
                      ", commutator error: " + num(cc.max_commutator_error));
  r.details.push_back("imaginary residue: " + num(W.imaginary_residue));
}

void stage_bohm(Context& c, const BohmSpec& b, StageResult& r) {
  const TrajectoryRecord& rec = *c.record;
  const WaveFunction& psi0 = rec.snapshots.front();
  const Grid& g = psi0.grid();
  std::vector<double> lo(g.dims()), hi(g.dims());
  for (std::size_t a = 0; a < g.dims(); ++a) {
    lo[a] = b.lo ? (*b.lo)[a] : -0.5 * g.extent(a);
    hi[a] = b.hi ? (*b.hi)[a] : 0.5 * g.extent(a);
  }
  std::vector<std::vector<double>> seeds;
  if (b.seeding == "uniform") seeds = seed_uniform(lo, hi, b.seeds, c.seed);
  else if (b.seeding == "density") seeds = seed_from_density(psi0, b.seeds, c.seed);
  else seeds = seed_from_density(psi0, b.seeds);

  BohmOptions bo;
  bo.threads = c.opt.threads;
  const BohmBundle bundle = integrate_bohm_trajectories(rec, seeds, bo);
  write_bohm_trajectories(bundle, c.dir / "bohm_trajectories.csv");
  const WaveFunction& psi_f = rec.snapshots.back();
  write_pilot_fields(pilot_fields(psi_f), c.dir / "bohm_fields");
  r.details.push_back("seeds: " + std::to_string(bundle.seeds()) + " (" + b.seeding + "), completed: " +
                      std::to_string(bundle.completed()));
  r.details.push_back(std::string("order preserved: ") + (bundle.order_preserved ? "yes" : "no") +
                      ", max relative velocity change: " + num(bundle.max_relative_velocity_change));
  if (g.dims() == 1) {
    const EquivarianceReport eq = equivariance_check(bundle, psi_f, b.bins, lo[0], hi[0]);
    c.tv = eq.tv_distance;
    r.details.push_back("tv distance: " + num(eq.tv_distance) + " over " + std::to_string(b.bins) +
                        " bins, lost: " + std::to_string(eq.lost));
  } else {
    r.details.push_back("equivariance histogram skipped: one-dimensional only");
  }
  if (b.euler) {
    const EulerResidual er = euler_residual(rec, *c.v);
    std::ofstream out(c.dir / "euler_residual.csv");
    out << "t,max_residual\n";
    for (std::size_t k = 0; k < er.times.size(); ++k)
      out << format_number(er.times[k]) << ',' << format_number(er.max_residual[k]) << '\n';
    r.details.push_back("euler residual max: " + num(er.overall_max) + " at stride " + num(er.stride));
  }
  if (b.monopole_order > 0) {
    const MultipoleSet m = central_moments(density(psi_f), position_expectation(psi_f), b.monopole_order);
    const MonopoleRelation mr = monopole_relation_check(psi_f, m, b.monopole_order);
    std::string line = "monopole remainder by order:";
    for (double x : mr.remainder) line += " " + num(x);
    r.details.push_back(line);
    c.monopole_remainder = mr.remainder.back();
  }
}

void stage_mixture(Context& c, const MixtureSpec& m, StageResult& r) {
  const Grid pg = make_grid(c.s.grid.dims, c.s.grid.extent, c.s.grid.points);
  const Units units = build_units(c.s);
  std::vector<MixtureComponent> comps;
  for (const auto& spec : m.components) {
    const WaveFunction psi = build_state(spec.state, pg, units);
    comps.push_back(component_from_record(spec.weight, evolve_state(c, psi), spec.label));
  }
  const MixtureEnsemble e = reduced_density(std::move(comps));
  const ClassicalityReport audit = classicality_check(e, c.s.tolerances.dipole * c.opt.tol_scale, c.v.get(),
                                                     c.s.tolerances.ehrenfest * c.opt.tol_scale);
  const auto series = mixture_series(e, m.axis1, m.axis2, &audit);
  write_mixture_report(e, audit, series, c.dir / "mixture_report.csv", m.axis1, m.axis2);
  double worst = 0.0;
  for (const auto& x : series)
    if (x.residual) worst = std::max(worst, std::abs(*x.residual));
  c.mixture_classical = audit.classical;
  c.mixture_residual = worst;
  for (const auto& comp : audit.components)
    r.details.push_back(comp.label + ": weight " + num(comp.weight) + ", dipoles " + num(comp.dipole1) + " " +
                        num(comp.dipole2) + " " + num(comp.cross_dipole) + ", verdict " +
                        (comp.verdict ? to_string(*comp.verdict) : std::string("n/a")));
  r.details.push_back(std::string("classical: ") + (audit.classical ? "yes" : "no") + ", max residual: " + num(worst));
}

// Check name -> owning stage, for folding check outcomes into stage status.
std::vector<std::pair<CheckResult, std::string>> evaluate(const Context& c) {
  const ExpectSpec& x = c.s.expect;
  const double scale = c.opt.tol_scale;
  std::vector<std::pair<CheckResult, std::string>> out;
  const auto add = [&](const std::string& name, const std::string& stage, bool ok, const std::string& detail) {
    out.push_back({CheckResult{name, ok, detail}, stage});
  };
  const auto bound = [&](const std::string& name, const std::string& stage, const std::optional<double>& value,
                         double limit) {
    if (!value) return add(name, stage, false, "not computed");
    add(name, stage, *value <= limit * scale, num(*value) + " <= " + num(limit * scale));
  };
  if (x.verdict) {
    if (!c.verdict) add("verdict", "classify", false, "not computed");
    else add("verdict", "classify", to_string(*c.verdict) == *x.verdict, to_string(*c.verdict) + " (expected " + *x.verdict + ")");
  }
  if (x.trajectory_error)
    bound("trajectory_error", "effective",
          c.effective_max.empty() ? std::nullopt : std::optional<double>(c.effective_max.back()), *x.trajectory_error);
  if (x.order_monotone) {
    if (c.effective_rms.empty()) {
      add("order_monotone", "effective", false, "not computed");
    } else {
      bool mono = true;
      for (std::size_t k = 1; k < c.effective_rms.size(); ++k)
        mono = mono && c.effective_rms[k] <= c.effective_rms[k - 1] * (1.0 + 1e-9) + 1e-15;
      std::string d;
      for (double v : c.effective_rms) d += (d.empty() ? "" : " ") + num(v);
      add("order_monotone", "effective", mono == *x.order_monotone, "rms " + d);
    }
  }
  if (x.tv_distance) bound("tv_distance", "bohm", c.tv, *x.tv_distance);
  if (x.wigner_negative) {
    if (!c.wigner_min) add("wigner_negative", "wigner", false, "not computed");
    else add("wigner_negative", "wigner", (*c.wigner_min < -kNegativityFloor * c.wigner_max) == *x.wigner_negative,
             "min W " + num(*c.wigner_min) + ", floor " + num(-kNegativityFloor * c.wigner_max));
  }
  if (x.monopole_remainder) bound("monopole_remainder", "bohm", c.monopole_remainder, *x.monopole_remainder);
  if (x.mixture_classical) {
    if (!c.mixture_classical) add("mixture_classical", "mixture", false, "not computed");
    else add("mixture_classical", "mixture", *c.mixture_classical == *x.mixture_classical,
             std::string(*c.mixture_classical ? "classical" : "not classical"));
  }
  if (x.mixture_residual) bound("mixture_residual", "mixture", c.mixture_residual, *x.mixture_residual);
  if (x.mixture_residual_above) {
    if (!c.mixture_residual) add("mixture_residual_above", "mixture", false, "not computed");
    else add("mixture_residual_above", "mixture", *c.mixture_residual > *x.mixture_residual_above / scale,
             num(*c.mixture_residual) + " > " + num(*x.mixture_residual_above / scale));
  }
  if (x.momentum_drift) bound("momentum_drift", "evolve", c.momentum_drift, *x.momentum_drift);
  return out;
}

void write_report(const Context& c, const RunResult& res, const fs::path& path) {
  std::ofstream out(path);
  out << "scenario: " << c.s.name << '\n';
  if (!c.s.description.empty()) out << "description: " << c.s.description << '\n';
  out << "hash: " << scenario_hash(c.s) << '\n';
  out << "seed: " << c.seed << '\n';
  out << "threads: " << c.opt.threads << '\n';
  out << "tol_scale: " << num(c.opt.tol_scale) << '\n';
  out << "exit_code: " << res.exit_code << "\n\n";
  for (const auto& st : res.stages) {
    out << '[' << st.name << "] " << to_string(st.status) << ": " << st.reason << '\n';
    for (const auto& d : st.details) out << "  " << d << '\n';
  }
  out << "\nchecks:\n";
  if (res.checks.empty()) out << "  (none requested)\n";
  for (const auto& ch : res.checks) out << "  " << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << '\n';
  out << "\nwarnings:\n";
  if (res.warnings.empty()) out << "  (none)\n";
  for (const auto& w : res.warnings) out << "  " << w << '\n';
}

}  // namespace

std::vector<std::pair<std::string, std::string>> manifest_entries(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.txt") continue;
    out.emplace_back(sha256_file(entry.path()), rel);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return out;
}

RunResult run_scenario(const Scenario& s, const RunOptions& opt) {
  if (!(opt.tol_scale > 0.0)) throw InvalidArgument("tol_scale must be positive");
  if (opt.threads == 0) throw InvalidArgument("threads must be at least 1");
  RunResult res;
  const fs::path final_dir = opt.out ? *opt.out : fs::path(s.output.dir);
  fs::path partial = final_dir;
  partial += ".partial";
  fs::remove_all(partial);
  fs::create_directories(partial);

  Context c(s, opt, partial);
  c.seed = opt.seed.value_or(s.seed);
  WarningCapture capture(res.warnings);
  {
    std::ofstream(partial / "scenario.yaml") << canonical_echo(s);
  }

  const auto run_stage = [&](const std::string& name, const std::function<void(StageResult&)>& body,
                             const std::string& blocked) {
    StageResult r;
    r.name = name;
    if (!blocked.empty()) {
      r.status = StageStatus::skip;
      r.reason = blocked;
    } else {
      try {
        body(r);
        r.status = StageStatus::pass;
        r.reason = "completed";
      } catch (const std::exception& e) {
        r.status = StageStatus::error;
        r.reason = e.what();
      }
    }
    res.stages.push_back(std::move(r));
    return res.stages.back().status == StageStatus::pass;
  };

  bool evolved = false;
  bool moments = false;
  try {
    c.v = build_potential(s.potential, s.grid.dims);
  } catch (const std::exception& e) {
    res.stages.push_back({"evolve", StageStatus::error, std::string("potential: ") + e.what(), {}});
  }
  if (c.v) evolved = run_stage("evolve", [&](StageResult& r) { stage_evolve(c, r); }, "");
  const bool needs_moments = std::any_of(s.analyses.begin(), s.analyses.end(), [](const AnalysisSpec& a) {
    return !std::holds_alternative<MixtureSpec>(a);
  });
  if (needs_moments)
    moments = run_stage("moments", [&](StageResult& r) { stage_moments(c, r); }, evolved ? "" : "evolve did not complete");

  for (const auto& a : s.analyses) {
    const std::string name = analysis_name(a);
    std::string blocked;
    if (!c.v) blocked = "potential could not be built";
    else if (name != "mixture" && !moments) blocked = evolved ? "moments did not complete" : "evolve did not complete";
    if (const auto* e = std::get_if<EffectiveSpec>(&a); e && blocked.empty() && !e->x0 && !c.verdict)
      blocked = "classify did not complete; no Cauchy data";
    run_stage(
        name,
        [&](StageResult& r) {
          if (const auto* e = std::get_if<EffectiveSpec>(&a)) {
            if (c.verdict && *c.verdict != Verdict::emwf)
              r.details.push_back("note: record verdict is " + to_string(*c.verdict));
            stage_effective(c, *e, r);
          } else if (std::holds_alternative<ClassifySpec>(a)) {
            stage_classify(c, r);
          } else if (const auto* w = std::get_if<WignerSpec>(&a)) {
            stage_wigner(c, *w, r);
          } else if (const auto* b = std::get_if<BohmSpec>(&a)) {
            stage_bohm(c, *b, r);
          } else {
            stage_mixture(c, std::get<MixtureSpec>(a), r);
          }
        },
        blocked);
  }

  for (auto& [check, stage] : evaluate(c)) {
    if (!check.passed)
      for (auto& st : res.stages)
        if (st.name == stage && st.status == StageStatus::pass) {
          st.status = StageStatus::fail;
          st.reason = "check " + check.name + " failed";
        }
    res.checks.push_back(std::move(check));
  }
  for (const auto& st : res.stages)
    if (st.status == StageStatus::error) res.exit_code = kExitAnalysisError;

  write_report(c, res, partial / "report.txt");
  {
    std::ofstream out(partial / "manifest.txt");
    for (const auto& [hash, rel] : manifest_entries(partial)) out << hash << "  " << rel << '\n';
  }
  fs::remove_all(final_dir);
  if (final_dir.has_parent_path()) fs::create_directories(final_dir.parent_path());
  fs::rename(partial, final_dir);
  res.directory = final_dir;
  return res;
}

}  // namespace emwf
