#include "emwf/scenario.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "emwf/error.hpp"
#include "emwf/mixtures.hpp"
#include "emwf/states.hpp"

#ifndef EMWF_DEFAULT_SCENARIO_DIR
#define EMWF_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace emwf {

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string summary(const std::vector<std::string>& errors) {
  std::string out = std::to_string(errors.size()) + " scenario error(s)";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

// Shortest decimal that reads back to the same double.
std::string echo_number(double v) {
  char buf[32];
  for (int p = 15; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

const std::vector<std::string> kPotentialTypes{"free", "harmonic", "quartic", "gaussian_well", "two_body"};
const std::vector<std::string> kStateTypes{"gaussian", "coherent", "eigenstate", "superposition", "product",
                                           "entangled"};
const std::vector<std::string> kAnalyses{"classify", "effective", "wigner", "bohm", "mixture"};
const std::vector<std::string> kVerdicts{"EMWF", "NDWF-only", "neither"};

class Parser {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const YAML::Node& at, const std::string& msg) {
    std::string where = path.empty() ? "<root>" : path;
    if (at.IsDefined() && at.Mark().line >= 0) where += " (line " + std::to_string(at.Mark().line + 1) + ")";
    errors.push_back(where + ": " + msg);
  }

  static std::string child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  // False when `node` is not a map. Unknown keys are reported with the nearest allowed key.
  bool keys(const YAML::Node& node, const std::string& path, const std::vector<std::string>& allowed) {
    if (!node.IsMap()) {
      error(path, node, "expected a mapping");
      return false;
    }
    for (const auto& kv : node) {
      const std::string key = kv.first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string msg = "unknown key '" + key + "'";
      const auto near = suggestions(key, allowed);
      if (!near.empty()) msg += " (did you mean '" + near.front() + "'?)";
      error(child(path, key), kv.first, msg);
    }
    return true;
  }

  std::optional<double> number(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) {
      error(path, n, "expected a number");
      return std::nullopt;
    }
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) throw YAML::Exception(n.Mark(), "non-finite");
      return v;
    } catch (const YAML::Exception&) {
      error(path, n, "expected a finite number, got '" + n.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<long long> integer(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) {
      error(path, n, "expected an integer");
      return std::nullopt;
    }
    try {
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      error(path, n, "expected an integer, got '" + n.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const YAML::Node& n, const std::string& path) {
    try {
      if (n.IsScalar()) return n.as<bool>();
    } catch (const YAML::Exception&) {
    }
    error(path, n, "expected true or false");
    return std::nullopt;
  }

  std::optional<std::string> text(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) {
      error(path, n, "expected a string");
      return std::nullopt;
    }
    return n.Scalar();
  }

  void real(const YAML::Node& map, const std::string& key, const std::string& path, double& out,
            bool positive = false, bool nonnegative = false) {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string p = child(path, key);
    const auto v = number(n, p);
    if (!v) return;
    if (positive && *v <= 0.0) return error(p, n, "must be positive");
    if (nonnegative && *v < 0.0) return error(p, n, "must be nonnegative");
    out = *v;
  }

  void count(const YAML::Node& map, const std::string& key, const std::string& path, std::size_t& out,
             long long min = 1) {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string p = child(path, key);
    const auto v = integer(n, p);
    if (!v) return;
    if (*v < min) return error(p, n, "must be at least " + std::to_string(min));
    out = static_cast<std::size_t>(*v);
  }

  // Scalar values are broadcast to `dims` entries.
  std::optional<std::vector<double>> vec(const YAML::Node& n, const std::string& path, std::size_t dims) {
    if (n.IsScalar()) {
      const auto v = number(n, path);
      if (!v) return std::nullopt;
      return std::vector<double>(dims, *v);
    }
    if (!n.IsSequence()) {
      error(path, n, "expected a number or a list of numbers");
      return std::nullopt;
    }
    if (n.size() != dims) {
      error(path, n, "expected " + std::to_string(dims) + " entries, got " + std::to_string(n.size()));
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto v = number(n[i], path + "[" + std::to_string(i) + "]");
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

  std::string choice(const YAML::Node& n, const std::string& path, const std::vector<std::string>& allowed,
                     const std::string& fallback) {
    const auto v = text(n, path);
    if (!v) return fallback;
    if (std::find(allowed.begin(), allowed.end(), *v) != allowed.end()) return *v;
    std::string msg = "unknown value '" + *v + "'";
    const auto near = suggestions(*v, allowed);
    msg += near.empty() ? " (expected one of " + join(allowed, ", ") + ")" : " (did you mean '" + near.front() + "'?)";
    error(path, n, msg);
    return fallback;
  }

  // --- sections ---

  GridSpec grid(const YAML::Node& n, const std::string& path) {
    GridSpec g;
    if (!n) {
      error(path, n, "missing required section");
      return g;
    }
    if (!keys(n, path, {"dims", "extent", "points"})) return g;
    count(n, "dims", path, g.dims);
    if (g.dims > 3) {
      error(child(path, "dims"), n["dims"], "at most 3 axes per particle");
      g.dims = 1;
    }
    if (!n["extent"]) error(child(path, "extent"), n, "missing required key");
    else if (auto v = vec(n["extent"], child(path, "extent"), g.dims)) {
      g.extent = *v;
      for (double e : g.extent)
        if (e <= 0.0) error(child(path, "extent"), n["extent"], "extents must be positive");
    }
    if (!n["points"]) error(child(path, "points"), n, "missing required key");
    else if (auto v = vec(n["points"], child(path, "points"), g.dims)) {
      for (double p : *v) {
        if (p < 2.0 || p != std::floor(p) || (static_cast<std::size_t>(p) & (static_cast<std::size_t>(p) - 1)) != 0) {
          error(child(path, "points"), n["points"], "points must be powers of two >= 2");
          break;
        }
        g.points.push_back(static_cast<std::size_t>(p));
      }
      if (g.points.size() != g.dims) g.points.clear();
    }
    return g;
  }

  UnitsSpec units(const YAML::Node& n, const std::string& path, bool pair, bool relativistic) {
    UnitsSpec u;
    if (n && !keys(n, path, {"hbar", "m", "m1", "m2", "c"})) return u;
    const YAML::Node none;
    const YAML::Node& m = n ? n : none;
    real(m, "hbar", path, u.hbar, true);
    const bool two = pair || relativistic;
    if (two) {
      if (m["m"]) error(child(path, "m"), m["m"], "two-body scenarios take m1 and m2, not m");
      double m1 = 1.0, m2 = 1.0;
      if (!m["m1"] || !m["m2"]) error(path, m, "two-body scenarios require m1 and m2");
      real(m, "m1", path, m1, true);
      real(m, "m2", path, m2, true);
      u.masses = {m1, m2};
    } else {
      if (m["m1"] || m["m2"]) error(path, m, "m1/m2 need a two-particle state or the relativistic integrator");
      double mass = 1.0;
      real(m, "m", path, mass, true);
      u.masses = {mass};
    }
    if (m["c"]) {
      double c = 1.0;
      real(m, "c", path, c, true);
      u.c = c;
    }
    if (relativistic && !u.c) error(child(path, "c"), m, "the relativistic integrator requires c");
    return u;
  }

  PotentialSpec potential(const YAML::Node& n, const std::string& path, bool nested) {
    PotentialSpec p;
    if (!n) return p;
    if (!n.IsMap()) {
      error(path, n, "expected a mapping");
      return p;
    }
    if (!n["type"]) {
      error(child(path, "type"), n, "missing required key");
      return p;
    }
    p.type = choice(n["type"], child(path, "type"), kPotentialTypes, "free");
    std::vector<std::string> allowed{"type"};
    if (p.type == "harmonic") allowed.push_back("stiffness");
    if (p.type == "quartic") allowed.push_back("lambda");
    if (p.type == "gaussian_well") allowed.insert(allowed.end(), {"depth", "width"});
    if (p.type == "two_body") allowed.insert(allowed.end(), {"pair", "external"});
    keys(n, path, allowed);
    real(n, "stiffness", path, p.stiffness);
    real(n, "lambda", path, p.lambda);
    real(n, "depth", path, p.depth);
    real(n, "width", path, p.width, true);
    if (p.type == "two_body") {
      if (nested) error(child(path, "type"), n["type"], "two_body potentials cannot be nested");
      if (n["pair"]) p.pair = std::make_shared<PotentialSpec>(potential(n["pair"], child(path, "pair"), true));
      if (n["external"])
        p.external = std::make_shared<PotentialSpec>(potential(n["external"], child(path, "external"), true));
    }
    return p;
  }

  StateSpec state(const YAML::Node& n, const std::string& path, std::size_t dims, bool nested) {
    StateSpec s;
    if (!n) {
      error(path, n, "missing required section");
      return s;
    }
    if (!n.IsMap()) {
      error(path, n, "expected a mapping");
      return s;
    }
    if (!n["type"]) {
      error(child(path, "type"), n, "missing required key");
      return s;
    }
    s.type = choice(n["type"], child(path, "type"), kStateTypes, "gaussian");
    if (s.type == "gaussian") {
      keys(n, path, {"type", "center", "momentum", "sigma"});
      s.center.assign(dims, 0.0);
      s.momentum.assign(dims, 0.0);
      s.sigma.assign(dims, 1.0);
      if (n["center"]) s.center = vec(n["center"], child(path, "center"), dims).value_or(s.center);
      if (n["momentum"]) s.momentum = vec(n["momentum"], child(path, "momentum"), dims).value_or(s.momentum);
      if (n["sigma"]) s.sigma = vec(n["sigma"], child(path, "sigma"), dims).value_or(s.sigma);
      for (double v : s.sigma)
        if (v <= 0.0) error(child(path, "sigma"), n["sigma"], "widths must be positive");
    } else if (s.type == "coherent") {
      keys(n, path, {"type", "omega", "displacement", "momentum"});
      s.center.assign(dims, 0.0);
      s.momentum.assign(dims, 0.0);
      real(n, "omega", path, s.omega, true);
      if (n["displacement"])
        s.center = vec(n["displacement"], child(path, "displacement"), dims).value_or(s.center);
      if (n["momentum"]) s.momentum = vec(n["momentum"], child(path, "momentum"), dims).value_or(s.momentum);
    } else if (s.type == "eigenstate") {
      keys(n, path, {"type", "omega", "n"});
      real(n, "omega", path, s.omega, true);
      s.quanta.assign(dims, 0);
      if (n["n"]) {
        if (auto v = vec(n["n"], child(path, "n"), dims)) {
          for (std::size_t a = 0; a < dims; ++a) {
            if ((*v)[a] < 0.0 || (*v)[a] != std::floor((*v)[a])) {
              error(child(path, "n"), n["n"], "quantum numbers must be nonnegative integers");
              break;
            }
            s.quanta[a] = static_cast<int>((*v)[a]);
          }
        }
      }
    } else if (s.type == "superposition") {
      keys(n, path, {"type", "components", "coefficients"});
      const YAML::Node comps = n["components"];
      if (!comps || !comps.IsSequence() || comps.size() == 0) {
        error(child(path, "components"), comps ? comps : n, "expected a non-empty list of states");
        return s;
      }
      for (std::size_t i = 0; i < comps.size(); ++i)
        s.parts.push_back(state(comps[i], child(path, "components") + "[" + std::to_string(i) + "]", dims, true));
      for (const auto& part : s.parts)
        if (part.two_particle()) error(child(path, "components"), comps, "components must be single-particle states");
      const YAML::Node coef = n["coefficients"];
      if (!coef) {
        s.coefficients.assign(s.parts.size(), Complex(1.0, 0.0));
      } else if (!coef.IsSequence() || coef.size() != s.parts.size()) {
        error(child(path, "coefficients"), coef, "expected one coefficient per component");
      } else {
        for (std::size_t i = 0; i < coef.size(); ++i) {
          const std::string p = child(path, "coefficients") + "[" + std::to_string(i) + "]";
          if (coef[i].IsSequence() && coef[i].size() == 2) {
            const auto re = number(coef[i][0], p), im = number(coef[i][1], p);
            if (re && im) s.coefficients.emplace_back(*re, *im);
          } else if (const auto re = number(coef[i], p)) {
            s.coefficients.emplace_back(*re, 0.0);
          }
        }
      }
    } else {
      keys(n, path, {"type", "particles"});
      if (nested) error(child(path, "type"), n["type"], "two-particle states cannot be nested");
      const YAML::Node parts = n["particles"];
      if (!parts || !parts.IsSequence() || parts.size() != 2) {
        error(child(path, "particles"), parts ? parts : n, "expected a list of two single-particle states");
        return s;
      }
      for (std::size_t i = 0; i < 2; ++i) {
        s.parts.push_back(state(parts[i], child(path, "particles") + "[" + std::to_string(i) + "]", dims, true));
        if (s.parts.back().two_particle())
          error(child(path, "particles"), parts, "particle states must be single-particle states");
      }
    }
    return s;
  }

  IntegratorSpec integrator(const YAML::Node& n, const std::string& path) {
    IntegratorSpec it;
    if (!n) {
      error(path, n, "missing required section");
      return it;
    }
    if (!keys(n, path, {"kind", "dt", "t_final", "save_stride", "snapshot_every", "subtract_rest"})) return it;
    if (n["kind"]) it.kind = choice(n["kind"], child(path, "kind"), {"split_step", "relativistic"}, "split_step");
    real(n, "dt", path, it.dt, true);
    real(n, "t_final", path, it.t_final, true);
    count(n, "save_stride", path, it.save_stride);
    count(n, "snapshot_every", path, it.snapshot_every, 0);
    if (n["subtract_rest"])
      it.subtract_rest = boolean(n["subtract_rest"], child(path, "subtract_rest")).value_or(it.subtract_rest);
    if (it.dt > it.t_final) error(child(path, "dt"), n["dt"], "dt exceeds t_final");
    else if (it.dt * static_cast<double>(it.save_stride) > it.t_final * (1.0 + 1e-12))
      error(child(path, "save_stride"), n["save_stride"], "save window dt*save_stride exceeds t_final");
    return it;
  }

  std::vector<int> orders(const YAML::Node& n, const std::string& path) {
    std::vector<int> out;
    const auto add = [&](const YAML::Node& x, const std::string& p) {
      const auto v = integer(x, p);
      if (!v) return;
      if (*v < 1 || *v > 4) return error(p, x, "orders must lie in 1..4");
      out.push_back(static_cast<int>(*v));
    };
    if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) add(n[i], path + "[" + std::to_string(i) + "]");
    } else {
      add(n, path);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) error(path, n, "at least one order is required");
    return out;
  }

  AnalysisSpec analysis(const std::string& kind, const YAML::Node& body, const std::string& path, std::size_t dims) {
    const YAML::Node none;
    const bool has = body && !body.IsNull();
    const YAML::Node& b = has ? body : none;
    if (kind == "classify") {
      if (has) keys(b, path, {});
      return ClassifySpec{};
    }
    if (kind == "effective") {
      EffectiveSpec e;
      if (has && !keys(b, path, {"orders", "multipole_source", "x0", "v0", "threshold", "substeps"})) return e;
      if (b["orders"]) e.orders = orders(b["orders"], child(path, "orders"));
      if (b["multipole_source"]) {
        const std::string src = choice(b["multipole_source"], child(path, "multipole_source"),
                                       {"frozen", "time_interpolated", "prescribed"}, "frozen");
        if (src == "prescribed")
          error(child(path, "multipole_source"), b["multipole_source"],
                "prescribed moments are available through the library only");
        e.source = src == "time_interpolated" ? MultipoleSource::time_interpolated : MultipoleSource::frozen;
      }
      if (b["x0"]) e.x0 = vec(b["x0"], child(path, "x0"), dims);
      if (b["v0"]) e.v0 = vec(b["v0"], child(path, "v0"), dims);
      if (b["x0"].IsDefined() != b["v0"].IsDefined()) error(path, b, "x0 and v0 must be given together");
      real(b, "threshold", path, e.threshold, true);
      std::size_t sub = 1;
      count(b, "substeps", path, sub);
      e.substeps = static_cast<int>(sub);
      return e;
    }
    if (kind == "wigner") {
      WignerSpec w;
      if (has && !keys(b, path, {"at", "csv_stride", "c_max"})) return w;
      if (b["at"]) {
        if (b["at"].IsScalar() && b["at"].Scalar() == "final") w.at = -1.0;
        else if (b["at"].IsScalar() && b["at"].Scalar() == "initial") w.at = 0.0;
        else real(b, "at", path, w.at, false, true);
      }
      count(b, "csv_stride", path, w.csv_stride);
      std::size_t c = 2;
      count(b, "c_max", path, c);
      if (c > 4) error(child(path, "c_max"), b["c_max"], "c_max must lie in 1..4");
      w.c_max = static_cast<int>(std::min<std::size_t>(c, 4));
      return w;
    }
    if (kind == "bohm") {
      BohmSpec bo;
      if (has && !keys(b, path, {"seeds", "seeding", "lo", "hi", "bins", "euler", "monopole_order"})) return bo;
      count(b, "seeds", path, bo.seeds);
      if (b["seeding"])
        bo.seeding = choice(b["seeding"], child(path, "seeding"), {"stratified", "density", "uniform"}, "stratified");
      if (b["lo"]) bo.lo = vec(b["lo"], child(path, "lo"), dims);
      if (b["hi"]) bo.hi = vec(b["hi"], child(path, "hi"), dims);
      if (bo.lo && bo.hi)
        for (std::size_t a = 0; a < dims; ++a)
          if ((*bo.lo)[a] >= (*bo.hi)[a]) error(path, b, "lo must be below hi on every axis");
      count(b, "bins", path, bo.bins);
      if (b["euler"]) bo.euler = boolean(b["euler"], child(path, "euler")).value_or(true);
      std::size_t mo = 0;
      count(b, "monopole_order", path, mo, 0);
      if (mo > 6) error(child(path, "monopole_order"), b["monopole_order"], "monopole_order must lie in 0..6");
      bo.monopole_order = static_cast<int>(std::min<std::size_t>(mo, 6));
      return bo;
    }
    MixtureSpec m;
    if (!has || !keys(b, path, {"components", "axis1", "axis2"})) {
      if (!has) error(path, body, "mixture needs a components list");
      return m;
    }
    count(b, "axis1", path, m.axis1, 0);
    count(b, "axis2", path, m.axis2, 0);
    if (m.axis1 >= dims) error(child(path, "axis1"), b["axis1"], "axis outside the particle's axes");
    if (m.axis2 >= dims) error(child(path, "axis2"), b["axis2"], "axis outside the particle's axes");
    const YAML::Node comps = b["components"];
    if (!comps || !comps.IsSequence() || comps.size() == 0) {
      error(child(path, "components"), comps ? comps : b, "expected a non-empty list");
      return m;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string p = child(path, "components") + "[" + std::to_string(i) + "]";
      MixtureComponentSpec c;
      c.label = "w" + std::to_string(i);
      if (!keys(comps[i], p, {"weight", "label", "state"})) continue;
      if (!comps[i]["weight"]) error(child(p, "weight"), comps[i], "missing required key");
      real(comps[i], "weight", p, c.weight, false, true);
      if (comps[i]["label"]) c.label = text(comps[i]["label"], child(p, "label")).value_or(c.label);
      c.state = state(comps[i]["state"], child(p, "state"), dims, false);
      if (!c.state.two_particle()) error(child(p, "state"), comps[i]["state"], "mixture components must be two-particle states");
      total += c.weight;
      m.components.push_back(std::move(c));
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance)
      error(child(path, "components"), comps, "weights sum to " + echo_number(total) + ", expected 1");
    return m;
  }

  std::vector<AnalysisSpec> analyses(const YAML::Node& n, const std::string& path, std::size_t dims) {
    std::vector<AnalysisSpec> out;
    if (!n) return out;
    if (!n.IsSequence()) {
      error(path, n, "expected a list of analyses");
      return out;
    }
    std::set<std::string> seen;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      std::string kind;
      YAML::Node body;
      if (n[i].IsScalar()) {
        kind = n[i].Scalar();
      } else if (n[i].IsMap() && n[i].size() == 1) {
        kind = n[i].begin()->first.Scalar();
        body = n[i].begin()->second;
      } else {
        error(p, n[i], "expected an analysis name or a single-key mapping");
        continue;
      }
      if (std::find(kAnalyses.begin(), kAnalyses.end(), kind) == kAnalyses.end()) {
        std::string msg = "unknown analysis '" + kind + "'";
        const auto near = suggestions(kind, kAnalyses);
        if (!near.empty()) msg += " (did you mean '" + near.front() + "'?)";
        error(p, n[i], msg);
        continue;
      }
      if (!seen.insert(kind).second) {
        error(p, n[i], "analysis '" + kind + "' requested twice");
        continue;
      }
      out.push_back(analysis(kind, body, child(p, kind), dims));
    }
    return out;
  }

  ExpectSpec expect(const YAML::Node& n, const std::string& path) {
    ExpectSpec e;
    if (!n) return e;
    if (!keys(n, path, {"verdict", "trajectory_error", "order_monotone", "tv_distance", "wigner_negative",
                        "monopole_remainder", "mixture_classical", "mixture_residual", "mixture_residual_above",
                        "momentum_drift"}))
      return e;
    if (n["verdict"]) e.verdict = choice(n["verdict"], child(path, "verdict"), kVerdicts, "EMWF");
    const auto positive = [&](const char* key, std::optional<double>& out) {
      if (!n[key]) return;
      double v = 0.0;
      const std::size_t before = errors.size();
      real(n, key, path, v, true);
      if (errors.size() == before) out = v;
    };
    const auto flag = [&](const char* key, std::optional<bool>& out) {
      if (n[key]) out = boolean(n[key], child(path, key));
    };
    positive("trajectory_error", e.trajectory_error);
    positive("tv_distance", e.tv_distance);
    positive("monopole_remainder", e.monopole_remainder);
    positive("mixture_residual", e.mixture_residual);
    positive("mixture_residual_above", e.mixture_residual_above);
    positive("momentum_drift", e.momentum_drift);
    flag("order_monotone", e.order_monotone);
    flag("wigner_negative", e.wigner_negative);
    flag("mixture_classical", e.mixture_classical);
    return e;
  }
};

bool involves_pair(const PotentialSpec& p) { return p.type == "two_body"; }

void cross_check(const Scenario& s, const YAML::Node& root, Parser& P) {
  const bool pair = s.state.two_particle();
  const bool rel = s.integrator.kind == "relativistic";
  if (pair && !involves_pair(s.potential) && s.potential.type != "free")
    P.error("potential.type", root["potential"]["type"], "two-particle states need a two_body or free potential");
  if (!pair && involves_pair(s.potential))
    P.error("potential.type", root["potential"]["type"], "two_body potentials need a two-particle state");
  if (rel && pair) P.error("state.type", root["state"]["type"], "the relativistic integrator evolves the relative coordinate only");
  const std::size_t config_dims = s.grid.dims * (pair ? 2 : 1);
  for (std::size_t i = 0; i < s.analyses.size(); ++i) {
    const std::string p = "analyses[" + std::to_string(i) + "]";
    const YAML::Node at = root["analyses"][i];
    const std::string name = analysis_name(s.analyses[i]);
    if (rel && (name == "classify" || name == "effective" || name == "bohm"))
      P.error(p, at, name + " is not available for the relativistic integrator");
    if (s.integrator.snapshot_every == 0 && name != "mixture")
      P.error(p, at, name + " needs snapshots (snapshot_every >= 1)");
    if (const auto* e = std::get_if<EffectiveSpec>(&s.analyses[i])) {
      if (!e->x0 && !s.find<ClassifySpec>())
        P.error(p, at, "effective needs classify or explicit x0/v0 Cauchy data");
      if (e->x0 && pair)
        P.error(p, at, "explicit x0/v0 are per particle; two-particle effective runs take them from the record");
      if (e->source == MultipoleSource::time_interpolated && s.integrator.snapshot_every != 1)
        P.error(p, at, "time_interpolated moments need snapshot_every = 1");
    }
    if (name == "wigner" && config_dims > 2) P.error(p, at, "wigner supports at most two configuration axes");
    if (const auto* b = std::get_if<BohmSpec>(&s.analyses[i])) {
      if (s.integrator.snapshot_every != 1) P.error(p, at, "bohm needs snapshot_every = 1");
      if (b->seeding == "uniform" && pair) P.error(p, at, "uniform seeding is single-particle only");
      if ((b->lo || b->hi) && pair) P.error(p, at, "lo/hi are single-particle only");
    }
    if (name == "mixture" && !pair) P.error(p, at, "mixture needs a two-particle scenario state");
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(summary(errors)), errors_(std::move(errors)) {}

std::string analysis_name(const AnalysisSpec& a) {
  static const char* names[] = {"classify", "effective", "wigner", "bohm", "mixture"};
  return names[a.index()];
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::string> suggestions(const std::string& word, const std::vector<std::string>& candidates) {
  const std::size_t limit = std::max<std::size_t>(2, word.size() / 3);
  std::vector<std::pair<std::size_t, std::string>> ranked;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d <= limit) ranked.emplace_back(d, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::string> out;
  for (auto& r : ranked) out.push_back(std::move(r.second));
  return out;
}

Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError({std::string("malformed YAML: ") + e.what()});
  }
  Parser P;
  Scenario s;
  s.source = origin;
  if (!root.IsMap()) throw ScenarioError({"<root>: expected a mapping of sections"});
  P.keys(root, "", {"name", "description", "grid", "units", "potential", "state", "integrator", "analyses", "output",
                    "tolerances", "seed", "expect"});
  if (!root["name"]) P.error("name", root, "missing required key");
  else s.name = P.text(root["name"], "name").value_or("");
  if (root["description"]) s.description = P.text(root["description"], "description").value_or("");
  s.grid = P.grid(root["grid"], "grid");
  s.integrator = P.integrator(root["integrator"], "integrator");
  s.state = P.state(root["state"], "state", s.grid.dims, false);
  s.units = P.units(root["units"], "units", s.state.two_particle(), s.integrator.kind == "relativistic");
  s.potential = P.potential(root["potential"], "potential", false);
  s.analyses = P.analyses(root["analyses"], "analyses", s.grid.dims);

  s.output.dir = "runs/" + (s.name.empty() ? std::string("scenario") : s.name);
  if (const YAML::Node o = root["output"]; o && P.keys(o, "output", {"dir", "snapshots"})) {
    if (o["dir"]) s.output.dir = P.text(o["dir"], "output.dir").value_or(s.output.dir);
    if (o["snapshots"]) s.output.snapshots = P.boolean(o["snapshots"], "output.snapshots").value_or(false);
  }
  if (const YAML::Node t = root["tolerances"]; t && P.keys(t, "tolerances", {"dipole", "ehrenfest"})) {
    P.real(t, "dipole", "tolerances", s.tolerances.dipole, true);
    P.real(t, "ehrenfest", "tolerances", s.tolerances.ehrenfest, true);
  }
  if (const YAML::Node sd = root["seed"]) {
    try {
      s.seed = sd.as<std::uint64_t>();
      if (!sd.Scalar().empty() && sd.Scalar()[0] == '-') throw YAML::Exception(sd.Mark(), "negative");
    } catch (const YAML::Exception&) {
      P.error("seed", sd, "expected an unsigned 64-bit integer");
    }
  }
  s.expect = P.expect(root["expect"], "expect");

  if (P.errors.empty()) cross_check(s, root, P);
  if (P.errors.empty()) {
    try {
      const WaveFunction psi = build_initial_state(s);
      if (boundary_density(psi) > kBoundaryWarnDensity)
        P.error("state", root["state"], "initial density reaches the box edge; enlarge grid.extent");
      build_potential(s.potential, s.grid.dims);
      for (const auto& a : s.analyses)
        if (const auto* m = std::get_if<MixtureSpec>(&a))
          for (std::size_t i = 0; i < m->components.size(); ++i)
            build_state(m->components[i].state, make_grid(s.grid.dims, s.grid.extent, s.grid.points), build_units(s));
    } catch (const std::exception& e) {
      P.errors.push_back(std::string("state: cannot be built: ") + e.what());
    }
  }
  if (!P.errors.empty()) throw ScenarioError(std::move(P.errors));
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path.string() + ": cannot open scenario file"});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

namespace {

void emit_vec(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << echo_number(x);
  out << YAML::EndSeq;
}

void emit_potential(YAML::Emitter& out, const PotentialSpec& p) {
  out << YAML::BeginMap << YAML::Key << "type" << YAML::Value << p.type;
  if (p.type == "harmonic") out << YAML::Key << "stiffness" << YAML::Value << echo_number(p.stiffness);
  if (p.type == "quartic") out << YAML::Key << "lambda" << YAML::Value << echo_number(p.lambda);
  if (p.type == "gaussian_well") {
    out << YAML::Key << "depth" << YAML::Value << echo_number(p.depth);
    out << YAML::Key << "width" << YAML::Value << echo_number(p.width);
  }
  if (p.pair) {
    out << YAML::Key << "pair" << YAML::Value;
    emit_potential(out, *p.pair);
  }
  if (p.external) {
    out << YAML::Key << "external" << YAML::Value;
    emit_potential(out, *p.external);
  }
  out << YAML::EndMap;
}

void emit_state(YAML::Emitter& out, const StateSpec& s) {
  out << YAML::BeginMap << YAML::Key << "type" << YAML::Value << s.type;
  if (s.type == "gaussian") {
    out << YAML::Key << "center" << YAML::Value;
    emit_vec(out, s.center);
    out << YAML::Key << "momentum" << YAML::Value;
    emit_vec(out, s.momentum);
    out << YAML::Key << "sigma" << YAML::Value;
    emit_vec(out, s.sigma);
  } else if (s.type == "coherent") {
    out << YAML::Key << "omega" << YAML::Value << echo_number(s.omega);
    out << YAML::Key << "displacement" << YAML::Value;
    emit_vec(out, s.center);
    out << YAML::Key << "momentum" << YAML::Value;
    emit_vec(out, s.momentum);
  } else if (s.type == "eigenstate") {
    out << YAML::Key << "omega" << YAML::Value << echo_number(s.omega);
    out << YAML::Key << "n" << YAML::Value << YAML::Flow << s.quanta;
  } else if (s.type == "superposition") {
    out << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : s.parts) emit_state(out, p);
    out << YAML::EndSeq << YAML::Key << "coefficients" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : s.coefficients) emit_vec(out, {c.real(), c.imag()});
    out << YAML::EndSeq;
  } else {
    out << YAML::Key << "particles" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : s.parts) emit_state(out, p);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

void emit_analysis(YAML::Emitter& out, const AnalysisSpec& a) {
  out << YAML::BeginMap << YAML::Key << analysis_name(a) << YAML::Value << YAML::BeginMap;
  if (const auto* e = std::get_if<EffectiveSpec>(&a)) {
    out << YAML::Key << "orders" << YAML::Value << YAML::Flow << e->orders;
    out << YAML::Key << "multipole_source" << YAML::Value
        << (e->source == MultipoleSource::time_interpolated ? "time_interpolated" : "frozen");
    if (e->x0) {
      out << YAML::Key << "x0" << YAML::Value;
      emit_vec(out, *e->x0);
      out << YAML::Key << "v0" << YAML::Value;
      emit_vec(out, *e->v0);
    }
    out << YAML::Key << "threshold" << YAML::Value << echo_number(e->threshold);
    out << YAML::Key << "substeps" << YAML::Value << e->substeps;
  } else if (const auto* w = std::get_if<WignerSpec>(&a)) {
    out << YAML::Key << "at" << YAML::Value << (w->at < 0.0 ? std::string("final") : echo_number(w->at));
    out << YAML::Key << "csv_stride" << YAML::Value << w->csv_stride;
    out << YAML::Key << "c_max" << YAML::Value << w->c_max;
  } else if (const auto* b = std::get_if<BohmSpec>(&a)) {
    out << YAML::Key << "seeds" << YAML::Value << b->seeds;
    out << YAML::Key << "seeding" << YAML::Value << b->seeding;
    if (b->lo) {
      out << YAML::Key << "lo" << YAML::Value;
      emit_vec(out, *b->lo);
    }
    if (b->hi) {
      out << YAML::Key << "hi" << YAML::Value;
      emit_vec(out, *b->hi);
    }
    out << YAML::Key << "bins" << YAML::Value << b->bins;
    out << YAML::Key << "euler" << YAML::Value << b->euler;
    out << YAML::Key << "monopole_order" << YAML::Value << b->monopole_order;
  } else if (const auto* m = std::get_if<MixtureSpec>(&a)) {
    out << YAML::Key << "axis1" << YAML::Value << m->axis1;
    out << YAML::Key << "axis2" << YAML::Value << m->axis2;
    out << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : m->components) {
      out << YAML::BeginMap << YAML::Key << "weight" << YAML::Value << echo_number(c.weight);
      out << YAML::Key << "label" << YAML::Value << c.label;
      out << YAML::Key << "state" << YAML::Value;
      emit_state(out, c.state);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap << YAML::EndMap;
}

}  // namespace

std::string canonical_echo(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "description" << YAML::Value << s.description;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dims" << YAML::Value << s.grid.dims;
  out << YAML::Key << "extent" << YAML::Value;
  emit_vec(out, s.grid.extent);
  out << YAML::Key << "points" << YAML::Value << YAML::Flow << s.grid.points;
  out << YAML::EndMap;
  out << YAML::Key << "units" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hbar" << YAML::Value << echo_number(s.units.hbar);
  if (s.units.masses.size() == 1) {
    out << YAML::Key << "m" << YAML::Value << echo_number(s.units.masses[0]);
  } else {
    out << YAML::Key << "m1" << YAML::Value << echo_number(s.units.masses[0]);
    out << YAML::Key << "m2" << YAML::Value << echo_number(s.units.masses[1]);
  }
  if (s.units.c) out << YAML::Key << "c" << YAML::Value << echo_number(*s.units.c);
  out << YAML::EndMap;
  out << YAML::Key << "potential" << YAML::Value;
  emit_potential(out, s.potential);
  out << YAML::Key << "state" << YAML::Value;
  emit_state(out, s.state);
  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << s.integrator.kind;
  out << YAML::Key << "dt" << YAML::Value << echo_number(s.integrator.dt);
  out << YAML::Key << "t_final" << YAML::Value << echo_number(s.integrator.t_final);
  out << YAML::Key << "save_stride" << YAML::Value << s.integrator.save_stride;
  out << YAML::Key << "snapshot_every" << YAML::Value << s.integrator.snapshot_every;
  out << YAML::Key << "subtract_rest" << YAML::Value << s.integrator.subtract_rest;
  out << YAML::EndMap;
  out << YAML::Key << "analyses" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : s.analyses) emit_analysis(out, a);
  out << YAML::EndSeq;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << s.output.dir;
  out << YAML::Key << "snapshots" << YAML::Value << s.output.snapshots;
  out << YAML::EndMap;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dipole" << YAML::Value << echo_number(s.tolerances.dipole);
  out << YAML::Key << "ehrenfest" << YAML::Value << echo_number(s.tolerances.ehrenfest);
  out << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  const ExpectSpec& e = s.expect;
  out << YAML::Key << "expect" << YAML::Value << YAML::BeginMap;
  if (e.verdict) out << YAML::Key << "verdict" << YAML::Value << *e.verdict;
  const auto num = [&](const char* k, const std::optional<double>& v) {
    if (v) out << YAML::Key << k << YAML::Value << echo_number(*v);
  };
  const auto flag = [&](const char* k, const std::optional<bool>& v) {
    if (v) out << YAML::Key << k << YAML::Value << *v;
  };
  num("trajectory_error", e.trajectory_error);
  flag("order_monotone", e.order_monotone);
  num("tv_distance", e.tv_distance);
  flag("wigner_negative", e.wigner_negative);
  num("monopole_remainder", e.monopole_remainder);
  flag("mixture_classical", e.mixture_classical);
  num("mixture_residual", e.mixture_residual);
  num("mixture_residual_above", e.mixture_residual_above);
  num("momentum_drift", e.momentum_drift);
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalFailure("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string scenario_hash(const Scenario& s) { return sha256_hex(canonical_echo(s)); }

Grid build_grid(const Scenario& s) {
  std::vector<double> extent = s.grid.extent;
  std::vector<std::size_t> points = s.grid.points;
  if (s.state.two_particle()) {
    extent.insert(extent.end(), s.grid.extent.begin(), s.grid.extent.end());
    points.insert(points.end(), s.grid.points.begin(), s.grid.points.end());
  }
  return make_grid(extent.size(), extent, points);
}

Units build_units(const Scenario& s) {
  Units u;
  u.hbar = s.units.hbar;
  u.c = s.units.c;
  if (s.integrator.kind == "relativistic") {
    const double m1 = s.units.masses.at(0), m2 = s.units.masses.at(1);
    u.masses = {m1 * m2 / (m1 + m2)};
  } else {
    u.masses = s.units.masses;
  }
  return u;
}

PotentialPtr build_potential(const PotentialSpec& p, std::size_t axes_per_particle) {
  if (p.type == "harmonic") return harmonic_potential(p.stiffness);
  if (p.type == "quartic") return quartic_potential(p.lambda);
  if (p.type == "gaussian_well") return gaussian_well(p.depth, p.width);
  if (p.type == "two_body")
    return two_body_potential(p.pair ? build_potential(*p.pair, axes_per_particle) : nullptr,
                              p.external ? build_potential(*p.external, axes_per_particle) : nullptr,
                              axes_per_particle);
  return free_potential();
}

WaveFunction build_state(const StateSpec& spec, const Grid& particle_grid, const Units& units) {
  if (spec.two_particle()) {
    Units single = units;
    single.masses = {units.masses.at(0)};
    const WaveFunction a = build_state(spec.parts.at(0), particle_grid, single);
    single.masses = {units.masses.at(1)};
    const WaveFunction b = build_state(spec.parts.at(1), particle_grid, single);
    if (spec.type == "product") return product_state(a, b);
    if (units.masses.at(0) != units.masses.at(1))
      throw InvalidArgument("entangled pairs need equal masses");
    return entangled_pair(a, b);
  }
  if (spec.type == "gaussian") return gaussian_state(particle_grid, units, spec.center, spec.momentum, spec.sigma);
  if (spec.type == "coherent") return coherent_state(particle_grid, units, spec.omega, spec.center, spec.momentum);
  if (spec.type == "eigenstate") return harmonic_eigenstate(particle_grid, units, spec.omega, spec.quanta);
  std::vector<WaveFunction> parts;
  for (const auto& p : spec.parts) parts.push_back(build_state(p, particle_grid, units));
  return superposition(parts, spec.coefficients);
}

WaveFunction build_initial_state(const Scenario& s) {
  const Grid g = make_grid(s.grid.dims, s.grid.extent, s.grid.points);
  return build_state(s.state, g, build_units(s));
}

std::filesystem::path default_scenario_dir() { return EMWF_DEFAULT_SCENARIO_DIR; }

std::vector<ScenarioListing> list_scenarios(const std::filesystem::path& dir) {
  std::vector<ScenarioListing> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".scn") continue;
    ScenarioListing l{entry.path(), entry.path().stem().string(), {}};
    try {
      const Scenario s = parse_scenario(entry.path());
      l.name = s.name;
      l.description = s.description;
    } catch (const ScenarioError& e) {
      l.description = "invalid: " + e.errors().front();
    }
    out.push_back(std::move(l));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.file.filename() < b.file.filename(); });
  return out;
}

std::vector<std::string> analysis_names() { return kAnalyses; }

std::string describe(const std::string& analysis) {
  static const std::map<std::string, std::string> docs{
      {"classify",
       "classify: NDWF dipole audit and Ehrenfest residuals of the evolved record.\n"
       "  Verdict emwf, ndwf_only or neither; writes classification.txt and residuals.csv.\n"
       "  Tolerances: tolerances.dipole, tolerances.ehrenfest (scaled by --tol-scale).\n"},
      {"effective",
       "effective: classical trajectories under the multipole-corrected force.\n"
       "  orders: truncation orders N in 1..4 (N = 1 is bare Newton).\n"
       "  multipole_source: frozen (moments of the initial state held fixed) or\n"
       "    time_interpolated (cubic interpolation of the record's moments in time).\n"
       "    prescribed moments are available through the library only.\n"
       "  x0, v0: explicit Cauchy data; otherwise taken from the record, which needs classify.\n"
       "  threshold: position error defining the agreement horizon.\n"
       "  substeps: RK4 steps per saved interval.\n"
       "  Writes classical_N<n>.csv per order and classical.csv for the highest order.\n"},
      {"wigner",
       "wigner: Wigner function of one snapshot (at most two configuration axes).\n"
       "  at: time, 'initial' or 'final'; csv_stride: lattice stride of wigner.csv;\n"
       "  c_max: momentum order of the phase-space coefficient check.\n"
       "  Reports marginal errors, purity, minimum value and the commutator check.\n"},
      {"bohm",
       "bohm: pilot-wave trajectories through the stored snapshots.\n"
       "  seeds: count; seeding: stratified | density | uniform (uniform uses lo/hi or the box).\n"
       "  bins: histogram cells of the 1D equivariance check; euler: Euler residual on/off;\n"
       "  monopole_order: truncation order of the momentum monopole relation (0 skips it).\n"
       "  Writes bohm_trajectories.csv, bohm_fields/, euler_residual.csv.\n"},
      {"mixture",
       "mixture: diagonal two-particle ensemble evolved under the scenario potential.\n"
       "  components: list of {weight, label, state} with two-particle states; weights sum to 1.\n"
       "  axis1, axis2: particle axes of the cross expectation <x1^i x2^j>.\n"
       "  Writes mixture_report.csv with dipoles, verdicts and the quantum-classical residual.\n"}};
  const auto it = docs.find(analysis);
  if (it == docs.end()) {
    const auto near = suggestions(analysis, kAnalyses);
    throw InvalidArgument("unknown analysis '" + analysis + "'" +
                          (near.empty() ? "; available: " + join(kAnalyses, ", ")
                                        : "; did you mean " + join(near, ", ") + "?"));
  }
  return it->second;
}

}  // namespace emwf
