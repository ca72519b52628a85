#include "emwf/classifier.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "emwf/error.hpp"
#include "emwf/moments.hpp"
#include "emwf/record_io.hpp"

namespace emwf {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::emwf: return "EMWF";
    case Verdict::ndwf_only: return "NDWF-only";
    case Verdict::neither: return "neither";
  }
  return "neither";
}

namespace {

double euclid(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::vector<double> mean_force(const WaveFunction& psi, const Potential& v) {
  const Grid& g = psi.grid();
  std::vector<double> f(g.dims(), 0.0);
  if (v.is_free()) return f;
  const auto fields = force_fields(v, g);
  for (std::size_t a = 0; a < g.dims(); ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) f[a] += fields[a][i] * std::norm(psi.values()[i]);
    f[a] *= g.cell_volume();
  }
  return f;
}

}  // namespace

DipoleAudit ndwf_check(const TrajectoryRecord& record, double tol) {
  if (record.size() < 3) throw InvalidArgument("dipole audit needs at least three saved times");
  if (record.snapshots.empty()) throw InvalidArgument("dipole audit needs wave-function snapshots");
  DipoleAudit out;
  out.tolerance = tol;
  out.times = record.times;
  out.trajectory = record.position;
  out.dipole_norm.assign(record.size(), std::numeric_limits<double>::quiet_NaN());
  out.passed = true;
  for (std::size_t s = 0; s < record.snapshots.size(); ++s) {
    const std::size_t i = record.snapshot_index[s];
    const MultipoleSet m = central_moments(density(record.snapshots[s]), record.position[i], 1);
    std::vector<double> dip(m.dims());
    for (std::size_t a = 0; a < m.dims(); ++a) dip[a] = m.density(unit_index(m.dims(), a));
    out.dipole_norm[i] = euclid(dip);
    if (!(out.dipole_norm[i] <= tol)) out.passed = false;
  }
  return out;
}

double EhrenfestResiduals::max_res1() const { return max_of(res1); }
double EhrenfestResiduals::max_res2() const { return max_of(res2); }

EhrenfestResiduals ehrenfest_residuals(const TrajectoryRecord& record, const Potential& v) {
  if (record.size() < 3) throw InvalidArgument("Ehrenfest residuals need at least three saved times");
  EhrenfestResiduals out;
  out.stride = record.uniform_stride();
  const double h2 = 2.0 * out.stride;
  const std::size_t d = record.dims();
  for (std::size_t i = 1; i + 1 < record.size(); ++i) {
    const WaveFunction* snap = record.snapshot_at(i);
    const std::vector<double> force = snap ? mean_force(*snap, v) : record.force[i];
    std::vector<double> r1(d), r2(d);
    for (std::size_t a = 0; a < d; ++a) {
      r1[a] = (record.position[i + 1][a] - record.position[i - 1][a]) / h2 - record.momentum[i][a] / record.mass(a);
      r2[a] = (record.momentum[i + 1][a] - record.momentum[i - 1][a]) / h2 - force[a];
    }
    out.times.push_back(record.times[i]);
    out.res1.push_back(euclid(r1));
    out.res2.push_back(euclid(r2));
  }
  return out;
}

double ehrenfest_tolerance_at(double tol_ehrenfest, double stride) {
  const double r = stride / kReferenceStride;
  return tol_ehrenfest * std::max(1.0, r * r);
}

Verdict decide(bool dipole_passed, double res1, double res2, double tol_ehrenfest) {
  if (!dipole_passed) return Verdict::neither;
  return res1 <= tol_ehrenfest && res2 <= tol_ehrenfest ? Verdict::emwf : Verdict::ndwf_only;
}

ClassificationReport emwf_check(const TrajectoryRecord& record, const Potential& v, double tol_dipole,
                                double tol_ehrenfest) {
  ClassificationReport rep;
  rep.tol_dipole = tol_dipole;
  rep.tol_ehrenfest = tol_ehrenfest;
  rep.dipole = ndwf_check(record, tol_dipole);
  rep.residuals = ehrenfest_residuals(record, v);
  rep.tol_ehrenfest_effective = ehrenfest_tolerance_at(tol_ehrenfest, rep.residuals.stride);
  rep.verdict =
      decide(rep.dipole.passed, rep.residuals.max_res1(), rep.residuals.max_res2(), rep.tol_ehrenfest_effective);
  for (const auto& p : record.momentum) rep.max_abs_momentum = std::max(rep.max_abs_momentum, euclid(p));

  std::ostringstream note;
  note.precision(6);
  note << "stride " << rep.residuals.stride << ": max res1 " << rep.residuals.max_res1() << ", max res2 "
       << rep.residuals.max_res2();
  rep.notes.push_back(note.str());
  if (record.size() >= 5) {
    const TrajectoryRecord coarse = record.thinned(2);
    const EhrenfestResiduals rc = ehrenfest_residuals(coarse, v);
    rep.coarse_stride = rc.stride;
    rep.coarse_res1 = rc.max_res1();
    rep.coarse_res2 = rc.max_res2();
    rep.coarse_verdict = decide(rep.dipole.passed, rep.coarse_res1, rep.coarse_res2,
                                ehrenfest_tolerance_at(tol_ehrenfest, rc.stride));
    std::ostringstream n2;
    n2.precision(6);
    n2 << "stride " << rc.stride << ": max res1 " << rep.coarse_res1 << ", max res2 " << rep.coarse_res2
       << " (verdict " << to_string(rep.coarse_verdict) << ")";
    rep.notes.push_back(n2.str());
  } else {
    rep.notes.push_back("too few saved times for the refinement check");
  }
  return rep;
}

std::vector<std::filesystem::path> write_classification(const ClassificationReport& r,
                                                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto txt = dir / "classification.txt";
  const auto csv = dir / "residuals.csv";
  {
    std::ofstream out(txt);
    out << "verdict: " << to_string(r.verdict) << '\n';
    out << "stride: " << format_number(r.residuals.stride) << '\n';
    out << "tol_dipole: " << format_number(r.tol_dipole) << '\n';
    out << "tol_ehrenfest: " << format_number(r.tol_ehrenfest) << '\n';
    out << "tol_ehrenfest_at_stride: " << format_number(r.tol_ehrenfest_effective) << '\n';
    double dmax = 0.0;
    for (double d : r.dipole.dipole_norm)
      if (std::isfinite(d)) dmax = std::max(dmax, d);
    out << "dipole_audit_max: " << format_number(dmax) << '\n';
    out << "dipole_audit_passed: " << (r.dipole.passed ? "yes" : "no") << '\n';
    out << "res1_max: " << format_number(r.residuals.max_res1()) << '\n';
    out << "res2_max: " << format_number(r.residuals.max_res2()) << '\n';
    out << "coarse_stride: " << format_number(r.coarse_stride) << '\n';
    out << "coarse_res1_max: " << format_number(r.coarse_res1) << '\n';
    out << "coarse_res2_max: " << format_number(r.coarse_res2) << '\n';
    out << "coarse_verdict: " << to_string(r.coarse_verdict) << '\n';
    out << "max_abs_momentum: " << format_number(r.max_abs_momentum) << '\n';
    for (const auto& n : r.notes) out << "note: " << n << '\n';
  }
  {
    std::ofstream out(csv);
    out << "t,res1,res2,dipole_audit\n";
    for (std::size_t k = 0; k < r.residuals.times.size(); ++k) {
      // residual k sits at saved time k + 1
      out << format_number(r.residuals.times[k]) << ',' << format_number(r.residuals.res1[k]) << ','
          << format_number(r.residuals.res2[k]) << ',' << format_number(r.dipole.dipole_norm[k + 1]) << '\n';
    }
  }
  return {txt, csv};
}

ConvergenceFit fit_convergence(const std::vector<double>& strides, const std::vector<double>& residuals) {
  if (strides.size() != residuals.size() || strides.size() < 2)
    throw InvalidArgument("convergence fit needs at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(strides.size());
  for (std::size_t i = 0; i < strides.size(); ++i) {
    if (!(strides[i] > 0.0) || !(residuals[i] > 0.0)) throw InvalidArgument("convergence fit needs positive samples");
    const double x = std::log(strides[i]);
    const double y = std::log(residuals[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidArgument("convergence fit needs distinct strides");
  ConvergenceFit fit;
  fit.order = (n * sxy - sx * sy) / denom;
  fit.constant = std::exp((sy - fit.order * sx) / n);
  return fit;
}

Interference superposition_interference(const WaveFunction& psi1, const WaveFunction& psi2, Complex a, Complex b) {
  const Grid& g = psi1.grid();
  if (!(psi2.grid() == g)) throw InvalidArgument("superposed states live on different grids");
  const Complex overlap = inner_product(psi1, psi2);
  const double w1 = std::norm(a) * psi1.squared_norm();
  const double w2 = std::norm(b) * psi2.squared_norm();
  const double n2 = w1 + w2 + 2.0 * (std::conj(a) * b * overlap).real();
  if (!(n2 > 0.0) || std::norm(a) + std::norm(b) == 0.0) throw DegenerateState("superposition has zero norm");

  const std::size_t d = g.dims();
  std::vector<double> x1(d, 0.0), x2(d, 0.0);
  std::vector<Complex> cross(d, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Complex u = psi1.values()[i];
    const Complex v = psi2.values()[i];
    const Complex t = std::conj(a) * b * std::conj(u) * v;
    for (std::size_t k = 0; k < d; ++k) {
      const double x = g.coordinate(k, g.axis_index(i, k));
      x1[k] += x * std::norm(u);
      x2[k] += x * std::norm(v);
      cross[k] += x * (t + std::conj(t));
    }
  }
  Interference out;
  for (std::size_t k = 0; k < d; ++k) {
    x1[k] *= g.cell_volume();
    x2[k] *= g.cell_volume();
    cross[k] *= g.cell_volume();
    out.interference.push_back(cross[k].real());
    out.imaginary_residue = std::max(out.imaginary_residue, std::abs(cross[k].imag()));
    out.weighted_sum.push_back((std::norm(a) * x1[k] + std::norm(b) * x2[k]) / (std::norm(a) + std::norm(b)));
    out.mean.push_back((std::norm(a) * x1[k] + std::norm(b) * x2[k] + cross[k].real()) / n2);
  }
  return out;
}

}  // namespace emwf
