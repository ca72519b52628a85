#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emwf/grid.hpp"
#include "emwf/potential.hpp"
#include "emwf/record.hpp"

namespace emwf {

enum class Verdict { emwf, ndwf_only, neither };
std::string to_string(Verdict v);

inline constexpr double kDefaultDipoleTolerance = 1e-8;
inline constexpr double kDefaultEhrenfestTolerance = 1e-5;
// Stride at which the Ehrenfest tolerance applies as given; coarser strides
// scale it by (stride / reference)^2, matching the central-difference order.
inline constexpr double kReferenceStride = 1e-3;

double ehrenfest_tolerance_at(double tol_ehrenfest, double stride);

// The trajectory is the stored <x>(t); the audit is the norm of the central
// dipole of each snapshot about it. Times without a snapshot carry NaN.
struct DipoleAudit {
  std::vector<double> times;
  std::vector<std::vector<double>> trajectory;
  std::vector<double> dipole_norm;
  double tolerance = kDefaultDipoleTolerance;
  bool passed = false;
};

// Needs at least three saved times and one snapshot; BoundaryLeak propagates.
DipoleAudit ndwf_check(const TrajectoryRecord& record, double tol = kDefaultDipoleTolerance);

// Central-difference residuals at interior saved times:
// res1 = |D<x> - <p>/m|, res2 = |D<p> - <-grad V>|, Euclidean over axes.
struct EhrenfestResiduals {
  double stride = 0.0;
  std::vector<double> times;
  std::vector<double> res1;
  std::vector<double> res2;
  double max_res1() const;
  double max_res2() const;
};

// <-grad V> is recomputed from snapshots where present, otherwise the stored
// force expectations are used. Non-uniform strides are rejected.
EhrenfestResiduals ehrenfest_residuals(const TrajectoryRecord& record, const Potential& v);

struct ClassificationReport {
  DipoleAudit dipole;
  EhrenfestResiduals residuals;
  // Residual maxima of the same record at twice the stride.
  double coarse_stride = 0.0;
  double coarse_res1 = 0.0;
  double coarse_res2 = 0.0;
  Verdict coarse_verdict = Verdict::neither;
  double tol_dipole = kDefaultDipoleTolerance;
  double tol_ehrenfest = kDefaultEhrenfestTolerance;
  double tol_ehrenfest_effective = kDefaultEhrenfestTolerance;
  double max_abs_momentum = 0.0;
  Verdict verdict = Verdict::neither;
  std::vector<std::string> notes;
};

Verdict decide(bool dipole_passed, double res1, double res2, double tol_ehrenfest);

ClassificationReport emwf_check(const TrajectoryRecord& record, const Potential& v,
                                double tol_dipole = kDefaultDipoleTolerance,
                                double tol_ehrenfest = kDefaultEhrenfestTolerance);

// classification.txt (key: value) and residuals.csv (t, res1, res2, dipole_audit).
std::vector<std::filesystem::path> write_classification(const ClassificationReport& report,
                                                        const std::filesystem::path& dir);

// Least-squares fit residual = C * stride^order in log-log coordinates.
struct ConvergenceFit {
  double order = 0.0;
  double constant = 0.0;
};
ConvergenceFit fit_convergence(const std::vector<double>& strides, const std::vector<double>& residuals);

struct Interference {
  std::vector<double> mean;           // <x> of the normalized superposition
  std::vector<double> weighted_sum;   // (|a|^2 x1 + |b|^2 x2) / (|a|^2 + |b|^2)
  std::vector<double> interference;   // int x (a* b psi1* psi2 + c.c.)
  double imaginary_residue = 0.0;
};

Interference superposition_interference(const WaveFunction& psi1, const WaveFunction& psi2, Complex a, Complex b);

}  // namespace emwf
