#include "emwf/moments.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "emwf/error.hpp"
#include "emwf/parallel.hpp"
#include "emwf/record.hpp"
#include "emwf/spectral.hpp"

namespace emwf {
namespace {

RealField squared_modulus(const WaveFunction& psi) {
  RealField rho(psi.values().size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values()[i]);
  return rho;
}

// (x - c)^k for k <= order on every axis at lattice point `flat`.
void fill_powers(const Grid& g, std::size_t flat, const std::vector<double>& center, int order,
                 std::vector<std::vector<double>>& pw) {
  for (std::size_t a = 0; a < g.dims(); ++a) {
    const double u = g.coordinate(a, g.axis_index(flat, a)) - center[a];
    pw[a][0] = 1.0;
    for (int k = 1; k <= order; ++k) pw[a][k] = pw[a][k - 1] * u;
  }
}

double monomial(const std::vector<std::vector<double>>& pw, const MultiIndex& alpha) {
  double m = 1.0;
  for (std::size_t a = 0; a < alpha.size(); ++a) m *= pw[a][alpha[a]];
  return m;
}

}  // namespace

DensityField density(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  DensityField f{g, squared_modulus(psi), {}};
  f.current.resize(g.dims());
  for (std::size_t r = 0; r < g.dims(); ++r) {
    const ComplexField d = spectral_gradient(psi, r);
    RealField j(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) j[i] = psi.hbar() * (std::conj(psi.values()[i]) * d[i]).imag();
    f.current[r] = std::move(j);
  }
  return f;
}

std::vector<double> position_expectation(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  const RealField rho = squared_modulus(psi);
  check_boundary(g, rho, psi.time(), "position_expectation");
  std::vector<double> x(g.dims(), 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t a = 0; a < g.dims(); ++a) x[a] += g.coordinate(a, g.axis_index(i, a)) * rho[i];
  for (double& v : x) v *= g.cell_volume();
  return x;
}

std::vector<double> momentum_expectation(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  check_boundary(psi, "momentum_expectation");
  // Fourier-space sum; equals the integral of j for band-limited states.
  ComplexField work(psi.values());
  fft_forward(g, work);
  std::vector<double> p(g.dims(), 0.0);
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double w = std::norm(work[i]);
    for (std::size_t a = 0; a < g.dims(); ++a) {
      const std::size_t k = g.axis_index(i, a);
      // The Nyquist mode carries no net momentum.
      if (2 * k == g.points(a)) continue;
      p[a] += psi.hbar() * g.wavenumber(a, k) * w;
    }
  }
  // Parseval: sum |DFT|^2 = N sum |psi|^2.
  const double scale = g.cell_volume() / static_cast<double>(g.size());
  for (double& v : p) v *= scale;
  return p;
}

double MultipoleSet::density(const MultiIndex& alpha) const {
  auto it = density_moments.find(alpha);
  if (it == density_moments.end()) throw InvalidArgument("density moment " + to_string(alpha) + " not available");
  return it->second;
}

double MultipoleSet::momentum(std::size_t component, const MultiIndex& alpha) const {
  auto it = momentum_moments.find({component, alpha});
  if (it == momentum_moments.end())
    throw InvalidArgument("momentum moment " + std::to_string(component) + ":" + to_string(alpha) + " not available");
  return it->second;
}

Complex MultipoleSet::pair(const PairKey& key) const {
  if (!pair_moments) throw InvalidArgument("derivative-pair moments were not computed");
  auto it = pair_moments->find(key);
  if (it == pair_moments->end())
    throw InvalidArgument("derivative-pair moment (" + to_string(key.conj) + "|" + to_string(key.psi) + "|" +
                          to_string(key.position) + ") not available");
  return it->second;
}

std::vector<std::vector<double>> MultipoleSet::covariance() const {
  const std::size_t d = dims();
  std::vector<std::vector<double>> c(d, std::vector<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) c[i][j] = density(add(unit_index(d, i), unit_index(d, j)));
  return c;
}

MultipoleSet central_moments(const DensityField& field, const std::vector<double>& center, int order,
                             int order_cap) {
  const Grid& g = field.grid;
  if (order < 0 || order > order_cap)
    throw InvalidArgument("moment order " + std::to_string(order) + " outside [0, " + std::to_string(order_cap) + "]");
  if (center.size() != g.dims()) throw InvalidArgument("moment center has wrong dimension");
  for (std::size_t a = 0; a < g.dims(); ++a)
    if (!(std::abs(center[a]) <= 0.5 * g.extent(a))) throw InvalidArgument("moment center outside the box");
  check_boundary(g, field.rho, 0.0, "central_moments");

  const auto indices = indices_up_to(g.dims(), order);
  std::vector<double> dens(indices.size(), 0.0);
  std::vector<std::vector<double>> mom(g.dims(), std::vector<double>(indices.size(), 0.0));
  std::vector<std::vector<double>> pw(g.dims(), std::vector<double>(order + 1));
  const bool with_current = field.current.size() == g.dims();
  for (std::size_t i = 0; i < g.size(); ++i) {
    fill_powers(g, i, center, order, pw);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const double m = monomial(pw, indices[k]);
      dens[k] += m * field.rho[i];
      if (with_current)
        for (std::size_t r = 0; r < g.dims(); ++r) mom[r][k] += m * field.current[r][i];
    }
  }
  MultipoleSet out;
  out.center = center;
  out.order = order;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.density_moments[indices[k]] = dens[k] * g.cell_volume();
    if (with_current)
      for (std::size_t r = 0; r < g.dims(); ++r) out.momentum_moments[{r, indices[k]}] = mom[r][k] * g.cell_volume();
  }
  return out;
}

void check_multipoles(const MultipoleSet& m, double tol) {
  const double mono = m.density(MultiIndex(m.dims(), 0));
  if (std::abs(mono - 1.0) > tol) {
    std::ostringstream msg;
    msg << "density monopole " << mono << " differs from 1 by more than " << tol;
    throw NumericalFailure(msg.str());
  }
  if (m.order < 2) return;
  const auto c = m.covariance();
  const auto d = static_cast<Eigen::Index>(m.dims());
  Eigen::MatrixXd cov(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) cov(i, j) = c[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  const double smallest = solver.eigenvalues().minCoeff();
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  if (smallest < -tol * scale) {
    std::ostringstream msg;
    msg << "covariance is not positive semidefinite (smallest eigenvalue " << smallest << ")";
    throw NumericalFailure(msg.str());
  }
}

PairMoments derivative_pair_moments(const WaveFunction& psi, const std::vector<double>& center, int c_max,
                                    int position_order) {
  const Grid& g = psi.grid();
  if (c_max < 0 || c_max > kMaxPairOrder)
    throw InvalidArgument("pair order " + std::to_string(c_max) + " outside [0, " + std::to_string(kMaxPairOrder) + "]");
  if (position_order < 0 || position_order > kMaxMomentOrder) throw InvalidArgument("position order out of range");
  if (center.size() != g.dims()) throw InvalidArgument("pair-moment center has wrong dimension");

  const auto derivs = indices_up_to(g.dims(), c_max);
  std::map<MultiIndex, ComplexField> d;
  for (const auto& alpha : derivs)
    d[alpha] = order(alpha) == 0 ? psi.values() : spectral_derivative(g, psi.values(), alpha);

  const auto positions = indices_up_to(g.dims(), position_order);
  std::vector<RealField> mono(positions.size(), RealField(g.size()));
  std::vector<std::vector<double>> pw(g.dims(), std::vector<double>(position_order + 1));
  for (std::size_t i = 0; i < g.size(); ++i) {
    fill_powers(g, i, center, position_order, pw);
    for (std::size_t k = 0; k < positions.size(); ++k) mono[k][i] = monomial(pw, positions[k]);
  }

  PairMoments out;
  for (const auto& a : derivs) {
    for (const auto& b : derivs) {
      if (order(a) + order(b) > c_max) continue;
      const ComplexField& fa = d[a];
      const ComplexField& fb = d[b];
      for (std::size_t k = 0; k < positions.size(); ++k) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += mono[k][i] * std::conj(fa[i]) * fb[i];
        out[{a, b, positions[k]}] = s * g.cell_volume();
      }
    }
  }
  return out;
}

Uncertainties uncertainties(const WaveFunction& psi, const MultipoleSet& m) {
  const std::size_t d = m.dims();
  if (m.order < 2) throw InvalidArgument("uncertainties need multipoles of order >= 2");
  const MultiIndex zero(d, 0);
  Uncertainties u;
  for (std::size_t r = 0; r < d; ++r) {
    const MultiIndex e = unit_index(d, r);
    const double vx = m.density(add(e, e));
    // <p_r^2> = -hbar^2 int psi* d_r^2 psi
    const double p2 = (-psi.hbar() * psi.hbar() * m.pair({zero, add(e, e), zero})).real();
    const double p1 = m.momentum(r, zero);
    const double vp = p2 - p1 * p1;
    const double tol = 1e-9 * std::max(1.0, p2);
    if (vx < -1e-12 || vp < -tol) throw NumericalFailure("negative variance: quadrature failure");
    u.dx.push_back(std::sqrt(std::max(0.0, vx)));
    u.dp.push_back(std::sqrt(std::max(0.0, vp)));
  }
  return u;
}

AngularMomentum angular_momentum_expectation(const WaveFunction& psi, const MultipoleSet& m) {
  if (psi.grid().dims() != 3 || m.dims() != 3) throw InvalidArgument("angular momentum needs a 3D state");
  if (m.order < 1) throw InvalidArgument("angular momentum needs momentum dipoles");
  const MultiIndex zero(3, 0);
  std::array<double, 3> p{};
  for (std::size_t k = 0; k < 3; ++k) p[k] = m.momentum(k, zero);
  // dip[k][j] = int (x - c)^j j^k
  double dip[3][3];
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 3; ++j) dip[k][j] = m.momentum(k, unit_index(3, j));
  AngularMomentum out;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = (i + 1) % 3;
    const std::size_t k = (i + 2) % 3;
    out.classical[i] = m.center[j] * p[k] - m.center[k] * p[j];
    out.residual[i] = dip[k][j] - dip[j][k];
    out.expectation[i] = out.classical[i] + out.residual[i];
  }
  return out;
}

std::vector<MultipoleSet> record_multipoles(const TrajectoryRecord& record, int order, unsigned threads) {
  std::vector<MultipoleSet> out(record.snapshots.size());
  parallel_for(record.snapshots.size(), threads, [&](std::size_t s) {
    const WaveFunction& psi = record.snapshots[s];
    out[s] = central_moments(density(psi), position_expectation(psi), order);
  });
  return out;
}

}  // namespace emwf
