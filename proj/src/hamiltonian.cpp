#include "masschase/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "masschase/error.hpp"

namespace masschase {

namespace {

// D = H^{-1} Q with H the Simpson weights and Q antisymmetric, so
// sum_i w_i u_i (D v)_i = -sum_i w_i v_i (D u)_i exactly. Even nodes get the
// centered difference, odd nodes a four-point central stencil; both are exact
// for linear data away from the first and last interior node.
std::vector<double> simpson_sbp_difference(const Grid1D& g, std::span<const double> v) {
  const std::size_t n = v.size();
  auto at = [&](std::ptrdiff_t j) { return j < 0 || j >= static_cast<std::ptrdiff_t>(n) ? 0.0 : v[j]; };
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    double qv = (at(k + 1) - at(k - 1)) / 3.0;
    // Q's second off-diagonal: 1/6 on rows of odd nodes, paired with -1/6 on the mirrored rows.
    if (i % 2 == 1) {
      qv += (at(k + 2) - at(k - 2)) / 6.0;
    }
    const double w = (i == 0 || i + 1 == n) ? 1.0 / 3.0 : (i % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
    d[i] = qv / (w * g.dx());
  }
  return d;
}

}  // namespace

double transport_pairing(const GradientGrid& p, const ControlField& f, const DensityGrid& m, double sigma,
                         PairingForm form) {
  if (!(p.grid() == m.grid())) throw GridMismatch("transport_pairing: p and m live on different grids");
  const Grid1D& g = m.grid();
  const std::size_t n = m.size();
  std::vector<double> integrand(n);
  if (form == PairingForm::IntegrationByParts) {
    const auto dp = simpson_sbp_difference(g, p.values());
    for (std::size_t i = 0; i < n; ++i) integrand[i] = -f.value(g.x(i)) * m[i] * dp[i];
    if (sigma > 0.0) {
      const auto dm = simpson_sbp_difference(g, m.values());
      for (std::size_t i = 0; i < n; ++i) integrand[i] += sigma * dm[i] * dp[i];
    }
    return integrate(g, integrand);
  }
  const auto dm = centered_difference(g, m.values());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x(i);
    integrand[i] = p[i] * (f.derivative(x) * m[i] + f.value(x) * dm[i]);
  }
  double value = integrate(g, integrand);
  if (sigma > 0.0) {
    const auto lap = second_difference(g, m.values());
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = lap[i] * p[i];
    value -= sigma * integrate(g, diff);
  }
  return value;
}

HamiltonianResult hamiltonian_minmax(const DensityGrid& mX, const DensityGrid& mY, double t, const GradientGrid& p,
                                     const GradientGrid& q, const ControlDictionary& dictA,
                                     const ControlDictionary& dictB, const RunningCost& rc, double sigma) {
  const std::size_t na = dictA.size();
  const std::size_t nb = dictB.size();
  std::vector<double> pairA(na), pairB(nb);
  for (std::size_t a = 0; a < na; ++a) pairA[a] = transport_pairing(p, dictA[a], mX, sigma);
  for (std::size_t b = 0; b < nb; ++b) pairB[b] = transport_pairing(q, dictB[b], mY, sigma);
  const Interval tube = mX.grid().domain();

  HamiltonianResult r;
  r.matrix.assign(nb, std::vector<double>(na));
  r.argmax_a_per_b.assign(nb, 0);
  r.value = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < nb; ++b) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      const double v = pairA[a] + pairB[b] - running_cost(rc, mX, mY, t, dictA[a], dictB[b], tube);
      r.matrix[b][a] = v;
      if (v > best) {
        best = v;
        r.argmax_a_per_b[b] = a;
      }
    }
    if (best < r.value) {
      r.value = best;
      r.argmin_b = b;
    }
  }
  return r;
}

nlohmann::json to_json(const HamiltonianResult& r) {
  return {{"value", r.value}, {"argmin_b", r.argmin_b}, {"argmax_a_per_b", r.argmax_a_per_b}, {"matrix", r.matrix}};
}

CandidateValue CandidateValue::psi3_analytic() { return CandidateValue(Kind::Psi3Analytic); }
CandidateValue CandidateValue::psi1_analytic() { return CandidateValue(Kind::Psi1Analytic); }

CandidateValue CandidateValue::tabulated(std::shared_ptr<const ValueTable> table, std::shared_ptr<const GameSpec> spec) {
  if (!table || !spec) throw InvalidArgument("tabulated candidate: table and game are required");
  CandidateValue c(Kind::Tabulated);
  c.table_ = std::move(table);
  c.spec_ = std::move(spec);
  return c;
}

namespace {

// Lower value at (t, hX, hY), linear in time between levels.
double table_value(const ValueTable& table, double t, double hX, double hY) {
  const auto& times = table.times();
  std::size_t k = 0;
  while (k + 2 < times.size() && times[k + 1] <= t) ++k;
  if (times.size() == 1) {
    const auto s = table.interpolate_lower(0, hX, hY);
    if (s.status != CellStatus::Valid) throw InvalidArgument("tabulated candidate: state outside the solved region");
    return s.value;
  }
  const auto a = table.interpolate_lower(static_cast<int>(k), hX, hY);
  const auto b = table.interpolate_lower(static_cast<int>(k + 1), hX, hY);
  if (a.status != CellStatus::Valid || b.status != CellStatus::Valid) {
    throw InvalidArgument("tabulated candidate: state outside the solved region");
  }
  const double w = std::clamp((t - times[k]) / (times[k + 1] - times[k]), 0.0, 1.0);
  return (1.0 - w) * a.value + w * b.value;
}

}  // namespace

CandidateEval CandidateValue::evaluate(const DensityGrid& mX, const DensityGrid& mY, double t) const {
  const Grid1D& g = mX.grid();
  CandidateEval e;
  switch (kind_) {
    case Kind::Psi3Analytic: {
      const double d = mean(mX) - mean(mY);
      e.V = d * d;
      e.DX = GradientGrid::from_function(g, [d](double x) { return 2.0 * d * x; });
      e.DY = GradientGrid::from_function(mY.grid(), [d](double x) { return -2.0 * d * x; });
      return e;
    }
    case Kind::Psi1Analytic:
      e.V = psi1(mX, mY);
      e.DX = GradientGrid::from_density(mY);
      e.DY = GradientGrid::from_density(mX);
      return e;
    case Kind::Tabulated: {
      const double hX = centroid(mX) - centroid(spec_->mX0);
      const double hY = centroid(mY) - centroid(spec_->mY0);
      const ValueTable& tab = *table_;
      const double dh = 0.5 * std::min(tab.axis_x().spacing, tab.axis_y().spacing);
      const auto& times = tab.times();
      const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
      e.V = table_value(tab, t, hX, hY);
      const double t_lo = std::max(times.front(), t - 0.5 * dt);
      const double t_hi = std::min(times.back(), t + 0.5 * dt);
      e.V_t = t_hi > t_lo ? (table_value(tab, t_hi, hX, hY) - table_value(tab, t_lo, hX, hY)) / (t_hi - t_lo) : 0.0;
      const double dVx = (table_value(tab, t, hX + dh, hY) - table_value(tab, t, hX - dh, hY)) / (2.0 * dh);
      const double dVy = (table_value(tab, t, hX, hY + dh) - table_value(tab, t, hX, hY - dh)) / (2.0 * dh);
      // A linear p = k x pairs with a rigid translation at speed a as -a k mass.
      const double kx = dVx / total_mass(mX);
      const double ky = dVy / total_mass(mY);
      e.DX = GradientGrid::from_function(g, [kx](double x) { return kx * x; });
      e.DY = GradientGrid::from_function(mY.grid(), [ky](double x) { return ky * x; });
      return e;
    }
  }
  return e;
}

double isaacs_residual(const CandidateValue& candidate, const DensityGrid& mX, const DensityGrid& mY, double t,
                       const ControlDictionary& dictA, const ControlDictionary& dictB, const RunningCost& rc,
                       double sigma) {
  const CandidateEval e = candidate.evaluate(mX, mY, t);
  return -e.V_t + hamiltonian_minmax(mX, mY, t, e.DX, e.DY, dictA, dictB, rc, sigma).value;
}

ContinuityGap continuity_gap_check(const DensityGrid& m1X, const DensityGrid& m1Y, double t1, const DensityGrid& m2X,
                                   const DensityGrid& m2Y, double t2, double zeta, double xi,
                                   const ControlDictionary& dictA, const ControlDictionary& dictB,
                                   const RunningCost& rc, double M_bound) {
  if (!(zeta > 0.0) || !(xi > 0.0)) throw InvalidArgument("continuity_gap_check: zeta and xi must be positive");
  const GradientGrid dX = GradientGrid::difference(m1X, m2X);
  const GradientGrid dY = GradientGrid::difference(m1Y, m2Y);
  const GradientGrid p = dX.scaled(2.0 / (zeta * zeta));
  const GradientGrid q = dY.scaled(2.0 / (xi * xi));
  const double h1 = hamiltonian_minmax(m1X, m1Y, t1, p, q, dictA, dictB, rc, 0.0).value;
  const double h2 = hamiltonian_minmax(m2X, m2Y, t2, p, q, dictA, dictB, rc, 0.0).value;
  ContinuityGap gap;
  gap.lhs = std::abs(h1 - h2);
  const double nX = lp_norm(dX, Norm::L2);
  const double nY = lp_norm(dY, Norm::L2);
  gap.rhs = M_bound * (nX * nX / (zeta * zeta) + nY * nY / (xi * xi));
  gap.pass = gap.lhs <= gap.rhs + 1e-6;
  return gap;
}

}  // namespace masschase
