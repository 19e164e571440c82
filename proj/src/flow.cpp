#include "masschase/flow.hpp"

#include <algorithm>
#include <cmath>

#include "masschase/error.hpp"
#include "masschase/parallel.hpp"

namespace masschase {

namespace {

struct State {
  double y;
  double j;
};

// One piece with a fixed autonomous field; h may be negative.
State rk4_piece(const ControlField& f, State s, double h, int n) {
  for (int k = 0; k < n; ++k) {
    const double k1y = f.value(s.y);
    const double k1j = f.derivative(s.y) * s.j;
    const double y2 = s.y + 0.5 * h * k1y;
    const double j2 = s.j + 0.5 * h * k1j;
    const double k2y = f.value(y2);
    const double k2j = f.derivative(y2) * j2;
    const double y3 = s.y + 0.5 * h * k2y;
    const double j3 = s.j + 0.5 * h * k2j;
    const double k3y = f.value(y3);
    const double k3j = f.derivative(y3) * j3;
    const double y4 = s.y + h * k3y;
    const double j4 = s.j + h * k3j;
    const double k4y = f.value(y4);
    const double k4j = f.derivative(y4) * j4;
    s.y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    s.j += h / 6.0 * (k1j + 2.0 * k2j + 2.0 * k3j + k4j);
  }
  return s;
}

int piece_steps(int steps, double piece_len, double total_len) {
  const double share = static_cast<double>(steps) * piece_len / total_len;
  return std::max(1, static_cast<int>(std::ceil(share - 1e-9)));
}

void check_times(double t0, double t1, int steps) {
  if (!(t1 >= t0)) throw InvalidArgument("flow: need t0 <= t1");
  if (steps < 1) throw InvalidArgument("flow: steps must be >= 1");
}

}  // namespace

FlowPoint integrate_flow(const ControlSchedule& schedule, double x, double t0, double t1, int steps) {
  check_times(t0, t1, steps);
  State s{x, 1.0};
  const double total = t1 - t0;
  for (const auto& p : schedule.pieces(t0, t1)) {
    const int n = piece_steps(steps, p.t1 - p.t0, total);
    s = rk4_piece(*p.field, s, (p.t1 - p.t0) / n, n);
  }
  return {s.y, s.j};
}

FlowPoint inverse_flow_with_jacobian(const ControlSchedule& schedule, double x, double t0, double t1, int steps) {
  check_times(t0, t1, steps);
  State s{x, 1.0};
  const double total = t1 - t0;
  auto parts = schedule.pieces(t0, t1);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const int n = piece_steps(steps, it->t1 - it->t0, total);
    s = rk4_piece(*it->field, s, -(it->t1 - it->t0) / n, n);
  }
  return {s.y, s.j};
}

double inverse_flow(const ControlSchedule& schedule, double x, double t0, double t1, int steps) {
  return inverse_flow_with_jacobian(schedule, x, t0, t1, steps).phi;
}

FlowMap::FlowMap(const ControlSchedule& schedule, const Grid1D& grid, double t0, double t1, int steps)
    : grid_(grid), t0_(t0), t1_(t1), forward_(grid.n_nodes()), inverse_(grid.n_nodes()) {
  check_times(t0, t1, steps);
  parallel_for(grid.n_nodes(), [&](std::size_t i) {
    forward_[i] = integrate_flow(schedule, grid.x(i), t0, t1, steps);
    inverse_[i] = inverse_flow_with_jacobian(schedule, grid.x(i), t0, t1, steps);
  });
}

namespace {

FlowPoint interpolate_points(const Grid1D& g, const std::vector<FlowPoint>& pts, double x) {
  const double pos = std::clamp((x - g.lo()) / g.dx(), 0.0, static_cast<double>(g.n_cells()));
  auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(g.n_cells()) - 1);
  // Outside the grid the map is extrapolated from the end cell.
  const double u = (x - g.x(i)) / g.dx();
  return {pts[i].phi + u * (pts[i + 1].phi - pts[i].phi), pts[i].jac + u * (pts[i + 1].jac - pts[i].jac)};
}

}  // namespace

FlowPoint FlowMap::forward(double x) const { return interpolate_points(grid_, forward_, x); }
FlowPoint FlowMap::inverse(double x) const { return interpolate_points(grid_, inverse_, x); }

double FlowMap::min_jacobian() const {
  double j = forward_.front().jac;
  for (const auto& p : forward_) j = std::min(j, p.jac);
  return j;
}

DensityGrid push_forward(const DensityGrid& m0, const ControlSchedule& schedule, double t0, double t1, int steps,
                         bool renormalize) {
  check_times(t0, t1, steps);
  if (t1 == t0) return m0;
  const Grid1D& g = m0.grid();
  const Interval supp = support_of(m0);
  if (supp.length() == 0.0) return m0;
  const double M = schedule.sup_norm(g.domain());
  const Interval tube{supp.lo - M * (t1 - t0), supp.hi + M * (t1 - t0)};
  if (!g.domain().contains(tube)) {
    throw TubeOverflow("push_forward: support tube [" + std::to_string(tube.lo) + ", " + std::to_string(tube.hi) +
                       "] leaves the domain [" + std::to_string(g.lo()) + ", " + std::to_string(g.hi()) + "]");
  }
  std::vector<double> out(g.n_nodes(), 0.0);
  std::vector<char> bad(g.n_nodes(), 0);
  parallel_for(g.n_nodes() - 2, [&](std::size_t k) {
    const std::size_t i = k + 1;
    const FlowPoint pre = inverse_flow_with_jacobian(schedule, g.x(i), t0, t1, steps);
    // pre.jac = dz/dx = 1 / J_Phi(z).
    if (!(pre.jac > 0.0) || !std::isfinite(pre.jac)) {
      bad[i] = 1;
      return;
    }
    out[i] = sample_at(m0, pre.phi) * pre.jac;
  });
  if (std::any_of(bad.begin(), bad.end(), [](char b) { return b != 0; })) {
    throw NonPositiveJacobian("push_forward: characteristic Jacobian is not positive");
  }
  if (renormalize) {
    const double target = total_mass(m0);
    const double got = integrate(g, out);
    if (got > 0.0) {
      const double scale = target / got;
      for (double& v : out) v *= scale;
    }
  }
  return DensityGrid(g, std::move(out));
}

std::vector<DensityGrid> solve_continuity(const DensityGrid& m0, const ControlSchedule& schedule, double t0,
                                          const std::vector<double>& snapshot_times, double steps_per_unit) {
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end())) {
    throw InvalidArgument("solve_continuity: snapshot times must be sorted");
  }
  if (!(steps_per_unit > 0.0)) throw InvalidArgument("solve_continuity: steps_per_unit must be positive");
  std::vector<DensityGrid> out;
  out.reserve(snapshot_times.size());
  for (double s : snapshot_times) {
    if (s < t0) throw InvalidArgument("solve_continuity: snapshot before t0");
    if (s == t0) {
      out.push_back(m0);
      continue;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(steps_per_unit * (s - t0) - 1e-9)));
    out.push_back(push_forward(m0, schedule, t0, s, steps));
  }
  return out;
}

SupportTube::SupportTube(double lo, double hi, double speed_bound) : omega_lo(lo), omega_hi(hi), M(speed_bound) {
  if (!(lo < hi)) throw InvalidArgument("support tube: need omega_lo < omega_hi");
  if (!(speed_bound > 0.0)) throw InvalidArgument("support tube: M must be positive");
}

Interval support_tube(const SupportTube& tube, double t, double s) {
  if (!(t >= 0.0 && s >= t)) throw InvalidArgument("support_tube: need 0 <= t <= s");
  return {tube.omega_lo - tube.M * s, tube.omega_hi + tube.M * s};
}

double semigroup_error(const ControlSchedule& schedule, double x, double t0, double t1, double t2,
                       double steps_per_unit) {
  auto steps = [&](double a, double b) { return std::max(1, static_cast<int>(std::ceil(steps_per_unit * (b - a)))); };
  const double direct = integrate_flow(schedule, x, t0, t2, steps(t0, t2)).phi;
  const double mid = integrate_flow(schedule, x, t0, t1, steps(t0, t1)).phi;
  const double composed = integrate_flow(schedule, mid, t1, t2, steps(t1, t2)).phi;
  return std::abs(composed - direct);
}

double liouville_error(const ControlSchedule& schedule, double x, double t0, double t1, int steps) {
  const FlowPoint fp = integrate_flow(schedule, x, t0, t1, steps);
  // log J as its own ODE: y' = beta(y), L' = beta_x(y).
  double y = x;
  double L = 0.0;
  const double total = t1 - t0;
  for (const auto& p : schedule.pieces(t0, t1)) {
    const int n = piece_steps(steps, p.t1 - p.t0, total);
    const double h = (p.t1 - p.t0) / n;
    const ControlField& f = *p.field;
    for (int k = 0; k < n; ++k) {
      const double k1 = f.value(y);
      const double l1 = f.derivative(y);
      const double k2 = f.value(y + 0.5 * h * k1);
      const double l2 = f.derivative(y + 0.5 * h * k1);
      const double k3 = f.value(y + 0.5 * h * k2);
      const double l3 = f.derivative(y + 0.5 * h * k2);
      const double k4 = f.value(y + h * k3);
      const double l4 = f.derivative(y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      L += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
  }
  return std::abs(fp.jac - std::exp(L)) / std::abs(fp.jac);
}

bool InvariantSetReport::all_contained() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.contained; });
}

bool InvariantSetReport::all_bounded() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.norm_ok; });
}

InvariantSetReport verify_invariant_set(const DensityGrid& m0, const std::vector<ControlSchedule>& schedules,
                                        const SupportTube& tube, double bound, const std::vector<double>& check_times,
                                        const std::vector<DensityPair>& pairs, double steps_per_unit) {
  InvariantSetReport report;
  report.bound = bound;
  const double mass0 = total_mass(m0);
  const double tol = m0.dx() * (1.0 + 1e-9);
  for (std::size_t si = 0; si < schedules.size(); ++si) {
    const ControlSchedule& sched = schedules[si];
    const double t0 = sched.t0();
    const auto snaps = solve_continuity(m0, sched, t0, check_times, steps_per_unit);
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      InvariantCheck c;
      c.schedule = si;
      c.time = check_times[k];
      c.support = support_of(snaps[k]);
      c.tube = support_tube(tube, 0.0, check_times[k]);
      c.contained = c.support.length() == 0.0 || c.tube.contains(c.support, tol);
      c.w1inf = lp_norm(snaps[k], Norm::W1Inf);
      c.norm_ok = c.w1inf <= bound;
      c.mass_drift = mass0 > 0.0 ? std::abs(total_mass(snaps[k]) - mass0) / mass0 : 0.0;
      report.checks.push_back(c);
    }
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
      const double base = lp_norm(GradientGrid::difference(pairs[pi].first, pairs[pi].second), Norm::H1);
      if (base == 0.0) continue;
      const auto a = solve_continuity(pairs[pi].first, sched, t0, check_times, steps_per_unit);
      const auto b = solve_continuity(pairs[pi].second, sched, t0, check_times, steps_per_unit);
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double r = lp_norm(GradientGrid::difference(a[k], b[k]), Norm::H1) / base;
        report.ratios.push_back({si, pi, check_times[k], r});
        report.max_ratio = std::max(report.max_ratio, r);
      }
    }
  }
  return report;
}

}  // namespace masschase
