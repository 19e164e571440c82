#pragma once

#include <utility>
#include <vector>

#include "masschase/controls.hpp"
#include "masschase/grid.hpp"

namespace masschase {

/// Position and Jacobian of the characteristic map at one point.
struct FlowPoint {
  double phi = 0.0;
  double jac = 1.0;
};

/// Classical RK4 on the trajectory y' = beta(y, s) together with the
/// variational equation J' = beta_x(y, s) J, J(t0) = 1. The step budget is
/// split across the schedule's pieces so that no RK stage straddles a switch.
FlowPoint integrate_flow(const ControlSchedule& schedule, double x, double t0, double t1, int steps);

/// Backward integration from t1 to t0 starting at x. `jac` is d(phi)/dx of the
/// inverse map, i.e. 1 / J_Phi evaluated at the returned preimage.
FlowPoint inverse_flow_with_jacobian(const ControlSchedule& schedule, double x, double t0, double t1, int steps);

double inverse_flow(const ControlSchedule& schedule, double x, double t0, double t1, int steps);

/// Forward and inverse characteristic maps sampled at every node of a grid.
/// Off-node queries interpolate linearly between the stored trajectories.
class FlowMap {
 public:
  FlowMap(const ControlSchedule& schedule, const Grid1D& grid, double t0, double t1, int steps);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  const Grid1D& grid() const { return grid_; }

  FlowPoint forward_at_node(std::size_t i) const { return forward_[i]; }
  FlowPoint inverse_at_node(std::size_t i) const { return inverse_[i]; }
  FlowPoint forward(double x) const;
  FlowPoint inverse(double x) const;

  double min_jacobian() const;

 private:
  Grid1D grid_;
  double t0_;
  double t1_;
  std::vector<FlowPoint> forward_;
  std::vector<FlowPoint> inverse_;
};

/// Transport of a density along the characteristics:
/// m(x, t1) = m0(z) / J_Phi(z, t0, t1) with z the preimage of x.
/// Throws TubeOverflow when the support, widened by the field's speed bound
/// over [t0, t1], does not fit inside the grid.
/// With renormalize set, the node values are rescaled so the Simpson mass
/// matches m0 (a global mass fixer; pointwise values move by the raw drift).
DensityGrid push_forward(const DensityGrid& m0, const ControlSchedule& schedule, double t0, double t1, int steps,
                         bool renormalize = true);

/// push_forward evaluated at each snapshot time from t0. A snapshot at t0
/// returns m0 unchanged. Step count per snapshot is ceil(steps_per_unit * (s - t0)).
std::vector<DensityGrid> solve_continuity(const DensityGrid& m0, const ControlSchedule& schedule, double t0,
                                          const std::vector<double>& snapshot_times, double steps_per_unit);

struct SupportTube {
  double omega_lo;
  double omega_hi;
  double M;

  SupportTube(double lo, double hi, double speed_bound);
};

/// Omega widened by M s. The answer does not depend on t in [0, s].
Interval support_tube(const SupportTube& tube, double t, double s);

/// |Phi(Phi(x, t0, t1), t1, t2) - Phi(x, t0, t2)|.
double semigroup_error(const ControlSchedule& schedule, double x, double t0, double t1, double t2,
                       double steps_per_unit);

/// Relative gap between J_Phi and exp of the time integral of div beta along
/// the trajectory, the latter integrated as its own scalar ODE.
double liouville_error(const ControlSchedule& schedule, double x, double t0, double t1, int steps);

struct InvariantCheck {
  std::size_t schedule = 0;
  double time = 0.0;
  Interval support;
  Interval tube;
  bool contained = false;
  double w1inf = 0.0;
  bool norm_ok = false;
  double mass_drift = 0.0;
};

struct StabilityRatio {
  std::size_t schedule = 0;
  std::size_t pair = 0;
  double time = 0.0;
  double ratio = 0.0;
};

struct InvariantSetReport {
  double bound = 0.0;
  std::vector<InvariantCheck> checks;
  std::vector<StabilityRatio> ratios;
  double max_ratio = 0.0;

  bool all_contained() const;
  bool all_bounded() const;
  bool passes() const { return all_contained() && all_bounded(); }
};

using DensityPair = std::pair<DensityGrid, DensityGrid>;

/// Pushes m0 (and every caller-supplied pair) forward under each schedule and
/// records support containment in the tube (tolerance one cell), the
/// W^{1,inf} norm against `bound`, and the H1 stability ratio per pair.
InvariantSetReport verify_invariant_set(const DensityGrid& m0, const std::vector<ControlSchedule>& schedules,
                                        const SupportTube& tube, double bound, const std::vector<double>& check_times,
                                        const std::vector<DensityPair>& pairs = {}, double steps_per_unit = 100.0);

/// Smallest step count on [t0, t1] meeting both the diffusion limit
/// sigma dt / dx^2 <= 0.45 and the upwind positivity limit.
int fokker_planck_min_steps(const Grid1D& grid, const ControlSchedule& schedule, double sigma, double t0, double t1);

/// m_t - sigma m_xx + (beta m)_x = 0 with Strang splitting: half upwind
/// transport, explicit diffusion, half upwind transport. Zero Dirichlet data
/// at both endpoints. Throws CflViolation if the step is too large.
DensityGrid fokker_planck_solve(const DensityGrid& m0, const ControlSchedule& schedule, double sigma, double t0,
                                double t1, int n_time_steps);

}  // namespace masschase
