#include "masschase/cost.hpp"

#include <algorithm>
#include <cmath>

#include "masschase/error.hpp"
#include "masschase/flow.hpp"
#include "masschase/game_spec.hpp"

namespace masschase {

FinalCost FinalCost::window_diff_squared(double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("psi2: delta must be positive");
  return FinalCost(Kind::WindowDiffSquared, delta);
}

std::string FinalCost::name() const {
  switch (kind_) {
    case Kind::Overlap:
      return "psi1";
    case Kind::WindowDiffSquared:
      return "psi2";
    case Kind::MeanDiffSquared:
      return "psi3";
  }
  return "?";
}

RunningCost RunningCost::control_effort(double wX, double wY) {
  if (!(wX >= 0.0 && wY >= 0.0)) throw InvalidArgument("control effort weights must be >= 0");
  RunningCost rc;
  rc.kind_ = Kind::ControlEffort;
  rc.wX_ = wX;
  rc.wY_ = wY;
  return rc;
}

std::string RunningCost::name() const { return kind_ == Kind::Zero ? "zero" : "effort"; }

void CostModulus::add(double input_distance, double output_distance) {
  if (input_distance < 0.0 || output_distance < 0.0) throw InvalidArgument("cost modulus: distances must be >= 0");
  samples.emplace_back(input_distance, output_distance);
}

double CostModulus::envelope(double eps) const {
  double e = 0.0;
  for (const auto& [in, out] : samples) {
    if (in <= eps) e = std::max(e, out);
  }
  return e;
}

double CostModulus::lipschitz_estimate() const {
  double l = 0.0;
  for (const auto& [in, out] : samples) {
    if (in > 0.0) l = std::max(l, out / in);
  }
  return l;
}

namespace {

void require_same_grid(const DensityGrid& a, const DensityGrid& b, const char* who) {
  if (!(a.grid() == b.grid())) throw GridMismatch(std::string(who) + ": densities live on different grids");
}

}  // namespace

double psi1(const DensityGrid& mX, const DensityGrid& mY) {
  require_same_grid(mX, mY, "psi1");
  std::vector<double> prod(mX.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = mX[i] * mY[i];
  return std::max(0.0, integrate(mX.grid(), prod));
}

double psi2(const DensityGrid& mX, const DensityGrid& mY, double delta) {
  require_same_grid(mX, mY, "psi2");
  if (!(delta > 0.0)) throw InvalidArgument("psi2: delta must be positive");
  const double muX = mean(mX);
  const double muY = mean(mY);
  const double d = integrate_window(mY, muX - delta, muX + delta) - integrate_window(mX, muY - delta, muY + delta);
  return d * d;
}

double psi3(const DensityGrid& mX, const DensityGrid& mY) {
  const double d = mean(mX) - mean(mY);
  return d * d;
}

double final_cost(const FinalCost& fc, const DensityGrid& mX, const DensityGrid& mY) {
  switch (fc.kind()) {
    case FinalCost::Kind::Overlap:
      return psi1(mX, mY);
    case FinalCost::Kind::WindowDiffSquared:
      return psi2(mX, mY, fc.delta());
    case FinalCost::Kind::MeanDiffSquared:
      return psi3(mX, mY);
  }
  return 0.0;
}

double field_energy(const ControlField& f, const Interval& tube) {
  if (!(tube.hi > tube.lo)) return 0.0;
  if (f.is_constant()) return f.speed() * f.speed() * tube.length();
  constexpr int n = 1024;
  const Grid1D g(tube.lo, tube.hi, n);
  std::vector<double> sq(g.n_nodes());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double v = f.value(g.x(i));
    sq[i] = v * v;
  }
  return integrate(g, sq);
}

double running_cost(const RunningCost& rc, const DensityGrid& mX, const DensityGrid& mY, double t,
                    const ControlField& a, const ControlField& b, const Interval& tube) {
  (void)mX;
  (void)mY;
  (void)t;
  switch (rc.kind()) {
    case RunningCost::Kind::Zero:
      return 0.0;
    case RunningCost::Kind::ControlEffort:
      return rc.wX() * field_energy(a, tube) + rc.wY() * field_energy(b, tube);
  }
  return 0.0;
}

namespace {

int flow_steps(const GameSpec& spec, double span) {
  return std::max(1, static_cast<int>(std::ceil(spec.flow_steps_per_unit * span - 1e-9)));
}

DensityGrid advance(const GameSpec& spec, const DensityGrid& m, const ControlSchedule& sched, double from, double to,
                    const DensityGrid& m_at_t0) {
  if (to == from) return m;
  if (spec.sigma == 0.0) {
    // Straight from t0 keeps a single interpolation per sample.
    return push_forward(m_at_t0, sched, spec.t0, to, flow_steps(spec, to - spec.t0));
  }
  const int n = fokker_planck_min_steps(m.grid(), sched, spec.sigma, from, to);
  return fokker_planck_solve(m, sched, spec.sigma, from, to, n);
}

void require_span(const ControlSchedule& s, const GameSpec& spec, const char* who) {
  const double tol = 1e-12 * std::max(1.0, std::abs(spec.T));
  if (s.t0() > spec.t0 + tol || s.t1() < spec.T - tol) {
    throw InvalidArgument(std::string("evaluate_J: schedule ") + who + " does not span [t0, T]");
  }
}

}  // namespace

double evaluate_J(const GameSpec& spec, const ControlSchedule& alpha, const ControlSchedule& beta,
                  int n_time_samples) {
  require_span(alpha, spec, "alpha");
  require_span(beta, spec, "beta");
  const Interval tube = spec.mX0.grid().domain();
  if (spec.rc.is_zero()) {
    const DensityGrid mX = advance(spec, spec.mX0, alpha, spec.t0, spec.T, spec.mX0);
    const DensityGrid mY = advance(spec, spec.mY0, beta, spec.t0, spec.T, spec.mY0);
    return final_cost(spec.fc, mX, mY);
  }
  if (n_time_samples < 2) throw InvalidArgument("evaluate_J: need at least two time samples");
  const double h = (spec.T - spec.t0) / (n_time_samples - 1);
  DensityGrid mX = spec.mX0;
  DensityGrid mY = spec.mY0;
  double integral = 0.0;
  double prev_t = spec.t0;
  for (int k = 0; k < n_time_samples; ++k) {
    const double t = k + 1 == n_time_samples ? spec.T : spec.t0 + k * h;
    mX = advance(spec, mX, alpha, prev_t, t, spec.mX0);
    mY = advance(spec, mY, beta, prev_t, t, spec.mY0);
    prev_t = t;
    const double w = (k == 0 || k + 1 == n_time_samples) ? 0.5 * h : h;
    integral += w * running_cost(spec.rc, mX, mY, t, alpha.field_at(t), beta.field_at(t), tube);
  }
  return integral + final_cost(spec.fc, mX, mY);
}

}  // namespace masschase
