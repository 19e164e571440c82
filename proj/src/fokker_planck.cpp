#include <algorithm>
#include <cmath>
#include <string>

#include "masschase/error.hpp"
#include "masschase/flow.hpp"

namespace masschase {

namespace {

constexpr double kDiffusionLimit = 0.45;

// max over cells of the outflow speed sum beta+_{i+1/2} + beta-_{i-1/2}.
double outflow_speed(const Grid1D& g, const ControlField& f) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < g.n_nodes(); ++i) {
    const double right = f.value(g.x(i) + 0.5 * g.dx());
    const double left = f.value(g.x(i) - 0.5 * g.dx());
    s = std::max(s, std::max(right, 0.0) + std::max(-left, 0.0));
  }
  return s;
}

double max_outflow_speed(const Grid1D& g, const ControlSchedule& schedule) {
  double s = 0.0;
  for (const auto& f : schedule.fields()) s = std::max(s, outflow_speed(g, f));
  return s;
}

// First-order conservative upwind on the node-centered cells; the two
// endpoint nodes are held at zero and anything crossing them is lost.
void upwind_step(const Grid1D& g, const ControlField& f, double dt, std::vector<double>& m,
                 std::vector<double>& scratch) {
  const std::size_t n = m.size();
  const double lambda = dt / g.dx();
  if (lambda * outflow_speed(g, f) > 1.0 + 1e-12) {
    throw CflViolation("fokker_planck_solve: transport step violates the upwind positivity limit");
  }
  // flux[i] sits on the face between nodes i and i+1.
  scratch.assign(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double b = f.value(g.x(i) + 0.5 * g.dx());
    scratch[i] = b >= 0.0 ? b * m[i] : b * m[i + 1];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) m[i] -= lambda * (scratch[i] - scratch[i - 1]);
  m.front() = 0.0;
  m.back() = 0.0;
  // The update is a nonnegative combination under the limit; clear rounding residue.
  for (double& v : m) v = std::max(v, 0.0);
}

void diffusion_step(double r, std::vector<double>& m, std::vector<double>& scratch) {
  scratch = m;
  for (std::size_t i = 1; i + 1 < m.size(); ++i) m[i] = scratch[i] + r * (scratch[i + 1] - 2.0 * scratch[i] + scratch[i - 1]);
  m.front() = 0.0;
  m.back() = 0.0;
}

}  // namespace

int fokker_planck_min_steps(const Grid1D& grid, const ControlSchedule& schedule, double sigma, double t0, double t1) {
  const double span = t1 - t0;
  if (!(span > 0.0)) return 1;
  double dt_max = span;
  if (sigma > 0.0) dt_max = std::min(dt_max, kDiffusionLimit * grid.dx() * grid.dx() / sigma);
  const double s = max_outflow_speed(grid, schedule);
  // Each transport stage covers dt / 2.
  if (s > 0.0) dt_max = std::min(dt_max, 2.0 * grid.dx() / s);
  return std::max(1, static_cast<int>(std::ceil(span / dt_max * (1.0 + 1e-12))));
}

DensityGrid fokker_planck_solve(const DensityGrid& m0, const ControlSchedule& schedule, double sigma, double t0,
                                double t1, int n_time_steps) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("fokker_planck_solve: sigma must be >= 0");
  if (n_time_steps < 1) throw InvalidArgument("fokker_planck_solve: need at least one time step");
  if (!(t1 >= t0)) throw InvalidArgument("fokker_planck_solve: need t0 <= t1");
  if (t1 == t0) return m0;
  const Grid1D& g = m0.grid();
  const double dt = (t1 - t0) / n_time_steps;
  const double r = sigma * dt / (g.dx() * g.dx());
  if (r > kDiffusionLimit * (1.0 + 1e-12)) {
    throw CflViolation("fokker_planck_solve: sigma*dt/dx^2 = " + std::to_string(r) + " exceeds 0.45");
  }
  std::vector<double> m(m0.values().begin(), m0.values().end());
  std::vector<double> scratch;
  for (int k = 0; k < n_time_steps; ++k) {
    const double t = t0 + k * dt;
    upwind_step(g, schedule.field_at(t + 0.25 * dt), 0.5 * dt, m, scratch);
    if (sigma > 0.0) diffusion_step(r, m, scratch);
    upwind_step(g, schedule.field_at(t + 0.75 * dt), 0.5 * dt, m, scratch);
  }
  return DensityGrid(g, std::move(m));
}

}  // namespace masschase
