#include "masschase/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include "masschase/error.hpp"
#include "masschase/flow.hpp"
#include "masschase/io.hpp"
#include "masschase/parallel.hpp"

namespace masschase {

void GameSpec::validate() const {
  if (n_steps < 1) throw InvalidArgument("game: n_steps must be >= 1");
  if (!(T > t0)) throw InvalidArgument("game: need T > t0");
  if (!(sigma >= 0.0)) throw InvalidArgument("game: sigma must be >= 0");
  if (!(mX0.grid() == mY0.grid())) throw GridMismatch("game: mX0 and mY0 must share a grid");
  if (reduced && !(dictA.all_constant() && dictB.all_constant())) {
    throw NotReduced("game: the reduced solver needs constant-only dictionaries");
  }
}

ValueTable::ValueTable(OffsetAxis x, OffsetAxis y, std::vector<double> times)
    : ax_(x), ay_(y), times_(std::move(times)) {
  if (!(ax_.spacing > 0.0) || !(ay_.spacing > 0.0)) throw InvalidArgument("value table: spacing must be positive");
  if (ax_.half_cells < 0 || ay_.half_cells < 0) throw InvalidArgument("value table: negative box");
  if (times_.empty()) throw InvalidArgument("value table: need at least one time level");
  const std::size_t n = times_.size() * static_cast<std::size_t>(ax_.size()) * static_cast<std::size_t>(ay_.size());
  lower_.assign(n, std::numeric_limits<double>::quiet_NaN());
  upper_.assign(n, std::numeric_limits<double>::quiet_NaN());
  status_.assign(n, CellStatus::Valid);
}

void ValueTable::set(int k, int i, int j, double lower, double upper, CellStatus s) {
  const std::size_t idx = index(k, i, j);
  lower_[idx] = lower;
  upper_[idx] = upper;
  status_[idx] = s;
}

ValueTable::Sample ValueTable::interpolate(const std::vector<double>& layer, int k, double hX, double hY) const {
  auto locate = [](const OffsetAxis& a, double h, int& i0, double& w) {
    double pos = h / a.spacing + a.half_cells;
    const double r = std::round(pos);
    if (std::abs(pos - r) < 1e-9) pos = r;
    if (pos < 0.0 || pos > a.size() - 1) return false;
    i0 = std::min(static_cast<int>(std::floor(pos)), a.size() - 1);
    w = pos - i0;
    return true;
  };
  int i0 = 0;
  int j0 = 0;
  double wx = 0.0;
  double wy = 0.0;
  if (!locate(ax_, hX, i0, wx) || !locate(ay_, hY, j0, wy)) return {0.0, CellStatus::OutsideBox};
  double value = 0.0;
  for (int di = 0; di <= 1; ++di) {
    const double fx = di == 0 ? 1.0 - wx : wx;
    if (fx == 0.0) continue;
    for (int dj = 0; dj <= 1; ++dj) {
      const double fy = dj == 0 ? 1.0 - wy : wy;
      if (fy == 0.0) continue;
      const std::size_t idx = index(k, i0 + di, j0 + dj);
      if (status_[idx] != CellStatus::Valid) return {0.0, status_[idx]};
      value += fx * fy * layer[idx];
    }
  }
  return {value, CellStatus::Valid};
}

ValueTable::Sample ValueTable::interpolate_lower(int k, double hX, double hY) const {
  return interpolate(lower_, k, hX, hY);
}

ValueTable::Sample ValueTable::interpolate_upper(int k, double hX, double hY) const {
  return interpolate(upper_, k, hX, hY);
}

namespace {

/// Dictionary speeds, running cost per (a, b) and terminal densities.
struct ReducedModel {
  std::vector<double> speedA;
  std::vector<double> speedB;
  std::vector<double> ell;  // [a * nb + b]
  double dt = 0.0;
  DensityGrid mXT;
  DensityGrid mYT;

  std::size_t na() const { return speedA.size(); }
  std::size_t nb() const { return speedB.size(); }
  double running(std::size_t a, std::size_t b) const { return ell[a * nb() + b]; }
};

ReducedModel make_model(const GameSpec& spec) {
  spec.validate();
  if (!spec.reduced) throw NotReduced("reduced solver requested for a non-reduced game");
  ReducedModel m;
  m.dt = spec.dt();
  for (const auto& f : spec.dictA.fields()) m.speedA.push_back(f.speed());
  for (const auto& f : spec.dictB.fields()) m.speedB.push_back(f.speed());
  const Interval tube = spec.mX0.grid().domain();
  m.ell.resize(m.na() * m.nb());
  for (std::size_t a = 0; a < m.na(); ++a) {
    for (std::size_t b = 0; b < m.nb(); ++b) {
      m.ell[a * m.nb() + b] = running_cost(spec.rc, spec.mX0, spec.mY0, spec.t0, spec.dictA[a], spec.dictB[b], tube);
    }
  }
  // Diffusion commutes with translation and ignores the controls, so the
  // terminal densities can be diffused once up front.
  if (spec.sigma > 0.0) {
    const auto still = ControlSchedule::constant(ControlField::constant(0.0), spec.t0, spec.T);
    const Grid1D& g = spec.mX0.grid();
    const int n = fokker_planck_min_steps(g, still, spec.sigma, spec.t0, spec.T);
    m.mXT = fokker_planck_solve(spec.mX0, still, spec.sigma, spec.t0, spec.T, n);
    m.mYT = fokker_planck_solve(spec.mY0, still, spec.sigma, spec.t0, spec.T, n);
  } else {
    m.mXT = spec.mX0;
    m.mYT = spec.mY0;
  }
  return m;
}

bool translation_fits(const DensityGrid& m, double h) {
  const Interval s = support_of(m);
  if (s.length() == 0.0) return true;
  return m.grid().domain().contains({s.lo + h, s.hi + h});
}

struct Choice {
  double value;
  std::size_t a;
  std::size_t b;
};

// max_b min_a of F; ties resolved toward the lowest index.
Choice max_min(const std::vector<double>& F, std::size_t na, std::size_t nb) {
  Choice best{-std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t arg = 0;
    double inner = F[b];
    for (std::size_t a = 1; a < na; ++a) {
      if (F[a * nb + b] < inner) {
        inner = F[a * nb + b];
        arg = a;
      }
    }
    if (inner > best.value) best = {inner, arg, b};
  }
  return best;
}

// min_a max_b of F.
Choice min_max(const std::vector<double>& F, std::size_t na, std::size_t nb) {
  Choice best{std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t a = 0; a < na; ++a) {
    std::size_t arg = 0;
    double inner = F[a * nb];
    for (std::size_t b = 1; b < nb; ++b) {
      if (F[a * nb + b] > inner) {
        inner = F[a * nb + b];
        arg = b;
      }
    }
    if (inner < best.value) best = {inner, a, arg};
  }
  return best;
}

// One-step objective F[a * nb + b] at an arbitrary offset, or the status of
// the first successor that has no value.
CellStatus step_matrix(const ValueTable& table, const ReducedModel& m, int k, double hX, double hY, bool lower,
                       std::vector<double>& F) {
  F.resize(m.na() * m.nb());
  for (std::size_t a = 0; a < m.na(); ++a) {
    for (std::size_t b = 0; b < m.nb(); ++b) {
      const double nx = hX + m.speedA[a] * m.dt;
      const double ny = hY + m.speedB[b] * m.dt;
      const auto s = lower ? table.interpolate_lower(k + 1, nx, ny) : table.interpolate_upper(k + 1, nx, ny);
      if (s.status != CellStatus::Valid) return s.status;
      F[a * m.nb() + b] = m.dt * m.running(a, b) + s.value;
    }
  }
  return CellStatus::Valid;
}

}  // namespace

std::pair<double, double> advance_reduced(double hX, double hY, std::size_t a_index, std::size_t b_index,
                                          const GameSpec& spec, double dt) {
  if (!spec.reduced || !(spec.dictA.all_constant() && spec.dictB.all_constant())) {
    throw NotReduced("advance_reduced: game is not in the rigid-translation regime");
  }
  if (!(dt > 0.0)) throw InvalidArgument("advance_reduced: dt must be positive");
  return {hX + spec.dictA.at(a_index).speed() * dt, hY + spec.dictB.at(b_index).speed() * dt};
}

ValueTable value_table_layout(const GameSpec& spec) {
  spec.validate();
  if (!spec.reduced) throw NotReduced("value table layout needs a reduced game");
  const double dt = spec.dt();
  const double cA = spec.dictA.max_speed();
  const double cB = spec.dictB.max_speed();
  const double cmax = std::max(cA, cB);
  double dh = spec.offset_spacing;
  if (!(dh > 0.0)) dh = cmax > 0.0 ? cmax * dt : 1.0;
  // Interpolating between cells reaches one cell further out after every off-grid step.
  auto cells = [&](int requested, double c) {
    if (requested >= 0) return requested;
    double reach = 0.0;
    for (int k = 0; k < spec.n_steps; ++k) reach = std::ceil(reach + c * dt / dh - 1e-9);
    return static_cast<int>(reach);
  };
  std::vector<double> times(static_cast<std::size_t>(spec.n_steps) + 1);
  for (int k = 0; k <= spec.n_steps; ++k) times[k] = k == spec.n_steps ? spec.T : spec.t0 + k * dt;
  return ValueTable({dh, cells(spec.box_cells_x, cA)}, {dh, cells(spec.box_cells_y, cB)}, std::move(times));
}

ValueTable solve_values(const GameSpec& spec) {
  const ReducedModel m = make_model(spec);
  ValueTable table = value_table_layout(spec);
  const OffsetAxis ax = table.axis_x();
  const OffsetAxis ay = table.axis_y();
  const int nx = ax.size();
  const int ny = ay.size();
  const int K = spec.n_steps;

  std::vector<DensityGrid> shiftedX(nx), shiftedY(ny);
  std::vector<char> fitX(nx), fitY(ny);
  parallel_for(static_cast<std::size_t>(nx + ny), [&](std::size_t q) {
    const int i = static_cast<int>(q);
    if (i < nx) {
      fitX[i] = translation_fits(m.mXT, ax.value(i));
      if (fitX[i]) shiftedX[i] = translate(m.mXT, ax.value(i));
    } else {
      const int j = i - nx;
      fitY[j] = translation_fits(m.mYT, ay.value(j));
      if (fitY[j]) shiftedY[j] = translate(m.mYT, ay.value(j));
    }
  });
  parallel_for(static_cast<std::size_t>(nx) * ny, [&](std::size_t q) {
    const int i = static_cast<int>(q / ny);
    const int j = static_cast<int>(q % ny);
    if (!fitX[i] || !fitY[j]) {
      table.set_status(K, i, j, CellStatus::OutsideDomain);
      return;
    }
    const double v = final_cost(spec.fc, shiftedX[i], shiftedY[j]);
    table.set(K, i, j, v, v);
  });

  for (int k = K - 1; k >= 0; --k) {
    parallel_for(static_cast<std::size_t>(nx) * ny, [&](std::size_t q) {
      const int i = static_cast<int>(q / ny);
      const int j = static_cast<int>(q % ny);
      std::vector<double> FL;
      std::vector<double> FU;
      const CellStatus sl = step_matrix(table, m, k, ax.value(i), ay.value(j), true, FL);
      if (sl != CellStatus::Valid) {
        table.set_status(k, i, j, sl);
        return;
      }
      const CellStatus su = step_matrix(table, m, k, ax.value(i), ay.value(j), false, FU);
      if (su != CellStatus::Valid) {
        table.set_status(k, i, j, su);
        return;
      }
      table.set(k, i, j, max_min(FL, m.na(), m.nb()).value, min_max(FU, m.na(), m.nb()).value);
    });
  }

  switch (table.status(0, table.origin_x(), table.origin_y())) {
    case CellStatus::Valid:
      break;
    case CellStatus::OutsideBox:
      throw BoxOverflow("solve_values: reachable offsets leave the offset box");
    case CellStatus::OutsideDomain:
      throw TubeOverflow("solve_values: translated densities leave the spatial domain");
  }
  return table;
}

FeedbackStrategy extract_feedback(const ValueTable& table, const GameSpec& spec) {
  const ReducedModel m = make_model(spec);
  FeedbackStrategy s;
  s.x = table.axis_x();
  s.y = table.axis_y();
  s.n_levels = table.n_levels() - 1;
  const std::size_t n = static_cast<std::size_t>(s.n_levels) * s.x.size() * s.y.size();
  s.a_index.assign(n, -1);
  s.b_index.assign(n, -1);
  std::vector<double> F;
  for (int k = 0; k < s.n_levels; ++k) {
    for (int i = 0; i < s.x.size(); ++i) {
      for (int j = 0; j < s.y.size(); ++j) {
        if (!table.valid(k, i, j)) continue;
        if (step_matrix(table, m, k, s.x.value(i), s.y.value(j), true, F) != CellStatus::Valid) continue;
        const Choice c = max_min(F, m.na(), m.nb());
        s.a_index[s.flat(k, i, j)] = static_cast<int>(c.a);
        s.b_index[s.flat(k, i, j)] = static_cast<int>(c.b);
      }
    }
  }
  return s;
}

namespace {

double tree_value(const ReducedModel& m, const GameSpec& spec, int depth, double hX, double hY, bool lower) {
  if (depth == spec.n_steps) {
    if (!translation_fits(m.mXT, hX) || !translation_fits(m.mYT, hY)) {
      throw TubeOverflow("brute_force_value: translated densities leave the spatial domain");
    }
    return final_cost(spec.fc, translate(m.mXT, hX), translate(m.mYT, hY));
  }
  std::vector<double> F(m.na() * m.nb());
  for (std::size_t a = 0; a < m.na(); ++a) {
    for (std::size_t b = 0; b < m.nb(); ++b) {
      F[a * m.nb() + b] = m.dt * m.running(a, b) +
                          tree_value(m, spec, depth + 1, hX + m.speedA[a] * m.dt, hY + m.speedB[b] * m.dt, lower);
    }
  }
  return lower ? max_min(F, m.na(), m.nb()).value : min_max(F, m.na(), m.nb()).value;
}

}  // namespace

std::pair<double, double> brute_force_value(const GameSpec& spec, int max_steps) {
  if (max_steps > 4) throw TooDeep("brute_force_value: max_steps is capped at 4");
  if (spec.n_steps > max_steps) {
    throw TooDeep("brute_force_value: n_steps = " + std::to_string(spec.n_steps) + " exceeds " +
                  std::to_string(max_steps));
  }
  const ReducedModel m = make_model(spec);
  return {tree_value(m, spec, 0, 0.0, 0.0, true), tree_value(m, spec, 0, 0.0, 0.0, false)};
}

double dpp_residual(const ValueTable& table, const GameSpec& spec, int k) {
  if (k < 0 || k + 1 >= table.n_levels()) throw InvalidArgument("dpp_residual: level out of range");
  const ReducedModel m = make_model(spec);
  double worst = 0.0;
  std::vector<double> F;
  for (int i = 0; i < table.axis_x().size(); ++i) {
    for (int j = 0; j < table.axis_y().size(); ++j) {
      if (!table.valid(k, i, j)) continue;
      if (step_matrix(table, m, k, table.axis_x().value(i), table.axis_y().value(j), true, F) != CellStatus::Valid) {
        continue;
      }
      worst = std::max(worst, std::abs(table.lower(k, i, j) - max_min(F, m.na(), m.nb()).value));
    }
  }
  return worst;
}

PlayResult simulate_play(const GameSpec& spec, const ValueTable& table) {
  const ReducedModel m = make_model(spec);
  PlayResult r;
  double hX = 0.0;
  double hY = 0.0;
  r.offsets.emplace_back(hX, hY);
  std::vector<double> F;
  for (int k = 0; k < spec.n_steps; ++k) {
    if (step_matrix(table, m, k, hX, hY, true, F) != CellStatus::Valid) {
      throw BoxOverflow("simulate_play: play left the solved region of the table");
    }
    const Choice c = max_min(F, m.na(), m.nb());
    std::tie(hX, hY) = advance_reduced(hX, hY, c.a, c.b, spec, m.dt);
    r.offsets.emplace_back(hX, hY);
    r.a_indices.push_back(c.a);
    r.b_indices.push_back(c.b);
  }
  const auto& times = table.times();
  const ControlSchedule alpha = schedule_from_sequence(times, r.a_indices, spec.dictA);
  const ControlSchedule beta = schedule_from_sequence(times, r.b_indices, spec.dictB);
  r.realized_J = evaluate_J(spec, alpha, beta);
  return r;
}

void write_value_table_csv(std::ostream& os, const ValueTable& table) {
  os << "level,time,hX,hY,lower,upper\n";
  for (int k = 0; k < table.n_levels(); ++k) {
    for (int i = 0; i < table.axis_x().size(); ++i) {
      for (int j = 0; j < table.axis_y().size(); ++j) {
        if (!table.valid(k, i, j)) continue;
        os << k << ',' << format_full(table.times()[k]) << ',' << format_full(table.axis_x().value(i)) << ','
           << format_full(table.axis_y().value(j)) << ',' << format_full(table.lower(k, i, j)) << ','
           << format_full(table.upper(k, i, j)) << '\n';
      }
    }
  }
}

void write_strategy_csv(std::ostream& os, const FeedbackStrategy& s) {
  os << "level,hX,hY,a_index,b_index\n";
  for (int k = 0; k < s.n_levels; ++k) {
    for (int i = 0; i < s.x.size(); ++i) {
      for (int j = 0; j < s.y.size(); ++j) {
        const std::size_t f = s.flat(k, i, j);
        if (s.a_index[f] < 0) continue;
        os << k << ',' << format_full(s.x.value(i)) << ',' << format_full(s.y.value(j)) << ',' << s.a_index[f] << ','
           << s.b_index[f] << '\n';
      }
    }
  }
}

}  // namespace masschase
