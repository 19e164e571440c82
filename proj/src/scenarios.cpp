#include "masschase/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "masschase/error.hpp"
#include "masschase/flow.hpp"
#include "masschase/game.hpp"
#include "masschase/hamiltonian.hpp"

namespace masschase {

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::Within:
      return "within";
    case Relation::WithinRelative:
      return "within_relative";
    case Relation::AtMost:
      return "at_most";
    case Relation::AtLeast:
      return "at_least";
    case Relation::Below:
      return "below";
  }
  return "?";
}

bool is_known_source(const std::string& source) {
  for (const char* s : {kClosedForm, kQuadratureOracle, kExactIdentity, kSimulation, kDiscretizationBound}) {
    if (source == s) return true;
  }
  return false;
}

bool evaluate_relation(Relation r, double computed, double reference, double tolerance) {
  if (!std::isfinite(computed)) return false;
  switch (r) {
    case Relation::Within:
      return std::abs(computed - reference) <= tolerance;
    case Relation::WithinRelative:
      return std::abs(computed - reference) <= tolerance * std::abs(reference);
    case Relation::AtMost:
      return computed <= reference + tolerance;
    case Relation::AtLeast:
      return computed >= reference - tolerance;
    case Relation::Below:
      return computed < reference - tolerance;
  }
  return false;
}

void ScenarioReport::add_check(std::string check_name, double computed, double reference, double tolerance,
                               Relation relation, std::string source, const ScenarioOptions& options) {
  Check c;
  c.name = std::move(check_name);
  c.computed = computed;
  c.reference = reference;
  c.tolerance = options.tolerance_override.value_or(tolerance);
  c.relation = relation;
  c.source = std::move(source);
  c.passed = evaluate_relation(c.relation, c.computed, c.reference, c.tolerance);
  checks.push_back(std::move(c));
}

bool ScenarioReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::size_t ScenarioReport::n_passed() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.passed; }));
}

void validate_report(const ScenarioReport& report) {
  for (const auto& c : report.checks) {
    if (c.source.empty()) throw InvalidArgument("report " + report.name + ": check " + c.name + " has no source");
    if (!is_known_source(c.source)) {
      throw InvalidArgument("report " + report.name + ": check " + c.name + " has unknown source `" + c.source + "`");
    }
  }
}

namespace {

// JSON cannot carry NaN or infinity; they become null.
nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json to_json(const ScenarioReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"computed", number(c.computed)},
                      {"reference", number(c.reference)},
                      {"tolerance", number(c.tolerance)},
                      {"relation", relation_name(c.relation)},
                      {"source", c.source},
                      {"passed", c.passed}});
  }
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [k, v] : report.values) values[k] = number(v);
  return {{"name", report.name},
          {"passed", report.passed()},
          {"checks", checks},
          {"values", values},
          {"meta", {{"runtime_seconds", report.runtime_seconds}}}};
}

std::string to_text(const ScenarioReport& report) {
  std::size_t w = 5;
  for (const auto& c : report.checks) w = std::max(w, c.name.size());
  std::ostringstream os;
  char buf[512];
  os << "scenario " << report.name << " (" << report.n_passed() << "/" << report.checks.size() << " passed, "
     << report.runtime_seconds << " s)\n";
  std::snprintf(buf, sizeof buf, "  %-*s %14s %14s %10s %-15s %-20s %s\n", static_cast<int>(w), "check", "computed",
                "reference", "tolerance", "relation", "source", "result");
  os << buf;
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof buf, "  %-*s %14.6g %14.6g %10.3g %-15s %-20s %s\n", static_cast<int>(w), c.name.c_str(),
                  c.computed, c.reference, c.tolerance, relation_name(c.relation).c_str(), c.source.c_str(),
                  c.passed ? "PASS" : "FAIL");
    os << buf;
  }
  for (const auto& [k, v] : report.values) {
    std::snprintf(buf, sizeof buf, "  %-*s %14.6g\n", static_cast<int>(w), k.c_str(), v);
    os << buf;
  }
  return os.str();
}

UniformStream::UniformStream(std::uint64_t seed) : state_(seed) {}

// splitmix64
double UniformStream::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_dpp_residual(const ValueTable& table, const GameSpec& spec) {
  double worst = 0.0;
  for (int k = 0; k + 1 < table.n_levels(); ++k) worst = std::max(worst, dpp_residual(table, spec, k));
  return worst;
}

// max over valued cells of lower - upper.
double max_order_violation(const ValueTable& table) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < table.n_levels(); ++k) {
    for (int i = 0; i < table.axis_x().size(); ++i) {
      for (int j = 0; j < table.axis_y().size(); ++j) {
        if (table.valid(k, i, j)) worst = std::max(worst, table.lower(k, i, j) - table.upper(k, i, j));
      }
    }
  }
  return worst;
}

DensityGrid random_bump(const Grid1D& g, UniformStream& rng, double margin, double r_lo, double r_hi,
                        double mass = 1.0) {
  const double r = rng.next(r_lo, r_hi);
  const double center = rng.next(g.lo() + margin + r, g.hi() - margin - r);
  return quartic_bump(g, center, r, mass);
}

ControlSchedule hold(const ControlField& f, double t0, double t1) { return ControlSchedule::constant(f, t0, t1); }

}  // namespace

ScenarioReport run_example_psi3(const Psi3Params& p, const ScenarioOptions& options) {
  if (!(p.c > 0.0)) throw InvalidArgument("psi3 example: c must be positive");
  const auto start = Clock::now();
  ScenarioReport report;
  report.name = "example_psi3";

  const double reach = p.c * p.T;
  const double lo = std::min(p.muX, p.muY) - p.radius - reach - 0.5;
  const double hi = std::max(p.muX, p.muY) + p.radius + reach + 0.5;
  const Grid1D g(lo, hi, p.n_cells);

  auto spec = std::make_shared<GameSpec>();
  spec->T = p.T;
  spec->n_steps = p.n_steps;
  spec->mX0 = quartic_bump(g, p.muX, p.radius);
  spec->mY0 = quartic_bump(g, p.muY, p.radius);
  spec->dictA = standard_dictionary(p.c);
  spec->dictB = standard_dictionary(p.c);
  spec->fc = FinalCost::mean_diff_squared();
  spec->rc = RunningCost::zero();

  const double ref = (p.muX - p.muY) * (p.muX - p.muY);
  const double dt = spec->dt();
  auto table = std::make_shared<ValueTable>(solve_values(*spec));
  const double lower = table->lower_origin();
  const double upper = table->upper_origin();
  report.add_value("lower", lower);
  report.add_value("upper", upper);
  report.add_value("gap", upper - lower);

  if (ref > 1e-12) {
    report.add_check("lower_value", lower, ref, 0.05, Relation::WithinRelative, kClosedForm, options);
    report.add_check("upper_value", upper, ref, 0.05, Relation::WithinRelative, kClosedForm, options);
  } else {
    report.add_check("lower_value", lower, 0.0, 1e-6, Relation::Within, kClosedForm, options);
    // The maximizer answers every move of the minimizer, so it opens a gap of
    // at most 2 c dt in the last step.
    report.add_check("upper_value", upper, 4.0 * p.c * p.c * dt * dt, 1e-9, Relation::AtMost, kDiscretizationBound,
                     options);
  }
  report.add_check("lower_le_upper_origin", lower, upper, 0.0, Relation::AtMost, kExactIdentity, options);
  report.add_check("lower_le_upper_all_cells", max_order_violation(*table), 0.0, 1e-9, Relation::AtMost,
                   kExactIdentity, options);
  report.add_check("dpp_residual", max_dpp_residual(*table, *spec), 0.0, 1e-12, Relation::AtMost, kExactIdentity,
                   options);

  // Closed-form value written into every cell.
  {
    ValueTable analytic = value_table_layout(*spec);
    const double d0 = mean(spec->mX0) - mean(spec->mY0);
    for (int k = 0; k < analytic.n_levels(); ++k) {
      for (int i = 0; i < analytic.axis_x().size(); ++i) {
        for (int j = 0; j < analytic.axis_y().size(); ++j) {
          const double d = d0 + analytic.axis_x().value(i) - analytic.axis_y().value(j);
          analytic.set(k, i, j, d * d, d * d);
        }
      }
    }
    const double scale = std::max(ref, 1e-12);
    report.add_check("analytic_table_dpp_residual", max_dpp_residual(analytic, *spec), 0.0, 0.05 * scale,
                     Relation::AtMost, kClosedForm, options);
  }

  UniformStream rng(options.seed);
  double worst = 0.0;
  for (int s = 0; s < p.n_random_states; ++s) {
    const DensityGrid mX = random_bump(g, rng, 0.05, 0.15, 0.4);
    const DensityGrid mY = random_bump(g, rng, 0.05, 0.15, 0.4);
    const double t = rng.next(0.0, p.T);
    const double r = isaacs_residual(CandidateValue::psi3_analytic(), mX, mY, t, spec->dictA, spec->dictB, spec->rc,
                                     0.0);
    worst = std::max(worst, std::abs(r));
  }
  report.add_check("isaacs_residual_psi3", worst, 0.0, 1e-5, Relation::AtMost, kClosedForm, options);

  try {
    const double t_mid = table->times()[static_cast<std::size_t>(table->n_levels() / 2)];
    const CandidateValue tab = CandidateValue::tabulated(table, spec);
    report.add_value("tabulated_residual_mid",
                     isaacs_residual(tab, spec->mX0, spec->mY0, t_mid, spec->dictA, spec->dictB, spec->rc, 0.0));
  } catch (const InvalidArgument&) {
    report.add_value("tabulated_residual_mid", std::numeric_limits<double>::quiet_NaN());
  }

  const PlayResult play = simulate_play(*spec, *table);
  report.add_value("realized_J", play.realized_J);
  if (ref > 1e-12) {
    report.add_check("realized_J", play.realized_J, ref, 0.05, Relation::WithinRelative, kClosedForm, options);
    int not_rigid = 0;
    for (std::size_t k = 0; k < play.a_indices.size(); ++k) {
      const double a = spec->dictA[play.a_indices[k]].speed();
      const double b = spec->dictB[play.b_indices[k]].speed();
      if (!(a == b && std::abs(a) == p.c)) ++not_rigid;
    }
    report.add_check("rigid_equilibrium_steps", not_rigid, 0.0, 0.0, Relation::Within, kClosedForm, options);
  } else {
    report.add_check("realized_J", play.realized_J, 0.0, 1e-6, Relation::Within, kClosedForm, options);
  }
  report.add_check("realized_J_vs_lower", play.realized_J, lower, 0.05 * std::max(std::abs(lower), 1e-6),
                   Relation::AtLeast, kDiscretizationBound, options);

  report.runtime_seconds = seconds_since(start);
  return report;
}

Psi1Params default_psi1_params() {
  Psi1Params p;
  const Grid1D g(-2.5, 2.5, 512);
  p.mX0 = quartic_bump(g, -0.15, 0.5);
  p.mY0 = quartic_bump(g, 0.15, 0.5);
  return p;
}

ScenarioReport run_example_psi1(const Psi1Params& p, const ScenarioOptions& options) {
  if (!(p.c > 0.0)) throw InvalidArgument("psi1 example: c must be positive");
  const auto start = Clock::now();
  ScenarioReport report;
  report.name = "example_psi1";

  GameSpec spec;
  spec.T = p.T;
  spec.n_steps = p.n_steps;
  spec.mX0 = p.mX0;
  spec.mY0 = p.mY0;
  spec.dictA = standard_dictionary(p.c);
  spec.dictB = standard_dictionary(p.c);
  spec.fc = FinalCost::overlap();
  spec.rc = RunningCost::zero();

  const double ref = psi1(p.mX0, p.mY0);
  const ValueTable table = solve_values(spec);
  const double lower = table.lower_origin();
  const double upper = table.upper_origin();
  report.add_value("reference_psi1", ref);
  report.add_value("lower", lower);
  report.add_value("upper", upper);
  report.add_value("gap", upper - lower);
  if (ref > 1e-12) {
    report.add_check("lower_value", lower, ref, 0.05, Relation::WithinRelative, kQuadratureOracle, options);
    report.add_check("upper_value", upper, ref, 0.05, Relation::WithinRelative, kQuadratureOracle, options);
  } else {
    report.add_check("lower_value", lower, 0.0, 1e-3, Relation::AtMost, kQuadratureOracle, options);
    report.add_check("upper_value", upper, 0.0, 1e-3, Relation::AtMost, kQuadratureOracle, options);
  }
  report.add_check("lower_le_upper_origin", lower, upper, 0.0, Relation::AtMost, kExactIdentity, options);
  report.add_check("dpp_residual", max_dpp_residual(table, spec), 0.0, 1e-12, Relation::AtMost, kExactIdentity,
                   options);

  UniformStream rng(options.seed + 1);
  const double reach = p.c * p.T;
  double worst = 0.0;
  for (int s = 0; s < p.n_random_states; ++s) {
    const double hX = rng.next(-reach, reach);
    const double hY = rng.next(-reach, reach);
    const double t = rng.next(0.0, p.T);
    const DensityGrid mX = translate(p.mX0, hX);
    const DensityGrid mY = translate(p.mY0, hY);
    const double r = isaacs_residual(CandidateValue::psi1_analytic(), mX, mY, t, spec.dictA, spec.dictB, spec.rc, 0.0);
    worst = std::max(worst, std::abs(r));
  }
  report.add_check("isaacs_residual_psi1", worst, 0.0, 1e-5, Relation::AtMost, kClosedForm, options);

  report.runtime_seconds = seconds_since(start);
  return report;
}

ScenarioReport run_antelope_lion(const AntelopeLionParams& p, const ScenarioOptions& options) {
  if (!(p.c > 0.0)) throw InvalidArgument("antelope/lion: c must be positive");
  if (!(p.lion_center - p.lion_radius > p.antelope_center - p.antelope_radius &&
        p.lion_center + p.lion_radius < p.antelope_center + p.antelope_radius)) {
    throw InvalidArgument("antelope/lion: lion support must lie strictly inside the antelope support");
  }
  const auto start = Clock::now();
  ScenarioReport report;
  report.name = "antelope_lion";

  const double reach = p.c * p.T;
  const Grid1D g(p.antelope_center - p.antelope_radius - reach - 0.5,
                 p.antelope_center + p.antelope_radius + reach + 0.5, p.n_cells);
  GameSpec spec;
  spec.T = p.T;
  spec.n_steps = p.n_steps;
  spec.mX0 = quartic_bump(g, p.antelope_center, p.antelope_radius);
  spec.mY0 = quartic_bump(g, p.lion_center, p.lion_radius);
  spec.fc = FinalCost::overlap();
  spec.rc = RunningCost::zero();
  spec.reduced = false;
  const ControlDictionary constants = standard_dictionary(p.c);

  // (i) constant antelope controls against constant lion responses.
  double guaranteed_constant = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < constants.size(); ++a) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < constants.size(); ++b) {
      worst = std::max(worst, evaluate_J(spec, hold(constants[a], 0.0, p.T), hold(constants[b], 0.0, p.T)));
    }
    guaranteed_constant = std::min(guaranteed_constant, worst);
  }

  // (ii) scatter antelopes, xi1 and xi2 following the current support.
  const double dt = spec.dt();
  const int flow_steps = std::max(1, static_cast<int>(std::ceil(spec.flow_steps_per_unit * dt)));
  std::vector<double> times{0.0};
  std::vector<ControlField> fields;
  std::vector<double> overlap_still{psi1(spec.mX0, spec.mY0)};
  DensityGrid mA = spec.mX0;
  for (int k = 0; k < p.n_steps; ++k) {
    const double t0 = k * dt;
    const double t1 = k + 1 == p.n_steps ? p.T : (k + 1) * dt;
    const Interval s = support_of(mA);
    fields.push_back(ControlField::scatter(s.lo, s.hi, p.c));
    mA = push_forward(mA, hold(fields.back(), t0, t1), t0, t1, flow_steps);
    times.push_back(t1);
    overlap_still.push_back(psi1(mA, spec.mY0));
  }
  const ControlSchedule scatter_schedule(times, fields);
  double guaranteed_scatter = -std::numeric_limits<double>::infinity();
  std::size_t best_lion = 0;
  for (std::size_t b = 0; b < constants.size(); ++b) {
    const double J = evaluate_J(spec, scatter_schedule, hold(constants[b], 0.0, p.T));
    if (J > guaranteed_scatter) {
      guaranteed_scatter = J;
      best_lion = b;
    }
  }

  const double initial_overlap = psi1(spec.mX0, spec.mY0);
  double a_prime = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.mY0.size(); ++i) {
    if (spec.mY0[i] > 0.0) a_prime = std::min(a_prime, spec.mX0[i]);
  }
  double max_increment = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < overlap_still.size(); ++k) {
    max_increment = std::max(max_increment, overlap_still[k] - overlap_still[k - 1]);
  }

  report.add_value("guaranteed_constant", guaranteed_constant);
  report.add_value("guaranteed_scatter", guaranteed_scatter);
  report.add_value("best_lion_response", static_cast<double>(best_lion));
  report.add_value("initial_overlap", initial_overlap);
  report.add_value("a_prime", a_prime);
  report.add_value("final_overlap_still_lions", overlap_still.back());

  report.add_check("scatter_beats_constant", guaranteed_scatter, guaranteed_constant, 0.0, Relation::Below,
                   kSimulation, options);
  report.add_check("a_prime_nonnegative", a_prime, 0.0, 0.0, Relation::AtLeast, kClosedForm, options);
  report.add_check("initial_overlap_ge_a_prime", initial_overlap, a_prime, 0.0, Relation::AtLeast, kExactIdentity,
                   options);
  report.add_check("scatter_final_below_initial", guaranteed_scatter, initial_overlap, 0.0, Relation::Below,
                   kSimulation, options);
  report.add_check("still_lions_overlap_decreasing", max_increment, 0.0, 0.0, Relation::Below, kSimulation, options);

  report.runtime_seconds = seconds_since(start);
  return report;
}

ViscositySweepParams default_viscosity_params() {
  ViscositySweepParams p;
  const Grid1D g(-2.5, 2.5, 512);
  p.mX0 = quartic_bump(g, -0.3, 0.5);
  p.mY0 = quartic_bump(g, 0.3, 0.5);
  p.alpha = ControlSchedule::constant(ControlField::constant(0.5), p.t0, p.T);
  p.beta = ControlSchedule::constant(ControlField::constant(-0.5), p.t0, p.T);
  return p;
}

std::vector<SweepRow> viscosity_sweep(const ViscositySweepParams& p) {
  if (p.sigmas.empty()) throw InvalidArgument("viscosity sweep: need at least one sigma");
  for (std::size_t i = 0; i < p.sigmas.size(); ++i) {
    if (!(p.sigmas[i] >= 0.0)) throw InvalidArgument("viscosity sweep: sigmas must be >= 0");
    if (i > 0 && !(p.sigmas[i] < p.sigmas[i - 1])) {
      throw InvalidArgument("viscosity sweep: sigmas must be strictly descending");
    }
  }
  std::vector<double> sigmas = p.sigmas;
  if (sigmas.back() != 0.0) sigmas.push_back(0.0);
  const Grid1D& g = p.mX0.grid();
  int n = p.fp_steps;
  if (n <= 0) {
    n = std::max({fokker_planck_min_steps(g, p.alpha, sigmas.front(), p.t0, p.T),
                  fokker_planck_min_steps(g, p.beta, sigmas.front(), p.t0, p.T)});
  }
  std::vector<SweepRow> rows;
  for (double s : sigmas) {
    const DensityGrid mX = fokker_planck_solve(p.mX0, p.alpha, s, p.t0, p.T, n);
    const DensityGrid mY = fokker_planck_solve(p.mY0, p.beta, s, p.t0, p.T, n);
    rows.push_back({s, final_cost(p.fc, mX, mY), 0.0});
  }
  const double J0 = rows.back().J;
  for (auto& r : rows) r.gap = std::abs(r.J - J0);
  return rows;
}

ScenarioReport run_viscosity_sweep(const ViscositySweepParams& p, const ScenarioOptions& options) {
  const auto start = Clock::now();
  ScenarioReport report;
  report.name = "viscosity_sweep";
  const auto rows = viscosity_sweep(p);
  double max_rise = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char key[64];
    std::snprintf(key, sizeof key, "gap_sigma_%g", rows[i].sigma);
    report.add_value(key, rows[i].gap);
    if (i > 0) max_rise = std::max(max_rise, rows[i].gap - rows[i - 1].gap);
  }
  report.add_check("gaps_nonincreasing", max_rise, 0.0, 0.0, Relation::AtMost, kSimulation, options);
  report.add_check("sigma0_gap", rows.back().gap, 0.0, 0.0, Relation::Within, kExactIdentity, options);

  // Diffusion alone keeps the means, so psi3 barely moves with sigma.
  {
    ViscositySweepParams q = p;
    q.fc = FinalCost::mean_diff_squared();
    q.alpha = ControlSchedule::constant(ControlField::constant(0.0), p.t0, p.T);
    q.beta = q.alpha;
    q.fp_steps = 0;
    const auto still = viscosity_sweep(q);
    double worst = 0.0;
    for (const auto& r : still) worst = std::max(worst, r.gap);
    report.add_check("psi3_sigma_invariance", worst, 0.0, 0.01 * std::abs(still.back().J), Relation::AtMost,
                     kClosedForm, options);
  }

  // Heat kernel: variance grows by 2 sigma t.
  {
    const Grid1D g(-3.0, 3.0, 1024);
    const double v0 = 0.04;
    const double sigma = 0.05;
    const double T = 0.5;
    const DensityGrid m0 = DensityGrid::from_function(g, [&](double x) { return std::exp(-x * x / (2.0 * v0)); });
    const auto still = ControlSchedule::constant(ControlField::constant(0.0), 0.0, T);
    const DensityGrid m1 = fokker_planck_solve(m0, still, sigma, 0.0, T,
                                               fokker_planck_min_steps(g, still, sigma, 0.0, T));
    auto variance = [](const DensityGrid& m) {
      const double c = centroid(m);
      std::vector<double> v(m.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (m.grid().x(i) - c) * (m.grid().x(i) - c) * m[i];
      return integrate(m.grid(), v) / total_mass(m);
    };
    const double expected = variance(m0) + 2.0 * sigma * T;
    report.add_check("heat_variance_growth", variance(m1), expected, 0.02, Relation::WithinRelative, kClosedForm,
                     options);
  }

  report.runtime_seconds = seconds_since(start);
  return report;
}

ScenarioReport run_hamiltonian_suite(const ScenarioOptions& options) {
  const auto start = Clock::now();
  ScenarioReport report;
  report.name = "hamiltonian_properties";
  const Grid1D g(-3.0, 3.0, 512);
  UniformStream rng(options.seed + 2);
  const ControlDictionary dict = standard_dictionary(1.0);
  const RunningCost rc = RunningCost::zero();

  const DensityGrid unit = quartic_bump(g, 0.2, 0.6);
  const GradientGrid px = GradientGrid::from_function(g, [](double x) { return x; });
  report.add_check("linear_p_pairing", transport_pairing(px, ControlField::constant(0.7), unit, 0.0), -0.7, 1e-6,
                   Relation::Within, kClosedForm, options);
  const GradientGrid zero = GradientGrid::from_function(g, [](double) { return 0.0; });
  report.add_check("zero_p_pairing", transport_pairing(zero, ControlField::constant(0.7), unit, 0.0), 0.0, 0.0,
                   Relation::Within, kExactIdentity, options);
  const auto tie = hamiltonian_minmax(unit, unit, 0.0, zero, zero, dict, dict, rc, 0.0);
  report.add_check("tie_break_argmin_b", static_cast<double>(tie.argmin_b), 0.0, 0.0, Relation::Within,
                   kExactIdentity, options);

  double psi3_worst = 0.0;
  double psi1_worst = 0.0;
  double separability = 0.0;
  int argmax_changes = 0;
  for (int s = 0; s < 50; ++s) {
    const DensityGrid mX = random_bump(g, rng, 0.05, 0.2, 0.6);
    const DensityGrid mY = random_bump(g, rng, 0.05, 0.2, 0.6);
    const double t = rng.next();
    psi3_worst = std::max(
        psi3_worst, std::abs(isaacs_residual(CandidateValue::psi3_analytic(), mX, mY, t, dict, dict, rc, 0.0)));
    psi1_worst = std::max(
        psi1_worst, std::abs(isaacs_residual(CandidateValue::psi1_analytic(), mX, mY, t, dict, dict, rc, 0.0)));

    const double k1 = rng.next(-2.0, 2.0);
    const double k2 = rng.next(0.5, 3.0);
    const double k3 = rng.next(-2.0, 2.0);
    const GradientGrid p = GradientGrid::from_function(g, [&](double x) { return std::sin(k2 * x) + k1 * x; });
    const GradientGrid q = GradientGrid::from_function(g, [&](double x) { return std::cos(k2 * x) * k3; });
    const auto H = hamiltonian_minmax(mX, mY, t, p, q, dict, dict, rc, 0.0);
    double best_a = -std::numeric_limits<double>::infinity();
    double best_b = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < dict.size(); ++a) best_a = std::max(best_a, transport_pairing(p, dict[a], mX, 0.0));
    for (std::size_t b = 0; b < dict.size(); ++b) best_b = std::min(best_b, transport_pairing(q, dict[b], mY, 0.0));
    separability = std::max(separability, std::abs(H.value - (best_a + best_b)));
    const auto Hs = hamiltonian_minmax(mX, mY, t, p.scaled(rng.next(0.1, 10.0)), q, dict, dict, rc, 0.0);
    if (Hs.argmax_a_per_b != H.argmax_a_per_b) ++argmax_changes;
  }
  report.add_check("isaacs_residual_psi3", psi3_worst, 0.0, 1e-5, Relation::AtMost, kClosedForm, options);
  report.add_check("isaacs_residual_psi1", psi1_worst, 0.0, 1e-5, Relation::AtMost, kClosedForm, options);
  report.add_check("separability", separability, 0.0, 1e-10, Relation::AtMost, kExactIdentity, options);
  report.add_check("argmax_scale_invariance", argmax_changes, 0.0, 0.0, Relation::Within, kExactIdentity, options);

  // Continuity gap with shape-changing fields in both dictionaries.
  const ControlDictionary rich({ControlField::constant(-1.0), ControlField::constant(1.0),
                                ControlField::affine(0.8, 0.1, 1.0), ControlField::scatter(-1.0, 1.0, 1.0)});
  const double M = rich.divergence_bound(g.domain());
  double gap_excess = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 100; ++s) {
    const DensityGrid m1X = random_bump(g, rng, 0.05, 0.2, 0.8, rng.next(0.5, 1.5));
    const DensityGrid m1Y = random_bump(g, rng, 0.05, 0.2, 0.8, rng.next(0.5, 1.5));
    const DensityGrid m2X = random_bump(g, rng, 0.05, 0.2, 0.8, rng.next(0.5, 1.5));
    const DensityGrid m2Y = random_bump(g, rng, 0.05, 0.2, 0.8, rng.next(0.5, 1.5));
    const double zeta = rng.next(0.2, 2.0);
    const double xi = rng.next(0.2, 2.0);
    const auto gap = continuity_gap_check(m1X, m1Y, 0.0, m2X, m2Y, 0.0, zeta, xi, rich, rich, rc, M);
    gap_excess = std::max(gap_excess, gap.lhs - gap.rhs);
  }
  report.add_value("continuity_div_bound", M);
  report.add_check("continuity_gap_bound", gap_excess, 0.0, 1e-6, Relation::AtMost, kClosedForm, options);

  // Integration by parts against the product-rule form as the grid refines, smooth data.
  const ControlField f = ControlField::affine(0.6, 0.2, std::numeric_limits<double>::infinity());
  std::vector<double> errs;
  for (int n : {256, 512, 1024}) {
    const Grid1D gn(-3.0, 3.0, n);
    const DensityGrid m = DensityGrid::from_function(gn, [](double x) { return std::exp(-(x - 0.1) * (x - 0.1) / 0.4); });
    const GradientGrid p = GradientGrid::from_function(gn, [](double x) { return std::sin(2.0 * x); });
    errs.push_back(std::abs(transport_pairing(p, f, m, 0.0, PairingForm::IntegrationByParts) -
                            transport_pairing(p, f, m, 0.0, PairingForm::Direct)));
  }
  const double order = std::min(std::log2(errs[0] / errs[1]), std::log2(errs[1] / errs[2]));
  report.add_value("pairing_form_gap_n1024", errs[2]);
  report.add_check("pairing_form_order", order, 1.8, 0.0, Relation::AtLeast, kQuadratureOracle, options);

  report.runtime_seconds = seconds_since(start);
  return report;
}

}  // namespace masschase
