// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "masschase/controls.hpp"
#include "masschase/cost.hpp"
#include "masschase/flow.hpp"
#include "masschase/game.hpp"
#include "masschase/hamiltonian.hpp"
#include "masschase/scenarios.hpp"

using namespace masschase;

namespace {

constexpr double kValueRelTol = 0.05;
constexpr double kRuntimeLimit = 10.0;
constexpr double kIsaacsTol = 1e-5;
constexpr double kPushForwardL1Tol = 1e-4;
constexpr double kMassTol = 1e-8;
constexpr double kBruteForceTol = 1e-9;
constexpr double kOwnDppTol = 1e-12;
constexpr double kAnalyticDppRel = 0.05;
constexpr double kContinuitySlack = 1e-6;
constexpr double kLiouvilleTol = 1e-6;
constexpr double kSemigroupTol = 1e-7;
constexpr double kVarianceRelTol = 0.02;
constexpr int kRandomStates = 50;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using Clock = std::chrono::steady_clock;

std::mt19937_64& rng() {
  static std::mt19937_64 r(20261014);
  return r;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

DensityGrid random_bump(const Grid1D& g, double margin) {
  const double r = uniform(0.15, 0.4);
  return quartic_bump(g, uniform(g.lo() + margin + r, g.hi() - margin - r), r);
}

GameSpec psi3_spec(const Grid1D& g, double muX, double muY, int n_steps, double T) {
  GameSpec s;
  s.T = T;
  s.n_steps = n_steps;
  s.mX0 = quartic_bump(g, muX, 0.25);
  s.mY0 = quartic_bump(g, muY, 0.25);
  s.dictA = standard_dictionary(1.0);
  s.dictB = standard_dictionary(1.0);
  s.fc = FinalCost::mean_diff_squared();
  return s;
}

double max_dpp(const ValueTable& t, const GameSpec& s) {
  double w = 0.0;
  for (int k = 0; k + 1 < t.n_levels(); ++k) w = std::max(w, dpp_residual(t, s, k));
  return w;
}

Outcome criterion_psi3_value() {
  Outcome o;
  const auto start = Clock::now();
  const Grid1D g(-1.25, 2.25, 512);
  const GameSpec s = psi3_spec(g, 0.0, 1.0, 32, 0.5);
  const ValueTable t = solve_values(s);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  o.require(std::abs(t.lower_origin() - 1.0) <= kValueRelTol, "lower " + fmt("%.8f", t.lower_origin()));
  o.require(std::abs(t.upper_origin() - 1.0) <= kValueRelTol, "upper " + fmt("%.8f", t.upper_origin()));
  o.require(t.lower_origin() <= t.upper_origin(), "lower <= upper");
  o.require(secs < kRuntimeLimit, "runtime " + fmt("%.3f", secs) + " s");
  return o;
}

Outcome criterion_psi1_value() {
  Outcome o;
  const Psi1Params p = default_psi1_params();
  GameSpec s;
  s.T = p.T;
  s.n_steps = p.n_steps;
  s.mX0 = p.mX0;
  s.mY0 = p.mY0;
  s.dictA = standard_dictionary(p.c);
  s.dictB = standard_dictionary(p.c);
  s.fc = FinalCost::overlap();
  const ValueTable t = solve_values(s);
  const double ref = psi1(p.mX0, p.mY0);
  o.require(std::abs(t.lower_origin() - ref) <= kValueRelTol * ref,
            "lower " + fmt("%.6f", t.lower_origin()) + " vs " + fmt("%.6f", ref));
  o.require(std::abs(t.upper_origin() - ref) <= kValueRelTol * ref, "upper " + fmt("%.6f", t.upper_origin()));
  const Grid1D& g = p.mX0.grid();
  double worst = 0.0;
  for (int k = 0; k < kRandomStates; ++k) {
    const DensityGrid mX = random_bump(g, 0.6);
    const DensityGrid mY = random_bump(g, 0.6);
    worst = std::max(worst, std::abs(isaacs_residual(CandidateValue::psi1_analytic(), mX, mY, uniform(0, p.T), s.dictA,
                                                     s.dictB, RunningCost::zero(), 0.0)));
  }
  o.require(worst <= kIsaacsTol, "Isaacs residual " + fmt("%.2e", worst));
  return o;
}

Outcome criterion_psi3_isaacs() {
  Outcome o;
  const Grid1D g(-3.0, 3.0, 512);
  double worst = 0.0;
  for (int k = 0; k < kRandomStates; ++k) {
    const ControlDictionary d = standard_dictionary(uniform(0.5, 2.0));
    const DensityGrid mX = random_bump(g, 0.1);
    const DensityGrid mY = random_bump(g, 0.1);
    worst = std::max(worst, std::abs(isaacs_residual(CandidateValue::psi3_analytic(), mX, mY, uniform(0, 1), d, d,
                                                     RunningCost::zero(), 0.0)));
  }
  o.require(worst <= kIsaacsTol, "max residual " + fmt("%.2e", worst));
  return o;
}

Outcome criterion_push_forward() {
  Outcome o;
  const Grid1D g(-3.0, 3.0, 1024);
  const auto bump = [](double x) {
    const double u = (x - 0.2) / 0.6;
    return std::abs(u) < 1.0 ? (1 - u * u) * (1 - u * u) : 0.0;
  };
  const DensityGrid m0 = DensityGrid::from_function(g, bump);
  const double lambda = 0.5;
  const DensityGrid out =
      push_forward(m0, ControlSchedule::constant(ControlField::affine(lambda, 0.0, INFINITY), 0.0, 1.0), 0.0, 1.0, 100);
  const double e = std::exp(-lambda);
  std::vector<double> err(g.n_nodes()), ref(g.n_nodes());
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double exact = bump(g.x(i) * e) * e;
    err[i] = std::abs(out[i] - exact);
    ref[i] = exact;
  }
  const double rel = integrate(g, err) / integrate(g, ref);
  o.require(rel < kPushForwardL1Tol, "relative L1 " + fmt("%.2e", rel));

  // Mass across a spread of admissible schedules, including kinked fields.
  const Grid1D wide(-4.0, 4.0, 800);
  std::vector<ControlSchedule> schedules{
      ControlSchedule::constant(ControlField::constant(0.8), 0.0, 1.0),
      ControlSchedule::constant(ControlField::affine(-0.7, 0.2, 1.0), 0.0, 1.0),
      ControlSchedule::constant(ControlField::affine(1.0, 0.0, 0.5), 0.0, 1.0),
      ControlSchedule::constant(ControlField::scatter(-0.3, 0.3, 1.0), 0.0, 1.0),
      ControlSchedule({0.0, 0.3, 1.0}, {ControlField::constant(-1.0), ControlField::affine(0.5, -0.1, 1.0)})};
  double drift = 0.0;
  for (const auto& s : schedules) {
    for (int k = 0; k < 4; ++k) {
      const DensityGrid m = random_bump(wide, 1.5);
      const double mass = total_mass(m);
      drift = std::max(drift, std::abs(total_mass(push_forward(m, s, 0.0, 1.0, 100)) - mass) / mass);
    }
  }
  o.require(drift < kMassTol, "max relative mass drift " + fmt("%.2e", drift));
  return o;
}

Outcome criterion_brute_force() {
  Outcome o;
  const Grid1D g(-2.0, 3.0, 640);
  double worst = 0.0;
  int games = 0;
  for (int n = 1; n <= 3; ++n) {
    for (const FinalCost& fc : {FinalCost::mean_diff_squared(), FinalCost::overlap(), FinalCost::window_diff_squared(0.3)}) {
      for (double muY : {1.0, 0.25}) {
        GameSpec s = psi3_spec(g, 0.0, muY, n, 0.5);
        s.fc = fc;
        const ValueTable t = solve_values(s);
        const auto [bl, bu] = brute_force_value(s, 3);
        worst = std::max({worst, std::abs(bl - t.lower_origin()), std::abs(bu - t.upper_origin())});
        ++games;
      }
    }
  }
  o.require(worst <= kBruteForceTol, std::to_string(games) + " games, max diff " + fmt("%.2e", worst));
  return o;
}

Outcome criterion_dpp() {
  Outcome o;
  const Grid1D g(-1.25, 2.25, 512);
  const GameSpec s = psi3_spec(g, 0.0, 1.0, 32, 0.5);
  const ValueTable t = solve_values(s);
  const double own = max_dpp(t, s);
  o.require(own <= kOwnDppTol, "own table " + fmt("%.2e", own));

  ValueTable analytic = value_table_layout(s);
  const double d0 = mean(s.mX0) - mean(s.mY0);
  for (int k = 0; k < analytic.n_levels(); ++k) {
    for (int i = 0; i < analytic.axis_x().size(); ++i) {
      for (int j = 0; j < analytic.axis_y().size(); ++j) {
        const double d = d0 + analytic.axis_x().value(i) - analytic.axis_y().value(j);
        analytic.set(k, i, j, d * d, d * d);
      }
    }
  }
  const double scale = d0 * d0;
  const double inj = max_dpp(analytic, s);
  o.require(inj <= kAnalyticDppRel * scale, "analytic table " + fmt("%.2e", inj) + " vs scale " + fmt("%.3f", scale));
  return o;
}

Outcome criterion_continuity_gap() {
  Outcome o;
  const Grid1D g(-3.0, 3.0, 400);
  const ControlDictionary d({ControlField::constant(-1.0), ControlField::constant(1.0),
                             ControlField::affine(0.8, 0.1, 1.0), ControlField::scatter(-1.0, 1.0, 1.0)});
  const double M = d.divergence_bound(g.domain());
  int passed = 0;
  double worst = -INFINITY;
  for (int k = 0; k < 100; ++k) {
    const auto r = continuity_gap_check(random_bump(g, 0.5), random_bump(g, 0.5), uniform(0, 1), random_bump(g, 0.5),
                                        random_bump(g, 0.5), uniform(0, 1), uniform(0.2, 2.0), uniform(0.2, 2.0), d, d,
                                        RunningCost::zero(), M);
    passed += r.lhs <= r.rhs + kContinuitySlack ? 1 : 0;
    worst = std::max(worst, r.lhs - r.rhs);
  }
  o.require(passed == 100, std::to_string(passed) + "/100 pairs, max lhs - rhs " + fmt("%.2e", worst));
  return o;
}

ControlSchedule random_schedule(double M) {
  const int pieces = std::uniform_int_distribution<int>(1, 3)(rng());
  std::vector<double> bp{0.0};
  for (int k = 1; k < pieces; ++k) bp.push_back(static_cast<double>(k) / pieces);
  bp.push_back(1.0);
  std::vector<ControlField> f;
  for (int k = 0; k < pieces; ++k) {
    if (uniform(0, 1) < 0.5) {
      f.push_back(ControlField::constant(uniform(-M, M)));
    } else {
      f.push_back(ControlField::affine(uniform(-M, M), uniform(-0.5 * M, 0.5 * M), M));
    }
  }
  return ControlSchedule(bp, f);
}

Outcome criterion_invariant_set() {
  Outcome o;
  const double M = 1.0, T = 1.0;
  const Grid1D g(-3.0, 3.0, 600);
  const DensityGrid m0 = quartic_bump(g, 0.0, 0.5);
  const Interval s0 = support_of(m0);
  std::vector<ControlSchedule> schedules;
  for (int k = 0; k < 20; ++k) schedules.push_back(random_schedule(M));
  const double bound = lp_norm(m0, Norm::W1Inf) * std::exp(2.0 * M * T);
  const auto rep = verify_invariant_set(m0, schedules, SupportTube(s0.lo, s0.hi, M), bound, {0.0, 0.25, 0.5, 0.75, 1.0});
  o.require(rep.all_contained(), "support containment");
  o.require(rep.all_bounded(), "W1inf bound");
  double liou = 0.0, semi = 0.0;
  for (const auto& s : schedules) {
    for (int k = 0; k < 5; ++k) {
      liou = std::max(liou, liouville_error(s, uniform(s0.lo, s0.hi), 0.0, T, 100));
      double t[3] = {uniform(0, T), uniform(0, T), uniform(0, T)};
      std::sort(t, t + 3);
      semi = std::max(semi, semigroup_error(s, uniform(s0.lo, s0.hi), t[0], t[1], t[2], 100.0));
    }
  }
  o.require(liou <= kLiouvilleTol, "Liouville " + fmt("%.2e", liou));
  o.require(semi <= kSemigroupTol, "semigroup " + fmt("%.2e", semi));
  return o;
}

Outcome criterion_fokker_planck() {
  Outcome o;
  const Grid1D g(-3.0, 3.0, 1024);
  const double v0 = 0.04, sigma = 0.05, T = 0.5;
  const DensityGrid m0 = DensityGrid::from_function(g, [&](double x) { return std::exp(-x * x / (2 * v0)); });
  const auto still = ControlSchedule::constant(ControlField::constant(0.0), 0.0, T);
  const DensityGrid m1 = fokker_planck_solve(m0, still, sigma, 0.0, T, fokker_planck_min_steps(g, still, sigma, 0.0, T));
  std::vector<double> w(g.n_nodes());
  const double mu = centroid(m1);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (g.x(i) - mu) * (g.x(i) - mu) * m1[i];
  const double var = integrate(g, w) / total_mass(m1);
  const double expect = v0 + 2 * sigma * T;
  o.require(std::abs(var - expect) <= kVarianceRelTol * expect,
            "variance " + fmt("%.5f", var) + " vs " + fmt("%.5f", expect));

  const auto rows = viscosity_sweep(default_viscosity_params());
  bool monotone = true;
  std::string gaps;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].gap > rows[i - 1].gap) monotone = false;
    gaps += (i ? "," : "") + fmt("%.3g", rows[i].gap);
  }
  o.require(monotone, "gaps nonincreasing [" + gaps + "]");
  return o;
}

double value_of(const ScenarioReport& r, const std::string& key) {
  for (const auto& [k, v] : r.values) {
    if (k == key) return v;
  }
  return NAN;
}

Outcome criterion_antelope() {
  Outcome o;
  const ScenarioReport r = run_antelope_lion(AntelopeLionParams{});
  const double scatter = value_of(r, "guaranteed_scatter");
  const double constant = value_of(r, "guaranteed_constant");
  const double initial = value_of(r, "initial_overlap");
  const double a_prime = value_of(r, "a_prime");
  o.require(scatter < constant, "scatter " + fmt("%.6f", scatter) + " < constant " + fmt("%.6f", constant));
  o.require(scatter < initial, "final overlap below initial " + fmt("%.6f", initial));
  o.require(initial >= a_prime && a_prime >= 0.0, "initial >= a' = " + fmt("%.6f", a_prime));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"psi3 example value", criterion_psi3_value},
      {"psi1 example value and Isaacs residual", criterion_psi1_value},
      {"psi3 Isaacs residual", criterion_psi3_isaacs},
      {"push-forward oracle and mass conservation", criterion_push_forward},
      {"solver vs brute-force tree", criterion_brute_force},
      {"dynamic programming residual", criterion_dpp},
      {"Hamiltonian continuity bound", criterion_continuity_gap},
      {"invariant-set suite", criterion_invariant_set},
      {"Fokker-Planck variance and vanishing viscosity", criterion_fokker_planck},
      {"antelope and lion", criterion_antelope},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %-48s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
