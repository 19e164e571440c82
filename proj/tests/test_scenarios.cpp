#include <cmath>

#include "doctest.h"
#include "masschase/error.hpp"
#include "masschase/scenarios.hpp"
#include "support.hpp"

using namespace masschase;

namespace {

double value_of(const ScenarioReport& r, const std::string& key) {
  for (const auto& [k, v] : r.values) {
    if (k == key) return v;
  }
  FAIL("missing value " << key);
  return NAN;
}

const Check& check_named(const ScenarioReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return r.checks.front();
}

void require_all_pass(const ScenarioReport& r) {
  for (const auto& c : r.checks) {
    INFO(r.name << "." << c.name << " computed " << c.computed << " reference " << c.reference);
    CHECK(c.passed);
  }
  CHECK_NOTHROW(validate_report(r));
}

nlohmann::json without_meta(const ScenarioReport& r) {
  nlohmann::json j = to_json(r);
  j.erase("meta");
  return j;
}

}  // namespace

TEST_CASE("evaluate_relation") {
  CHECK(evaluate_relation(Relation::Within, 1.0, 1.05, 0.1));
  CHECK_FALSE(evaluate_relation(Relation::Within, 1.0, 1.2, 0.1));
  CHECK(evaluate_relation(Relation::WithinRelative, 1.04, 1.0, 0.05));
  CHECK_FALSE(evaluate_relation(Relation::WithinRelative, 1.06, 1.0, 0.05));
  CHECK(evaluate_relation(Relation::AtMost, 1.0, 1.0, 0.0));
  CHECK(evaluate_relation(Relation::AtLeast, 1.0, 1.0, 0.0));
  CHECK_FALSE(evaluate_relation(Relation::Below, 1.0, 1.0, 0.0));
  CHECK(evaluate_relation(Relation::Below, 0.9, 1.0, 0.0));
  CHECK_FALSE(evaluate_relation(Relation::AtMost, NAN, 1.0, 10.0));
  CHECK_FALSE(evaluate_relation(Relation::Within, INFINITY, 1.0, 10.0));
}

TEST_CASE("validation rejects checks without a known source") {
  ScenarioReport r;
  r.name = "t";
  r.add_check("ok", 1.0, 1.0, 0.0, Relation::Within, kClosedForm, {});
  CHECK_NOTHROW(validate_report(r));
  r.add_check("untagged", 1.0, 1.0, 0.0, Relation::Within, "", {});
  CHECK_THROWS_AS(validate_report(r), InvalidArgument);
  ScenarioReport u;
  u.add_check("odd", 1.0, 1.0, 0.0, Relation::Within, "folklore", {});
  CHECK_THROWS_AS(validate_report(u), InvalidArgument);
  for (const char* s : {kClosedForm, kQuadratureOracle, kExactIdentity, kSimulation, kDiscretizationBound}) {
    CHECK(is_known_source(s));
  }
}

TEST_CASE("report serialization") {
  ScenarioReport r;
  r.name = "demo";
  r.add_check("a", 1.0, 1.0, 0.0, Relation::Within, kExactIdentity, {});
  r.add_check("b", 2.0, 1.0, 0.5, Relation::AtMost, kSimulation, {});
  r.add_value("nan_value", NAN);
  const auto j = to_json(r);
  CHECK(j.at("name") == "demo");
  CHECK(j.at("passed") == false);
  CHECK(j.at("checks").size() == 2);
  CHECK(j.at("checks")[1].at("passed") == false);
  CHECK(j.at("values").at("nan_value").is_null());
  CHECK(j.at("meta").contains("runtime_seconds"));
  const std::string text = to_text(r);
  CHECK(text.find("PASS") != std::string::npos);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(r.n_passed() == 1);
}

TEST_CASE("tolerance override forces every tolerance") {
  ScenarioOptions o;
  o.tolerance_override = 0.0;
  ScenarioReport r;
  r.add_check("close", 1.0 + 1e-12, 1.0, 1e-3, Relation::Within, kClosedForm, o);
  CHECK(r.checks[0].tolerance == 0.0);
  CHECK_FALSE(r.passed());
}

TEST_CASE("UniformStream is seeded and stays in range") {
  UniformStream a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.next();
    const double y = a.next(-2.0, 3.0);
    b.next();
    CHECK(y >= -2.0);
    CHECK(y < 3.0);
  }
  CHECK(differs);
}

TEST_CASE("psi3 example scenarios") {
  const ScenarioReport base = run_example_psi3(Psi3Params{});
  require_all_pass(base);
  CHECK(base.checks.size() >= 8);

  Psi3Params equal;
  equal.muX = equal.muY = 0.4;
  const ScenarioReport e = run_example_psi3(equal);
  require_all_pass(e);
  CHECK(std::abs(value_of(e, "lower")) <= 1e-6);

  Psi3Params quarter;
  quarter.muX = 0.3;
  quarter.muY = -0.2;
  const ScenarioReport q = run_example_psi3(quarter);
  require_all_pass(q);
  CHECK(check_named(q, "lower_value").reference == doctest::Approx(0.25));
}

TEST_CASE("psi1 example scenarios") {
  require_all_pass(run_example_psi1(default_psi1_params()));

  const Grid1D g(-2.5, 2.5, 512);
  Psi1Params same = default_psi1_params();
  same.mX0 = same.mY0 = quartic_bump(g, 0.0, 0.5);
  const ScenarioReport s = run_example_psi1(same);
  require_all_pass(s);
  const double l2 = lp_norm(same.mX0, Norm::L2);
  CHECK(value_of(s, "reference_psi1") == doctest::Approx(l2 * l2).epsilon(1e-12));

  Psi1Params apart = default_psi1_params();
  apart.mX0 = quartic_bump(g, -1.2, 0.3);
  apart.mY0 = quartic_bump(g, 1.2, 0.3);
  const ScenarioReport d = run_example_psi1(apart);
  require_all_pass(d);
  CHECK(value_of(d, "lower") <= 1e-3);

  // Kinks on even nodes of a 0.01 grid: the grid reference equals the fine oracle.
  const Grid1D tg(-2.5, 2.5, 500);
  Psi1Params tri = default_psi1_params();
  tri.mX0 = testing::triangle(tg, -0.5, 0.0, 0.5, 2.0);
  tri.mY0 = testing::triangle(tg, -0.2, 0.3, 0.8, 1.0);
  const auto tx = [](double x) { return x <= -0.5 || x >= 0.5 ? 0.0 : 2.0 * (1.0 - std::abs(x) / 0.5); };
  const auto ty = [](double x) { return x <= -0.2 || x >= 0.8 ? 0.0 : 1.0 - std::abs(x - 0.3) / 0.5; };
  const double oracle = testing::midpoint_oracle([&](double x) { return tx(x) * ty(x); }, -2.5, 2.5);
  const ScenarioReport t = run_example_psi1(tri);
  require_all_pass(t);
  CHECK(std::abs(value_of(t, "reference_psi1") - oracle) <= 1e-9);
}

TEST_CASE("antelope and lion scenario") {
  const ScenarioReport r = run_antelope_lion(AntelopeLionParams{});
  require_all_pass(r);
  CHECK(value_of(r, "a_prime") >= 0.0);
  CHECK(value_of(r, "guaranteed_scatter") < value_of(r, "guaranteed_constant"));
  CHECK(value_of(r, "guaranteed_scatter") < value_of(r, "initial_overlap"));
}

TEST_CASE("viscosity sweep") {
  const ViscositySweepParams p = default_viscosity_params();
  require_all_pass(run_viscosity_sweep(p));

  const auto rows = viscosity_sweep(p);
  REQUIRE(rows.size() == 5);
  CHECK(rows.back().sigma == 0.0);
  CHECK(rows.back().gap == 0.0);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) CHECK(rows[i].gap < rows[i - 1].gap);

  ViscositySweepParams three = p;
  three.sigmas = {0.1, 0.01, 0.0};
  const auto r3 = viscosity_sweep(three);
  REQUIRE(r3.size() == 3);
  CHECK(r3[2].gap == 0.0);

  ViscositySweepParams bad = p;
  bad.fp_steps = 1;
  CHECK_THROWS_AS(viscosity_sweep(bad), CflViolation);
}

TEST_CASE("hamiltonian property suite") {
  const ScenarioReport r = run_hamiltonian_suite();
  require_all_pass(r);
  CHECK(r.checks.size() >= 8);
}

TEST_CASE("reports are deterministic apart from runtimes") {
  ScenarioOptions o;
  o.seed = 5;
  CHECK(without_meta(run_hamiltonian_suite(o)) == without_meta(run_hamiltonian_suite(o)));
  Psi3Params small;
  small.n_steps = 8;
  small.n_random_states = 10;
  CHECK(without_meta(run_example_psi3(small, o)) == without_meta(run_example_psi3(small, o)));
}
