#include <cmath>

#include "doctest.h"
#include "masschase/error.hpp"
#include "masschase/flow.hpp"
#include "support.hpp"

using namespace masschase;
using testing::Gen;

namespace {

ControlSchedule steady(const ControlField& f, double t0 = 0.0, double t1 = 1.0) {
  return ControlSchedule::constant(f, t0, t1);
}

double quartic(double x, double c, double r) {
  const double u = (x - c) / r;
  return std::abs(u) < 1.0 ? (1 - u * u) * (1 - u * u) : 0.0;
}

double l1_of(const Grid1D& g, const std::function<double(double)>& f) {
  std::vector<double> v(g.n_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f(g.x(i)));
  return integrate(g, v);
}

}  // namespace

TEST_CASE("integrate_flow examples") {
  const FlowPoint id = integrate_flow(steady(ControlField::constant(0.0)), 0.3, 0.0, 1.0, 10);
  CHECK(id.phi == 0.3);
  CHECK(id.jac == 1.0);

  const FlowPoint sh = integrate_flow(steady(ControlField::constant(2.0)), 0.3, 0.0, 0.75, 10);
  CHECK(sh.phi == doctest::Approx(0.3 + 1.5).epsilon(1e-14));
  CHECK(sh.jac == 1.0);

  const FlowPoint lin = integrate_flow(steady(ControlField::affine(0.5, 0.0, INFINITY)), 1.0, 0.0, 1.0, 100);
  CHECK(std::abs(lin.phi - std::exp(0.5)) <= 1e-8);
  CHECK(std::abs(lin.jac - std::exp(0.5)) <= 1e-8);

  const FlowPoint same = integrate_flow(steady(ControlField::affine(0.5, 0.0, INFINITY)), 1.0, 0.4, 0.4, 5);
  CHECK(same.phi == 1.0);
  CHECK(same.jac == 1.0);
  CHECK_THROWS_AS(integrate_flow(steady(ControlField::constant(0.0)), 0.0, 0.5, 0.2, 4), InvalidArgument);
  CHECK_THROWS_AS(integrate_flow(steady(ControlField::constant(0.0)), 0.0, 0.0, 0.2, 0), InvalidArgument);
}

TEST_CASE("inverse_flow examples and round trip") {
  CHECK(inverse_flow(steady(ControlField::constant(0.0)), 0.7, 0.0, 1.0, 10) == 0.7);
  CHECK(inverse_flow(steady(ControlField::constant(1.5)), 0.7, 0.0, 0.5, 10) == doctest::Approx(0.7 - 0.75));

  const ControlSchedule lin = steady(ControlField::affine(0.5, 0.0, INFINITY));
  for (double x : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
    const double z = inverse_flow(lin, x, 0.0, 1.0, 100);
    CHECK(std::abs(integrate_flow(lin, z, 0.0, 1.0, 100).phi - x) <= 1e-8);
    const FlowPoint back = inverse_flow_with_jacobian(lin, x, 0.0, 1.0, 100);
    CHECK(std::abs(back.jac - std::exp(-0.5)) <= 1e-8);
  }
}

TEST_CASE("push_forward under a constant field is a shift") {
  const Grid1D g(-1.0, 2.0, 768);
  const DensityGrid m0 = quartic_bump(g, 0.1, 0.4);
  const DensityGrid out = push_forward(m0, steady(ControlField::constant(1.0)), 0.0, 0.5, 50);
  const DensityGrid shifted = quartic_bump(g, 0.6, 0.4);
  CHECK(l1_distance(out, shifted) <= 2.0 * g.dx() * lp_norm(m0, Norm::W1Inf));
  CHECK(std::abs(total_mass(out) - total_mass(m0)) <= 1e-8 * total_mass(m0));
}

TEST_CASE("push_forward matches the closed form of the linear flow") {
  const double lambda = 0.5;
  const double dt = 1.0;
  const Grid1D g(-3.0, 3.0, 1024);
  const double c = 0.2, r = 0.6;
  const DensityGrid m0 = DensityGrid::from_function(g, [&](double x) { return quartic(x, c, r); });
  const ControlSchedule lin = steady(ControlField::affine(lambda, 0.0, INFINITY), 0.0, dt);
  const DensityGrid out = push_forward(m0, lin, 0.0, dt, 100);
  const double e = std::exp(-lambda * dt);
  const auto exact = [&](double x) { return quartic(x * e, c, r) * e; };
  const double err = l1_of(g, [&](double x) { return sample_at(out, x) - exact(x); }) / l1_of(g, exact);
  CHECK(err < 1e-4);

  const DensityGrid raw = push_forward(m0, lin, 0.0, dt, 100, false);
  const double raw_err = l1_of(g, [&](double x) { return sample_at(raw, x) - exact(x); }) / l1_of(g, exact);
  CHECK(raw_err < 1e-4);
}

TEST_CASE("push_forward rejects tubes leaving the domain") {
  const Grid1D g(-1.0, 1.0, 200);
  const DensityGrid m0 = quartic_bump(g, 0.5, 0.3);
  CHECK_THROWS_AS(push_forward(m0, steady(ControlField::constant(1.0)), 0.0, 0.5, 20), TubeOverflow);
  CHECK_THROWS_AS(push_forward(m0, steady(ControlField::constant(1.0)), 0.0, 0.5, 20), NumericalError);
  CHECK_THROWS_AS(push_forward(m0, steady(ControlField::constant(-1.0)), 0.0, 0.5, 20), TubeOverflow);
  CHECK_NOTHROW(push_forward(quartic_bump(g, 0.0, 0.3), steady(ControlField::constant(-1.0)), 0.0, 0.5, 20));
}

TEST_CASE("push_forward of the zero density and over zero time") {
  const Grid1D g(-1.0, 1.0, 20);
  const ControlSchedule move = steady(ControlField::constant(1.0));
  const DensityGrid z = push_forward(DensityGrid::zero(g), move, 0.0, 1.0, 10);
  CHECK(total_mass(z) == 0.0);
  const DensityGrid m0 = quartic_bump(g, 0.0, 0.3);
  CHECK(testing::max_abs_diff(push_forward(m0, move, 0.5, 0.5, 10), m0) == 0.0);
}

TEST_CASE("solve_continuity") {
  const Grid1D g(-2.0, 2.0, 1024);
  const DensityGrid m0 = quartic_bump(g, -0.6, 0.3);
  const ControlSchedule move = steady(ControlField::constant(1.0));

  const auto at_t0 = solve_continuity(m0, move, 0.0, {0.0}, 100.0);
  REQUIRE(at_t0.size() == 1);
  for (std::size_t i = 0; i < m0.size(); ++i) CHECK(at_t0[0][i] == m0[i]);

  // Shifts of 0.25 and 0.5 are whole multiples of dx.
  const auto snaps = solve_continuity(m0, move, 0.0, {0.25, 0.75}, 100.0);
  const DensityGrid again = push_forward(snaps[0], move, 0.25, 0.75, 50);
  CHECK(l1_distance(again, snaps[1]) <= 2e-8);

  const ControlSchedule lin = steady(ControlField::affine(0.5, 0.0, INFINITY));
  const DensityGrid b = DensityGrid::from_function(g, [](double x) { return quartic(x, 0.1, 0.4); });
  const std::vector<double> times{0.0, 0.3, 0.6, 1.0};
  const auto ls = solve_continuity(b, lin, 0.0, times, 100.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double e = std::exp(-0.5 * times[k]);
    const auto exact = [&](double x) { return quartic(x * e, 0.1, 0.4) * e; };
    const double err = l1_of(g, [&](double x) { return sample_at(ls[k], x) - exact(x); }) / l1_of(g, exact);
    CHECK(err < 1e-4);
  }

  CHECK_THROWS_AS(solve_continuity(m0, move, 0.0, {0.5, 0.25}, 100.0), InvalidArgument);
  CHECK_THROWS_AS(solve_continuity(m0, move, 0.5, {0.25}, 100.0), InvalidArgument);
}

TEST_CASE("support_tube") {
  const SupportTube t(0.0, 1.0, 2.0);
  const Interval a = support_tube(t, 0.0, 0.0);
  CHECK(a.lo == 0.0);
  CHECK(a.hi == 1.0);
  const Interval b = support_tube(t, 0.0, 0.5);
  CHECK(b.lo == -1.0);
  CHECK(b.hi == 2.0);
  for (double tt : {0.0, 0.1, 0.3, 0.5}) {
    const Interval c = support_tube(t, tt, 0.5);
    CHECK(c.lo == b.lo);
    CHECK(c.hi == b.hi);
  }
  CHECK_THROWS_AS(support_tube(t, 0.6, 0.5), InvalidArgument);
  CHECK_THROWS_AS(SupportTube(1.0, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("verify_invariant_set examples") {
  const Grid1D g(-3.0, 4.0, 700);
  const DensityGrid m0 = quartic_bump(g, 0.5, 0.5);
  const double w0 = lp_norm(m0, Norm::W1Inf);
  const SupportTube tube(0.0, 1.0, 1.0);
  const std::vector<double> times{0.0, 0.5, 1.0};

  const auto still = verify_invariant_set(m0, {steady(ControlField::constant(0.0))}, tube, w0 * (1 + 1e-12), times);
  CHECK(still.passes());
  for (const auto& c : still.checks) {
    CHECK(c.support.lo == support_of(m0).lo);
    CHECK(c.w1inf == doctest::Approx(w0).epsilon(1e-14));
  }

  const auto fast = verify_invariant_set(m0, {steady(ControlField::constant(1.0))}, tube, 2.0 * w0, times);
  CHECK(fast.passes());
  const auto& last = fast.checks.back();
  CHECK(std::abs(last.support.hi - (tube.omega_hi + 1.0)) <= g.dx() * (1 + 1e-9));

  const double lambda = -0.5;
  const auto contract =
      verify_invariant_set(m0, {steady(ControlField::affine(lambda, 0.0, INFINITY))}, tube, 1e9, times);
  const double ratio = contract.checks.back().w1inf / w0;
  MESSAGE("W1inf growth under contraction: " << ratio);
  CHECK(ratio > 1.0);
  CHECK(ratio <= std::exp(2.0 * std::abs(lambda) * 1.0) * (1 + 1e-3));
}

TEST_CASE("property: mass conservation and positivity over random schedules") {
  Gen gen(31);
  const Grid1D g(-4.0, 4.0, 800);
  for (int trial = 0; trial < 40; ++trial) {
    const DensityGrid m0 = gen.two_bumps(Grid1D(-1.5, 1.5, 300));
    const DensityGrid m = DensityGrid::from_function(g, [&](double x) { return sample_at(m0, x); });
    const ControlSchedule s = gen.schedule(0.0, 1.0, 1.0);
    const DensityGrid out = push_forward(m, s, 0.0, 1.0, 100);
    CHECK(std::abs(total_mass(out) - total_mass(m)) <= 1e-8 * total_mass(m));
    for (double v : out.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("property: Liouville identity along random trajectories") {
  Gen gen(32);
  for (int trial = 0; trial < 100; ++trial) {
    const ControlSchedule s = gen.schedule(0.0, 1.0, 1.0);
    CHECK(liouville_error(s, gen.uniform(-1, 1), 0.0, 1.0, 100) <= 1e-6);
  }
  // Clipped and scatter fields have kinks; still well within the tolerance at this step count.
  const ControlSchedule k = steady(ControlField::scatter(-0.2, 0.2, 0.5));
  for (double x : {-0.5, -0.1, 0.0, 0.15, 0.4}) CHECK(liouville_error(k, x, 0.0, 1.0, 400) <= 1e-6);
}

TEST_CASE("property: semigroup over random times") {
  Gen gen(33);
  const ControlSchedule lin = steady(ControlField::affine(0.5, 0.1, INFINITY));
  for (int trial = 0; trial < 100; ++trial) {
    const ControlSchedule& s = (trial % 2 == 0) ? lin : gen.schedule(0.0, 1.0, 1.0);
    double t[3] = {gen.uniform(0, 1), gen.uniform(0, 1), gen.uniform(0, 1)};
    std::sort(t, t + 3);
    CHECK(semigroup_error(s, gen.uniform(-2, 2), t[0], t[1], t[2], 100.0) <= 1e-7);
  }
}

TEST_CASE("property: invariant set over random schedules") {
  Gen gen(34);
  const double M = 1.0;
  const double T = 1.0;
  const Grid1D g(-3.0, 3.0, 600);
  const DensityGrid m0 = quartic_bump(g, 0.0, 0.5);
  const Interval s0 = support_of(m0);
  std::vector<ControlSchedule> schedules;
  for (int k = 0; k < 20; ++k) schedules.push_back(gen.schedule(0.0, T, M));
  const double bound = lp_norm(m0, Norm::W1Inf) * std::exp(2.0 * M * T);
  std::vector<DensityPair> pairs;
  for (int k = 0; k < 3; ++k) pairs.emplace_back(gen.bump(g, 1.5), gen.bump(g, 1.5));
  const auto rep =
      verify_invariant_set(m0, schedules, SupportTube(s0.lo, s0.hi, M), bound, {0.0, 0.25, 0.5, 1.0}, pairs);
  CHECK(rep.checks.size() == 80);
  CHECK(rep.all_contained());
  CHECK(rep.all_bounded());
  for (const auto& c : rep.checks) CHECK(c.mass_drift <= 1e-8);
  MESSAGE("max H1 stability ratio: " << rep.max_ratio);
  CHECK(std::isfinite(rep.max_ratio));
  CHECK(rep.max_ratio > 0.0);
}
