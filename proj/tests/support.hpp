#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "masschase/controls.hpp"
#include "masschase/grid.hpp"

namespace testing {

using namespace masschase;

/// Seeded source for the hand-rolled property generators.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// Quartic bump with its support kept `margin` away from the grid ends.
  DensityGrid bump(const Grid1D& g, double margin = 0.5) {
    const double r = uniform(0.15, 0.45);
    const double c = uniform(g.lo() + margin + r, g.hi() - margin - r);
    return quartic_bump(g, c, r, uniform(0.5, 1.5));
  }

  /// Sum of two bumps, so the shape is not a plain translate of the profile.
  DensityGrid two_bumps(const Grid1D& g, double margin = 0.5) {
    const DensityGrid a = bump(g, margin);
    const DensityGrid b = bump(g, margin);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
    return DensityGrid(g, v);
  }

  ControlField constant_field(double M) { return ControlField::constant(uniform(-M, M)); }

  /// Affine field with |slope| <= M, clipped at M.
  ControlField affine_field(double M) {
    return ControlField::affine(uniform(-M, M), uniform(-0.5 * M, 0.5 * M), M);
  }

  /// One to three pieces over [t0, t1], each a Constant or clipped Affine field.
  ControlSchedule schedule(double t0, double t1, double M) {
    const int pieces = integer(1, 3);
    std::vector<double> bp{t0};
    for (int k = 1; k < pieces; ++k) bp.push_back(t0 + (t1 - t0) * k / pieces);
    bp.push_back(t1);
    std::vector<ControlField> fields;
    for (int k = 0; k < pieces; ++k) fields.push_back(coin() ? constant_field(M) : affine_field(M));
    return ControlSchedule(bp, fields);
  }

 private:
  std::mt19937_64 rng_;
};

inline DensityGrid triangle(const Grid1D& g, double a, double peak_x, double b, double height) {
  return DensityGrid::from_function(g, [=](double x) {
    if (x <= a || x >= b) return 0.0;
    return x < peak_x ? height * (x - a) / (peak_x - a) : height * (b - x) / (b - peak_x);
  });
}

/// Composite midpoint rule with n points, the high-resolution oracle.
inline double midpoint_oracle(const std::function<double(double)>& f, double lo, double hi, int n = 1000000) {
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(lo + (i + 0.5) * h);
  return s * h;
}

inline double max_abs_diff(const DensityGrid& a, const DensityGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
