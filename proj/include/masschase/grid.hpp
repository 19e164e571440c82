#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace masschase {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(const Interval& other, double tol = 0.0) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }
};

/// Uniform node-centered layout: n_cells + 1 nodes from lo to hi inclusive.
/// n_cells is even so composite Simpson applies to the whole grid.
class Grid1D {
 public:
  Grid1D() = default;
  Grid1D(double lo, double hi, int n_cells);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int n_cells() const { return n_cells_; }
  std::size_t n_nodes() const { return static_cast<std::size_t>(n_cells_) + 1; }
  double dx() const { return dx_; }
  double x(std::size_t i) const { return lo_ + static_cast<double>(i) * dx_; }
  Interval domain() const { return {lo_, hi_}; }

  bool operator==(const Grid1D& other) const;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  int n_cells_ = 2;
  double dx_ = 0.5;
};

/// Nonnegative mass density sampled at the nodes of a Grid1D. Endpoint nodes
/// are exactly zero: the density is extended by zero outside the domain.
class DensityGrid {
 public:
  DensityGrid() : DensityGrid(Grid1D{}, std::vector<double>(3, 0.0)) {}
  DensityGrid(Grid1D grid, std::vector<double> values);
  DensityGrid(double lo, double hi, std::vector<double> values);

  /// Samples f at every node; the endpoint nodes are forced to zero.
  static DensityGrid from_function(const Grid1D& grid, const std::function<double(double)>& f);
  static DensityGrid zero(const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double lo() const { return grid_.lo(); }
  double hi() const { return grid_.hi(); }
  double dx() const { return grid_.dx(); }
  int n_cells() const { return grid_.n_cells(); }
  std::size_t size() const { return values_.size(); }

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// Signed grid function (Frechet differentials, density differences).
class GradientGrid {
 public:
  GradientGrid() : GradientGrid(Grid1D{}, std::vector<double>(3, 0.0)) {}
  GradientGrid(Grid1D grid, std::vector<double> values);

  static GradientGrid from_function(const Grid1D& grid, const std::function<double(double)>& f);
  static GradientGrid from_density(const DensityGrid& m);
  /// a - b on a shared grid.
  static GradientGrid difference(const DensityGrid& a, const DensityGrid& b);

  const Grid1D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  GradientGrid scaled(double factor) const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

enum class Norm { L2, H1Seminorm, H1, W1Inf };

/// Composite Simpson on node samples of `grid`.
double integrate(const Grid1D& grid, std::span<const double> values);

/// Centered differences, one-sided at the two endpoints.
std::vector<double> centered_difference(const Grid1D& grid, std::span<const double> values);

/// Three-point second difference; zero at the endpoints.
std::vector<double> second_difference(const Grid1D& grid, std::span<const double> values);

double total_mass(const DensityGrid& m);

/// Unnormalized first moment, the integral of x m(x).
double mean(const DensityGrid& m);

/// First moment divided by the mass.
double centroid(const DensityGrid& m);

double lp_norm(const DensityGrid& m, Norm which);
double lp_norm(const GradientGrid& g, Norm which);
double lp_norm(const Grid1D& grid, std::span<const double> values, Norm which);

/// Linear interpolation between nodes; zero outside [lo, hi].
double sample_at(const DensityGrid& m, double x);
double sample_at(const GradientGrid& g, double x);

/// Integral over [a, b] of the piecewise-linear interpolant, with the partial
/// end cells integrated exactly.
double integrate_window(const DensityGrid& m, double a, double b);

/// Closed support of the interpolant, [x_{i-1}, x_{j+1}] for the first and last
/// positive nodes i, j. Returns an empty interval {0, 0} for the zero density.
Interval support_of(const DensityGrid& m);

/// Rigid shift by h, resampled onto the same grid.
DensityGrid translate(const DensityGrid& m, double h);

double l1_distance(const DensityGrid& a, const DensityGrid& b);

/// (1 - (x - center)^2 / radius^2)^2 on |x - center| < radius, normalized to
/// `mass` by the grid's own quadrature.
DensityGrid quartic_bump(const Grid1D& grid, double center, double radius, double mass = 1.0);

/// Header `x,value`, one row per node, 17 significant digits.
void write_csv(std::ostream& os, const DensityGrid& m);
DensityGrid read_density_csv(std::istream& is);

}  // namespace masschase
