#include "masschase/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "masschase/error.hpp"
#include "masschase/io.hpp"

namespace masschase {

Grid1D::Grid1D(double lo, double hi, int n_cells) : lo_(lo), hi_(hi), n_cells_(n_cells) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(hi > lo)) {
    throw InvalidArgument("grid: need finite lo < hi");
  }
  if (n_cells < 2 || n_cells % 2 != 0) {
    throw InvalidArgument("grid: n_cells must be even and >= 2, got " + std::to_string(n_cells));
  }
  dx_ = (hi - lo) / n_cells;
  if (!(dx_ > 0.0) || !std::isfinite(dx_)) throw InvalidArgument("grid: degenerate spacing");
}

bool Grid1D::operator==(const Grid1D& other) const {
  return lo_ == other.lo_ && hi_ == other.hi_ && n_cells_ == other.n_cells_;
}

namespace {

void check_density(const Grid1D& grid, const std::vector<double>& values) {
  if (values.size() != grid.n_nodes()) {
    throw InvalidArgument("density: expected " + std::to_string(grid.n_nodes()) + " node values, got " +
                          std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("density: values must be finite and >= 0");
  }
  if (values.front() != 0.0 || values.back() != 0.0) {
    throw InvalidArgument("density: endpoint nodes must be exactly 0");
  }
}

}  // namespace

DensityGrid::DensityGrid(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  check_density(grid_, values_);
}

DensityGrid::DensityGrid(double lo, double hi, std::vector<double> values)
    : grid_(lo, hi, static_cast<int>(values.size()) - 1), values_(std::move(values)) {
  check_density(grid_, values_);
}

DensityGrid DensityGrid::from_function(const Grid1D& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_nodes());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = f(grid.x(i));
  return DensityGrid(grid, std::move(v));
}

DensityGrid DensityGrid::zero(const Grid1D& grid) { return DensityGrid(grid, std::vector<double>(grid.n_nodes())); }

GradientGrid::GradientGrid(Grid1D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_nodes()) throw InvalidArgument("gradient grid: size does not match grid");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("gradient grid: values must be finite");
  }
}

GradientGrid GradientGrid::from_function(const Grid1D& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.x(i));
  return GradientGrid(grid, std::move(v));
}

GradientGrid GradientGrid::from_density(const DensityGrid& m) {
  return GradientGrid(m.grid(), std::vector<double>(m.values().begin(), m.values().end()));
}

GradientGrid GradientGrid::difference(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("difference: grids differ");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return GradientGrid(a.grid(), std::move(v));
}

GradientGrid GradientGrid::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return GradientGrid(grid_, std::move(v));
}

double integrate(const Grid1D& grid, std::span<const double> values) {
  const std::size_t n = values.size();
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (i % 2 == 1) {
      odd += values[i];
    } else {
      even += values[i];
    }
  }
  return grid.dx() / 3.0 * (values.front() + values.back() + 4.0 * odd + 2.0 * even);
}

std::vector<double> centered_difference(const Grid1D& grid, std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> d(n);
  const double h = grid.dx();
  d.front() = (values[1] - values[0]) / h;
  d.back() = (values[n - 1] - values[n - 2]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
  return d;
}

std::vector<double> second_difference(const Grid1D& grid, std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> d(n, 0.0);
  const double h2 = grid.dx() * grid.dx();
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
  return d;
}

double total_mass(const DensityGrid& m) { return integrate(m.grid(), m.values()); }

double mean(const DensityGrid& m) {
  const double mass = total_mass(m);
  if (mass == 0.0) throw ZeroMass("mean: density has zero mass");
  std::vector<double> xm(m.size());
  for (std::size_t i = 0; i < xm.size(); ++i) xm[i] = m.grid().x(i) * m[i];
  return integrate(m.grid(), xm);
}

double centroid(const DensityGrid& m) { return mean(m) / total_mass(m); }

double lp_norm(const Grid1D& grid, std::span<const double> values, Norm which) {
  auto squared_integral = [&](std::span<const double> v) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    return std::max(0.0, integrate(grid, sq));
  };
  switch (which) {
    case Norm::L2:
      return std::sqrt(squared_integral(values));
    case Norm::H1Seminorm:
      return std::sqrt(squared_integral(centered_difference(grid, values)));
    case Norm::H1: {
      const auto d = centered_difference(grid, values);
      return std::sqrt(squared_integral(values) + squared_integral(d));
    }
    case Norm::W1Inf: {
      const auto d = centered_difference(grid, values);
      double vmax = 0.0;
      double dmax = 0.0;
      for (double v : values) vmax = std::max(vmax, std::abs(v));
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      return vmax + dmax;
    }
  }
  return 0.0;
}

double lp_norm(const DensityGrid& m, Norm which) { return lp_norm(m.grid(), m.values(), which); }
double lp_norm(const GradientGrid& g, Norm which) { return lp_norm(g.grid(), g.values(), which); }

namespace {

double interpolate(const Grid1D& grid, std::span<const double> values, double x) {
  if (!(x >= grid.lo() && x <= grid.hi())) return 0.0;
  const double pos = (x - grid.lo()) / grid.dx();
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) <= 1e-9) return values[static_cast<std::size_t>(nearest)];
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i >= values.size() - 1) return values.back();
  const double w = pos - static_cast<double>(i);
  if (w == 0.0) return values[i];
  return (1.0 - w) * values[i] + w * values[i + 1];
}

}  // namespace

double sample_at(const DensityGrid& m, double x) { return interpolate(m.grid(), m.values(), x); }
double sample_at(const GradientGrid& g, double x) { return interpolate(g.grid(), g.values(), x); }

double integrate_window(const DensityGrid& m, double a, double b) {
  const Grid1D& g = m.grid();
  a = std::max(a, g.lo());
  b = std::min(b, g.hi());
  if (!(b > a)) return 0.0;
  const double h = g.dx();
  auto cell_of = [&](double x) {
    auto i = static_cast<std::size_t>(std::floor((x - g.lo()) / h));
    return std::min<std::size_t>(i, static_cast<std::size_t>(g.n_cells()) - 1);
  };
  // Exact integral of the linear interpolant over [u, v] inside one cell.
  auto cell_part = [&](double u, double v) {
    return 0.5 * (v - u) * (sample_at(m, u) + sample_at(m, v));
  };
  const std::size_t ia = cell_of(a);
  const std::size_t ib = cell_of(b);
  if (ia == ib) return cell_part(a, b);
  double total = cell_part(a, g.x(ia + 1));
  for (std::size_t i = ia + 1; i < ib; ++i) total += 0.5 * h * (m[i] + m[i + 1]);
  total += cell_part(g.x(ib), b);
  return total;
}

Interval support_of(const DensityGrid& m) {
  const auto v = m.values();
  std::size_t first = v.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == v.size()) return {0.0, 0.0};
  return {m.grid().x(first - 1), m.grid().x(last + 1)};
}

DensityGrid translate(const DensityGrid& m, double h) {
  if (h == 0.0) return m;
  std::vector<double> v(m.size(), 0.0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = sample_at(m, m.grid().x(i) - h);
  return DensityGrid(m.grid(), std::move(v));
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("l1_distance: grids differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return integrate(a.grid(), d);
}

DensityGrid quartic_bump(const Grid1D& grid, double center, double radius, double mass) {
  if (!(radius > 0.0)) throw InvalidArgument("quartic_bump: radius must be positive");
  auto shape = DensityGrid::from_function(grid, [&](double x) {
    const double u = (x - center) / radius;
    return std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
  });
  const double raw = total_mass(shape);
  if (raw == 0.0) throw ZeroMass("quartic_bump: bump does not cover any interior node");
  std::vector<double> v(shape.values().begin(), shape.values().end());
  for (double& x : v) x *= mass / raw;
  return DensityGrid(grid, std::move(v));
}

void write_csv(std::ostream& os, const DensityGrid& m) {
  os << "x,value\n";
  for (std::size_t i = 0; i < m.size(); ++i) os << format_full(m.grid().x(i)) << ',' << format_full(m[i]) << '\n';
}

DensityGrid read_density_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,value", 0) != 0) {
    throw InvalidArgument("density csv: missing `x,value` header");
  }
  std::vector<double> xs;
  std::vector<double> vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0.0;
    double v = 0.0;
    char comma = 0;
    if (!(row >> x >> comma >> v) || comma != ',') throw InvalidArgument("density csv: malformed row `" + line + "`");
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 3) throw InvalidArgument("density csv: need at least 3 nodes");
  const Grid1D grid(xs.front(), xs.back(), static_cast<int>(xs.size()) - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - grid.x(i)) > 1e-9 * std::max(1.0, grid.hi() - grid.lo())) {
      throw InvalidArgument("density csv: nodes are not uniformly spaced");
    }
  }
  return DensityGrid(grid, std::move(vs));
}

}  // namespace masschase
