#include "masschase/controls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "masschase/error.hpp"

namespace masschase {

ControlField ControlField::constant(double c) {
  if (!std::isfinite(c)) throw InvalidArgument("constant field: value must be finite");
  return ControlField(Kind::Constant, c, 0.0, std::abs(c));
}

ControlField ControlField::affine(double slope, double intercept, double clip) {
  if (!std::isfinite(slope) || !std::isfinite(intercept)) throw InvalidArgument("affine field: non-finite coefficients");
  if (!(clip > 0.0)) throw InvalidArgument("affine field: clip must be positive");
  return ControlField(Kind::Affine, slope, intercept, clip);
}

ControlField ControlField::scatter(double xi1, double xi2, double c) {
  if (!(xi1 < xi2)) throw InvalidArgument("scatter field: requires xi1 < xi2");
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("scatter field: amplitude must be finite and >= 0");
  return ControlField(Kind::Scatter, xi1, xi2, c);
}

std::string ControlField::kind_name() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant";
    case Kind::Affine:
      return "affine";
    case Kind::Scatter:
      return "scatter";
  }
  return "?";
}

double ControlField::value(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Affine:
      return std::clamp(a_ * x + b_, -c_, c_);
    case Kind::Scatter:
      if (x <= a_) return -c_;
      if (x >= b_) return c_;
      return -c_ + 2.0 * c_ * (x - a_) / (b_ - a_);
  }
  return 0.0;
}

double ControlField::derivative(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Affine: {
      const double raw = a_ * x + b_;
      if (std::abs(raw) < c_) return a_;
      if (std::abs(raw) > c_) return 0.0;
      // On the clip boundary: inside to the right iff the raw value heads back in.
      if (raw == c_) return a_ < 0.0 ? a_ : 0.0;
      return a_ > 0.0 ? a_ : 0.0;
    }
    case Kind::Scatter:
      return (x >= a_ && x < b_) ? 2.0 * c_ / (b_ - a_) : 0.0;
  }
  return 0.0;
}

double ControlField::sup_norm(const Interval& on) const {
  switch (kind_) {
    case Kind::Constant:
      return std::abs(a_);
    case Kind::Affine:
      return std::max(std::abs(value(on.lo)), std::abs(value(on.hi)));
    case Kind::Scatter:
      return std::max(std::abs(value(on.lo)), std::abs(value(on.hi)));
  }
  return 0.0;
}

double ControlField::derivative_sup(const Interval& on) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Affine: {
      if (a_ == 0.0) return 0.0;
      // Unclipped set is the open interval where |a x + b| < c.
      const double ends[2] = {(-c_ - b_) / a_, (c_ - b_) / a_};
      const double u = std::min(ends[0], ends[1]);
      const double v = std::max(ends[0], ends[1]);
      return (v > on.lo && u < on.hi) ? std::abs(a_) : 0.0;
    }
    case Kind::Scatter:
      return (b_ > on.lo && a_ < on.hi) ? 2.0 * c_ / (b_ - a_) : 0.0;
  }
  return 0.0;
}

std::vector<double> ControlField::kinks() const {
  switch (kind_) {
    case Kind::Constant:
      return {};
    case Kind::Affine: {
      if (a_ == 0.0 || !std::isfinite(c_)) return {};
      std::vector<double> k = {(-c_ - b_) / a_, (c_ - b_) / a_};
      std::sort(k.begin(), k.end());
      return k;
    }
    case Kind::Scatter:
      return {a_, b_};
  }
  return {};
}

FieldEval eval_field(const ControlField& f, double x, bool want_derivative) {
  FieldEval out;
  out.value = f.value(x);
  if (want_derivative) out.derivative = f.derivative(x);
  return out;
}

AdmissibilityBounds::AdmissibilityBounds(double M) : M_(M) {
  if (!(M > 0.0) || !std::isfinite(M)) throw InvalidArgument("admissibility bound M must be finite and > 0");
}

AdmissibilityReport validate_admissible(const ControlField& f, const AdmissibilityBounds& bounds,
                                        const Interval& domain, int n_probe) {
  if (n_probe < 2) throw InvalidArgument("validate_admissible: n_probe must be >= 2");
  if (!(domain.hi > domain.lo)) throw InvalidArgument("validate_admissible: empty domain");
  const auto n = static_cast<std::size_t>(n_probe);
  const double h = domain.length() / static_cast<double>(n - 1);
  std::vector<double> xs(n), v(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = domain.lo + static_cast<double>(i) * h;
    v[i] = f.value(xs[i]);
    d[i] = f.derivative(xs[i]);
  }

  AdmissibilityReport r;
  double l2 = 0.0;
  double h1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.sup_norm = std::max(r.sup_norm, std::abs(v[i]));
    r.div_sup = std::max(r.div_sup, std::abs(d[i]));
    const double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    l2 += w * v[i] * v[i];
    h1 += w * d[i] * d[i];
  }
  r.h1_norm = std::sqrt(l2 + h1);

  const auto kinks = f.kinks();
  for (double k : kinks) {
    if (k > domain.lo && k < domain.hi) r.w2inf_deficient = true;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool straddles = std::any_of(kinks.begin(), kinks.end(), [&](double k) { return k >= xs[i] && k <= xs[i + 1]; });
    if (straddles) continue;
    r.div_lipschitz = std::max(r.div_lipschitz, std::abs(d[i + 1] - d[i]) / h);
  }

  const double M = bounds.M();
  constexpr double slack = 1e-12;
  r.linf_ok = r.sup_norm <= M * (1.0 + slack);
  r.h1_ok = r.h1_norm <= M * (1.0 + slack);
  r.div_ok = r.div_sup + r.div_lipschitz <= M * (1.0 + slack);
  return r;
}

ControlDictionary::ControlDictionary(std::vector<ControlField> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw InvalidArgument("control dictionary must be nonempty");
}

const ControlField& ControlDictionary::at(std::size_t i) const {
  if (i >= fields_.size()) {
    throw IndexOutOfRange("dictionary index " + std::to_string(i) + " out of range (size " +
                          std::to_string(fields_.size()) + ")");
  }
  return fields_[i];
}

bool ControlDictionary::all_constant() const {
  return std::all_of(fields_.begin(), fields_.end(), [](const ControlField& f) { return f.is_constant(); });
}

double ControlDictionary::max_speed() const {
  if (!all_constant()) throw NotReduced("max_speed: dictionary contains non-constant fields");
  double c = 0.0;
  for (const auto& f : fields_) c = std::max(c, std::abs(f.speed()));
  return c;
}

double ControlDictionary::divergence_bound(const Interval& on) const {
  double m = 0.0;
  for (const auto& f : fields_) m = std::max(m, f.derivative_sup(on));
  return m;
}

ControlSchedule::ControlSchedule(std::vector<double> breakpoints, std::vector<ControlField> fields)
    : breakpoints_(std::move(breakpoints)), fields_(std::move(fields)) {
  if (breakpoints_.size() < 2) throw InvalidArgument("schedule: need at least two breakpoints");
  if (fields_.size() + 1 != breakpoints_.size()) throw InvalidArgument("schedule: need one field per interval");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] < breakpoints_[i + 1])) throw InvalidArgument("schedule: breakpoints must increase strictly");
  }
}

ControlSchedule ControlSchedule::constant(const ControlField& f, double t0, double t1) {
  return ControlSchedule({t0, t1}, {f});
}

const ControlField& ControlSchedule::field_at(double t) const {
  // Right-continuous: the interval whose left end is the last breakpoint <= t.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t i = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return fields_[std::min(i, fields_.size() - 1)];
}

std::vector<ControlSchedule::Piece> ControlSchedule::pieces(double from, double to) const {
  std::vector<Piece> out;
  if (!(to > from)) return out;
  double cursor = from;
  while (cursor < to) {
    const ControlField& f = field_at(cursor);
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), cursor);
    double next = to;
    // Breakpoints past the last interval keep the final field.
    if (it != breakpoints_.end() && std::next(it) != breakpoints_.end()) next = std::min(to, *it);
    out.push_back({cursor, next, &f});
    cursor = next;
  }
  return out;
}

double ControlSchedule::sup_norm(const Interval& on) const {
  double s = 0.0;
  for (const auto& f : fields_) s = std::max(s, f.sup_norm(on));
  return s;
}

ControlSchedule schedule_from_sequence(const std::vector<double>& times, const std::vector<std::size_t>& indices,
                                       const ControlDictionary& dictionary) {
  if (times.size() != indices.size() + 1) {
    throw InvalidArgument("schedule_from_sequence: need len(indices) == len(times) - 1");
  }
  std::vector<ControlField> fields;
  fields.reserve(indices.size());
  for (std::size_t idx : indices) fields.push_back(dictionary.at(idx));
  return ControlSchedule(times, std::move(fields));
}

ControlDictionary standard_dictionary(double c, bool include_scatter, double xi1, double xi2) {
  if (!(c > 0.0)) throw InvalidArgument("standard_dictionary: c must be positive");
  std::vector<ControlField> f = {ControlField::constant(-c), ControlField::constant(0.0), ControlField::constant(c)};
  if (include_scatter) f.push_back(ControlField::scatter(xi1, xi2, c));
  return ControlDictionary(std::move(f));
}

}  // namespace masschase
