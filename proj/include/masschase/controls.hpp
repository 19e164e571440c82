#pragma once

#include <optional>
#include <string>
#include <vector>

#include "masschase/grid.hpp"

namespace masschase {

/// Velocity field on the real line, autonomous in time. All kinds are
/// piecewise linear in x, so the analytic derivative is always available.
class ControlField {
 public:
  enum class Kind { Constant, Affine, Scatter };

  static ControlField constant(double c);
  /// clamp(slope * x + intercept, -clip, clip); clip may be +infinity.
  static ControlField affine(double slope, double intercept, double clip);
  /// -c left of xi1, +c right of xi2, linear in between.
  static ControlField scatter(double xi1, double xi2, double c);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  std::string kind_name() const;

  double value(double x) const;
  /// Zero inside clipped regions; at a kink the right-hand derivative is used.
  double derivative(double x) const;

  /// Constant value; only meaningful for Kind::Constant.
  double speed() const { return a_; }
  double slope() const { return a_; }
  double intercept() const { return b_; }
  double clip() const { return c_; }
  double xi1() const { return a_; }
  double xi2() const { return b_; }
  double amplitude() const { return c_; }

  /// sup |f| over [lo, hi].
  double sup_norm(const Interval& on) const;
  /// sup |f'| over [lo, hi].
  double derivative_sup(const Interval& on) const;
  /// Points where f' jumps.
  std::vector<double> kinks() const;

  bool operator==(const ControlField& other) const = default;

 private:
  ControlField(Kind kind, double a, double b, double c) : kind_(kind), a_(a), b_(b), c_(c) {}

  Kind kind_;
  double a_;
  double b_;
  double c_;
};

struct FieldEval {
  double value = 0.0;
  std::optional<double> derivative;
};

FieldEval eval_field(const ControlField& f, double x, bool want_derivative);

/// One shared bound M for the sup norm, the H1 norm and the W^{1,inf} norm of
/// the divergence.
class AdmissibilityBounds {
 public:
  explicit AdmissibilityBounds(double M);
  double M() const { return M_; }

 private:
  double M_;
};

struct AdmissibilityReport {
  double sup_norm = 0.0;
  double h1_norm = 0.0;          // over the probed domain only
  double div_sup = 0.0;
  double div_lipschitz = 0.0;    // between probes not separated by a kink
  bool linf_ok = false;
  bool h1_ok = false;
  bool div_ok = false;           // div_sup + div_lipschitz <= M
  bool w2inf_deficient = false;  // field has kinks inside the domain

  /// L-infinity and divergence constraints. The H1 check is reported on its
  /// own: a nonzero constant field fails it on any domain longer than 1/M^2.
  bool passes() const { return linf_ok && div_ok; }
};

AdmissibilityReport validate_admissible(const ControlField& f, const AdmissibilityBounds& bounds,
                                        const Interval& domain, int n_probe);

/// Ordered, nonempty set of fields. Order is the tie-breaking order of every
/// min/max downstream.
class ControlDictionary {
 public:
  explicit ControlDictionary(std::vector<ControlField> fields);

  std::size_t size() const { return fields_.size(); }
  const ControlField& operator[](std::size_t i) const { return fields_[i]; }
  const ControlField& at(std::size_t i) const;
  const std::vector<ControlField>& fields() const { return fields_; }
  bool all_constant() const;
  /// max |c| over entries; all entries must be constant.
  double max_speed() const;
  /// max over entries of sup |f'|, the bound M used by the Hamiltonian gap check.
  double divergence_bound(const Interval& on) const;

  bool operator==(const ControlDictionary& other) const = default;

 private:
  std::vector<ControlField> fields_;
};

/// Piecewise-constant-in-time composition of fields. Interval i is
/// [breakpoints[i], breakpoints[i+1]); the last one is closed on the right.
class ControlSchedule {
 public:
  ControlSchedule(std::vector<double> breakpoints, std::vector<ControlField> fields);
  static ControlSchedule constant(const ControlField& f, double t0, double t1);

  struct Piece {
    double t0;
    double t1;
    const ControlField* field;
  };

  double t0() const { return breakpoints_.front(); }
  double t1() const { return breakpoints_.back(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<ControlField>& fields() const { return fields_; }

  const ControlField& field_at(double t) const;
  double value(double x, double t) const { return field_at(t).value(x); }
  double derivative(double x, double t) const { return field_at(t).derivative(x); }

  /// The parts of [from, to] cut at breakpoints, in increasing time order.
  std::vector<Piece> pieces(double from, double to) const;

  /// sup over time of the fields' sup norm on `on`.
  double sup_norm(const Interval& on) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<ControlField> fields_;
};

ControlSchedule schedule_from_sequence(const std::vector<double>& times, const std::vector<std::size_t>& indices,
                                       const ControlDictionary& dictionary);

/// [-c, 0, +c], plus Scatter(xi1, xi2, c) last when requested.
ControlDictionary standard_dictionary(double c, bool include_scatter = false, double xi1 = 0.0, double xi2 = 1.0);

}  // namespace masschase
