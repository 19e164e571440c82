#pragma once

#include <string>
#include <utility>
#include <vector>

#include "masschase/controls.hpp"
#include "masschase/grid.hpp"

namespace masschase {

struct GameSpec;

/// Terminal cost psi of the game.
class FinalCost {
 public:
  enum class Kind { Overlap, WindowDiffSquared, MeanDiffSquared };

  FinalCost() = default;
  static FinalCost overlap() { return FinalCost(Kind::Overlap, 0.0); }
  static FinalCost window_diff_squared(double delta);
  static FinalCost mean_diff_squared() { return FinalCost(Kind::MeanDiffSquared, 0.0); }

  Kind kind() const { return kind_; }
  double delta() const { return delta_; }
  std::string name() const;

  bool operator==(const FinalCost&) const = default;

 private:
  FinalCost(Kind kind, double delta) : kind_(kind), delta_(delta) {}
  Kind kind_ = Kind::MeanDiffSquared;
  double delta_ = 0.0;
};

/// Running cost l. ControlEffort charges the squared L2 norm of each field
/// over the support tube and does not depend on the densities.
class RunningCost {
 public:
  enum class Kind { Zero, ControlEffort };

  RunningCost() = default;
  static RunningCost zero() { return {}; }
  static RunningCost control_effort(double wX, double wY);

  Kind kind() const { return kind_; }
  double wX() const { return wX_; }
  double wY() const { return wY_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  std::string name() const;

  bool operator==(const RunningCost&) const = default;

 private:
  Kind kind_ = Kind::Zero;
  double wX_ = 0.0;
  double wY_ = 0.0;
};

/// Empirical modulus of continuity: (input distance, output distance) samples.
struct CostModulus {
  std::vector<std::pair<double, double>> samples;

  void add(double input_distance, double output_distance);
  /// Largest output distance among samples with input distance <= eps.
  double envelope(double eps) const;
  /// max output / input over samples with positive input.
  double lipschitz_estimate() const;
};

/// Integral of mX mY.
double psi1(const DensityGrid& mX, const DensityGrid& mY);

/// (mass of mY in mean(mX) +- delta  minus  mass of mX in mean(mY) +- delta)^2,
/// with mean the unnormalized first moment.
double psi2(const DensityGrid& mX, const DensityGrid& mY, double delta);

/// (mean(mX) - mean(mY))^2.
double psi3(const DensityGrid& mX, const DensityGrid& mY);

double final_cost(const FinalCost& fc, const DensityGrid& mX, const DensityGrid& mY);

/// Integral over `tube` of f^2; exact for constant fields.
double field_energy(const ControlField& f, const Interval& tube);

double running_cost(const RunningCost& rc, const DensityGrid& mX, const DensityGrid& mY, double t,
                    const ControlField& a, const ControlField& b, const Interval& tube);

/// Cost functional along the transported densities: trapezoid in time for the
/// running cost plus the final cost at T. Uses push_forward for sigma = 0 and
/// fokker_planck_solve otherwise.
double evaluate_J(const GameSpec& spec, const ControlSchedule& alpha, const ControlSchedule& beta,
                  int n_time_samples = 33);

}  // namespace masschase
