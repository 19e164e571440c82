#pragma once

#include <memory>
#include <vector>

#include "json.hpp"

#include "masschase/controls.hpp"
#include "masschase/cost.hpp"
#include "masschase/game.hpp"
#include "masschase/grid.hpp"

namespace masschase {

enum class PairingForm {
  /// -int f m p' dx + sigma int m' p' dx, derivatives by a summation-by-parts
  /// difference matched to the Simpson weights.
  IntegrationByParts,
  /// int p (f' m + f m') dx - sigma int m'' p dx with the analytic f' and centered differences.
  Direct,
};

/// <p, div(f m)> plus, for sigma > 0, the diffusion pairing <p, -sigma m''>.
/// Requires m to vanish at the grid boundary (guaranteed by DensityGrid).
double transport_pairing(const GradientGrid& p, const ControlField& f, const DensityGrid& m, double sigma,
                         PairingForm form = PairingForm::IntegrationByParts);

struct HamiltonianResult {
  double value = 0.0;
  std::size_t argmin_b = 0;
  /// For every b, the maximizing a.
  std::vector<std::size_t> argmax_a_per_b;
  /// matrix[b][a]: pairing of a against mX plus pairing of b against mY minus l.
  std::vector<std::vector<double>> matrix;
};

/// min over dictB of max over dictA, ties toward the lowest index.
HamiltonianResult hamiltonian_minmax(const DensityGrid& mX, const DensityGrid& mY, double t, const GradientGrid& p,
                                     const GradientGrid& q, const ControlDictionary& dictA,
                                     const ControlDictionary& dictB, const RunningCost& rc, double sigma);

nlohmann::json to_json(const HamiltonianResult& r);

/// Value, time derivative and Frechet differentials of a candidate value
/// function at one state.
struct CandidateEval {
  double V = 0.0;
  double V_t = 0.0;
  GradientGrid DX;
  GradientGrid DY;
};

class CandidateValue {
 public:
  enum class Kind { Psi3Analytic, Psi1Analytic, Tabulated };

  /// (mean mX - mean mY)^2: DX = 2 (muX - muY) x, DY = -DX.
  static CandidateValue psi3_analytic();
  /// int mX mY: DX = mY, DY = mX.
  static CandidateValue psi1_analytic();
  /// Backed by a solved reduced table. The state is mapped to offsets through
  /// the centroid shift from the game's initial densities; derivatives come
  /// from finite differences of the lower value.
  static CandidateValue tabulated(std::shared_ptr<const ValueTable> table, std::shared_ptr<const GameSpec> spec);

  Kind kind() const { return kind_; }
  CandidateEval evaluate(const DensityGrid& mX, const DensityGrid& mY, double t) const;

 private:
  explicit CandidateValue(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::shared_ptr<const ValueTable> table_;
  std::shared_ptr<const GameSpec> spec_;
};

/// -V_t + H(mX, mY, t, DX V, DY V).
double isaacs_residual(const CandidateValue& candidate, const DensityGrid& mX, const DensityGrid& mY, double t,
                       const ControlDictionary& dictA, const ControlDictionary& dictB, const RunningCost& rc,
                       double sigma);

struct ContinuityGap {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// |H(m1, p, q) - H(m2, p, q)| with p = 2 (m1X - m2X) / zeta^2 and
/// q = 2 (m1Y - m2Y) / xi^2, against
/// M_bound (|m1X - m2X|^2 / zeta^2 + |m1Y - m2Y|^2 / xi^2). The running-cost
/// modulus term is zero for both running costs (neither depends on the densities).
ContinuityGap continuity_gap_check(const DensityGrid& m1X, const DensityGrid& m1Y, double t1, const DensityGrid& m2X,
                                   const DensityGrid& m2Y, double t2, double zeta, double xi,
                                   const ControlDictionary& dictA, const ControlDictionary& dictB,
                                   const RunningCost& rc, double M_bound);

}  // namespace masschase
