#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "masschase/game_spec.hpp"

namespace masschase {

/// Uniform offset axis centered on zero: value(i) = (i - half_cells) * spacing.
struct OffsetAxis {
  double spacing = 1.0;
  int half_cells = 0;

  int size() const { return 2 * half_cells + 1; }
  double value(int i) const { return (i - half_cells) * spacing; }
};

/// Why a table cell carries no value.
enum class CellStatus : std::uint8_t { Valid = 0, OutsideBox = 1, OutsideDomain = 2 };

/// Lower and upper values over (level, hX, hY), with hX, hY the rigid
/// translation offsets of the two initial densities.
class ValueTable {
 public:
  ValueTable(OffsetAxis x, OffsetAxis y, std::vector<double> times);

  const OffsetAxis& axis_x() const { return ax_; }
  const OffsetAxis& axis_y() const { return ay_; }
  const std::vector<double>& times() const { return times_; }
  int n_levels() const { return static_cast<int>(times_.size()); }
  int origin_x() const { return ax_.half_cells; }
  int origin_y() const { return ay_.half_cells; }

  double lower(int k, int i, int j) const { return lower_[index(k, i, j)]; }
  double upper(int k, int i, int j) const { return upper_[index(k, i, j)]; }
  CellStatus status(int k, int i, int j) const { return status_[index(k, i, j)]; }
  bool valid(int k, int i, int j) const { return status(k, i, j) == CellStatus::Valid; }

  void set(int k, int i, int j, double lower, double upper, CellStatus s = CellStatus::Valid);
  void set_status(int k, int i, int j, CellStatus s) { status_[index(k, i, j)] = s; }

  struct Sample {
    double value = 0.0;
    CellStatus status = CellStatus::Valid;
  };

  /// Bilinear interpolation at level k. Offsets within 1e-9 cells of a node
  /// snap to it, so grid-exact advances touch a single cell.
  Sample interpolate_lower(int k, double hX, double hY) const;
  Sample interpolate_upper(int k, double hX, double hY) const;

  double lower_origin(int k = 0) const { return lower(k, origin_x(), origin_y()); }
  double upper_origin(int k = 0) const { return upper(k, origin_x(), origin_y()); }

 private:
  std::size_t index(int k, int i, int j) const {
    return (static_cast<std::size_t>(k) * ax_.size() + static_cast<std::size_t>(i)) * ay_.size() +
           static_cast<std::size_t>(j);
  }
  Sample interpolate(const std::vector<double>& layer, int k, double hX, double hY) const;

  OffsetAxis ax_;
  OffsetAxis ay_;
  std::vector<double> times_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<CellStatus> status_;
};

/// Per level and cell: the maximizer's choice b and the minimizer's reply a
/// from the lower recursion. -1 marks cells without a value.
struct FeedbackStrategy {
  OffsetAxis x;
  OffsetAxis y;
  int n_levels = 0;  // decision levels, n_steps
  std::vector<int> a_index;
  std::vector<int> b_index;

  int a_at(int k, int i, int j) const { return a_index[flat(k, i, j)]; }
  int b_at(int k, int i, int j) const { return b_index[flat(k, i, j)]; }
  std::size_t flat(int k, int i, int j) const {
    return (static_cast<std::size_t>(k) * x.size() + static_cast<std::size_t>(i)) * y.size() +
           static_cast<std::size_t>(j);
  }
};

/// Offsets after one step of the constant fields a_index / b_index.
std::pair<double, double> advance_reduced(double hX, double hY, std::size_t a_index, std::size_t b_index,
                                          const GameSpec& spec, double dt);

/// Empty table with the axes and time levels solve_values would use.
ValueTable value_table_layout(const GameSpec& spec);

/// Backward min-max recursion on the offset grid:
///   lower_k(h) = max_b min_a [dt l + lower_{k+1}(h + (a, b) dt)]
///   upper_k(h) = min_a max_b [dt l + upper_{k+1}(h + (a, b) dt)]
/// with the final level psi on the translated densities. Throws BoxOverflow /
/// TubeOverflow when the origin's reachable set leaves the box / the domain.
ValueTable solve_values(const GameSpec& spec);

FeedbackStrategy extract_feedback(const ValueTable& table, const GameSpec& spec);

/// Exact game tree over all dictionary index sequences (no interpolation).
/// Returns (lower, upper) at the origin.
std::pair<double, double> brute_force_value(const GameSpec& spec, int max_steps = 4);

/// max over valued cells at level k of |lower_k - max_b min_a [...]|.
double dpp_residual(const ValueTable& table, const GameSpec& spec, int k);

struct PlayResult {
  std::vector<std::pair<double, double>> offsets;  // n_steps + 1 states
  std::vector<std::size_t> a_indices;
  std::vector<std::size_t> b_indices;
  double realized_J = 0.0;
};

/// Forward play from the origin: the maximizer takes the argmax b of the lower
/// recursion, the minimizer answers with its argmin a. The realized cost is
/// evaluate_J on the induced schedules.
PlayResult simulate_play(const GameSpec& spec, const ValueTable& table);

/// `level,time,hX,hY,lower,upper`, valued cells only.
void write_value_table_csv(std::ostream& os, const ValueTable& table);
/// `level,hX,hY,a_index,b_index`, valued cells only.
void write_strategy_csv(std::ostream& os, const FeedbackStrategy& strategy);

}  // namespace masschase
