#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "masschase/controls.hpp"
#include "masschase/cost.hpp"
#include "masschase/grid.hpp"

namespace masschase {

enum class Relation {
  Within,          // |computed - reference| <= tolerance
  WithinRelative,  // |computed - reference| <= tolerance * |reference|
  AtMost,          // computed <= reference + tolerance
  AtLeast,         // computed >= reference - tolerance
  Below,           // computed < reference - tolerance
};

std::string relation_name(Relation r);

/// Where a reference value comes from.
inline constexpr const char* kClosedForm = "closed_form";
inline constexpr const char* kQuadratureOracle = "quadrature_oracle";
inline constexpr const char* kExactIdentity = "exact_identity";
inline constexpr const char* kSimulation = "simulation";
inline constexpr const char* kDiscretizationBound = "discretization_bound";

bool is_known_source(const std::string& source);

struct Check {
  std::string name;
  double computed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::Within;
  std::string source;
  bool passed = false;
};

bool evaluate_relation(Relation r, double computed, double reference, double tolerance);

struct ScenarioOptions {
  /// Replaces every check tolerance when set.
  std::optional<double> tolerance_override;
  std::uint64_t seed = 1;
};

struct ScenarioReport {
  std::string name;
  std::vector<Check> checks;
  /// Measured quantities that are reported but not asserted.
  std::vector<std::pair<std::string, double>> values;
  double runtime_seconds = 0.0;

  void add_check(std::string check_name, double computed, double reference, double tolerance, Relation relation,
                 std::string source, const ScenarioOptions& options);
  void add_value(std::string key, double v) { values.emplace_back(std::move(key), v); }
  bool passed() const;
  std::size_t n_passed() const;
};

/// Throws InvalidArgument when a check has an empty or unknown source.
void validate_report(const ScenarioReport& report);

/// Runtime goes into a `meta` block so the rest is reproducible.
nlohmann::json to_json(const ScenarioReport& report);
std::string to_text(const ScenarioReport& report);

/// Portable uniform draws, so reports do not depend on the standard library's
/// distribution implementations.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();
  double next(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::uint64_t state_;
};

struct Psi3Params {
  double c = 1.0;
  double muX = 0.0;
  double muY = 1.0;
  double T = 0.5;
  int n_steps = 32;
  int n_cells = 512;
  double radius = 0.25;
  int n_random_states = 50;
};

ScenarioReport run_example_psi3(const Psi3Params& p, const ScenarioOptions& options = {});

struct Psi1Params {
  double c = 1.0;
  double T = 0.5;
  int n_steps = 32;
  DensityGrid mX0;
  DensityGrid mY0;
  int n_random_states = 50;
};

/// Two overlapping quartic bumps on a grid wide enough for the reachable shifts.
Psi1Params default_psi1_params();

ScenarioReport run_example_psi1(const Psi1Params& p, const ScenarioOptions& options = {});

struct AntelopeLionParams {
  double c = 1.0;
  double antelope_center = 0.0;
  double antelope_radius = 1.0;
  double lion_center = 0.0;
  double lion_radius = 0.3;
  double T = 0.5;
  int n_steps = 16;
  int n_cells = 512;
};

ScenarioReport run_antelope_lion(const AntelopeLionParams& p, const ScenarioOptions& options = {});

struct ViscositySweepParams {
  DensityGrid mX0;
  DensityGrid mY0;
  ControlSchedule alpha = ControlSchedule::constant(ControlField::constant(0.0), 0.0, 0.5);
  ControlSchedule beta = ControlSchedule::constant(ControlField::constant(0.0), 0.0, 0.5);
  double t0 = 0.0;
  double T = 0.5;
  FinalCost fc = FinalCost::overlap();
  /// Descending; a trailing 0 is implied when absent.
  std::vector<double> sigmas{0.1, 0.03, 0.01, 0.003};
  /// 0 selects the smallest step count satisfying the CFL limits of the largest sigma.
  int fp_steps = 0;
};

/// Overlapping bumps under constant fields, psi1 cost.
ViscositySweepParams default_viscosity_params();

struct SweepRow {
  double sigma = 0.0;
  double J = 0.0;
  double gap = 0.0;
};

/// J under fokker_planck_solve for each sigma plus sigma = 0, with the gaps
/// |J_sigma - J_0|. Throws CflViolation when fp_steps is too small.
std::vector<SweepRow> viscosity_sweep(const ViscositySweepParams& p);

ScenarioReport run_viscosity_sweep(const ViscositySweepParams& p, const ScenarioOptions& options = {});

/// Pairing, Hamiltonian and continuity-gap properties on seeded random states.
ScenarioReport run_hamiltonian_suite(const ScenarioOptions& options = {});

}  // namespace masschase
