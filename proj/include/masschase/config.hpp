#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "masschase/controls.hpp"
#include "masschase/cost.hpp"
#include "masschase/game_spec.hpp"
#include "masschase/grid.hpp"

namespace masschase {

struct DensitySource {
  std::optional<std::filesystem::path> csv;
  double center = 0.0;
  double radius = 0.25;
  double mass = 1.0;
};

/// Either one field over [t0, T] or explicit breakpoints with one field per piece.
struct ScheduleConfig {
  std::vector<double> breakpoints;
  std::vector<ControlField> fields;
};

/// Parsed and schema-checked scenario file. Every key is optional; each
/// command checks that the keys it needs are present.
struct ScenarioConfig {
  std::optional<Interval> domain;
  int n_cells = 512;
  double T = 1.0;
  double t0 = 0.0;
  int n_steps = 16;
  std::optional<DensitySource> density_x;
  std::optional<DensitySource> density_y;
  std::optional<std::vector<ControlField>> dict_a;
  std::optional<std::vector<ControlField>> dict_b;
  FinalCost final_cost = FinalCost::mean_diff_squared();
  RunningCost running_cost = RunningCost::zero();
  double sigma = 0.0;
  std::string solver = "reduced";
  std::optional<ScheduleConfig> schedule;
  std::optional<ScheduleConfig> schedule_x;
  std::optional<ScheduleConfig> schedule_y;
  std::vector<double> snapshot_times;
  double steps_per_unit = 100.0;
  std::vector<double> sigmas;
  int fp_steps = 0;
  double offset_spacing = 0.0;
  int box_cells = -1;
  std::optional<std::string> output_dir;
  std::uint64_t seed = 1;
  std::optional<double> tolerance_override;
};

/// Throws ConfigError naming the offending key. Relative CSV paths resolve
/// against base_dir.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

Grid1D config_grid(const ScenarioConfig& cfg);
/// which is "X" or "Y".
DensityGrid config_density(const ScenarioConfig& cfg, const std::string& which);
ControlSchedule config_schedule(const ScenarioConfig& cfg, const ScheduleConfig& s);
GameSpec config_game(const ScenarioConfig& cfg);

}  // namespace masschase
