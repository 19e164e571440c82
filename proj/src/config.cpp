#include "masschase/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "masschase/error.hpp"
#include "masschase/io.hpp"

namespace masschase {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config: `" + key + "` " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  require_object(j, path);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail(join(path, it.key()), "is not a recognized key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path, "is out of range");
  return static_cast<int>(v);
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? get_number(j.at(key), join(path, key)) : fallback;
}

double required_number(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(join(path, key), "is required");
  return get_number(j.at(key), join(path, key));
}

// Library-side validation failures become config errors on the same key.
template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, std::string("is invalid: ") + e.what());
  }
}

ControlField parse_field(const json& j, const std::string& path) {
  require_object(j, path);
  if (!j.contains("kind") || !j.at("kind").is_string()) fail(join(path, "kind"), "is required (a string)");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    allow_keys(j, path, {"kind", "c"});
    return ControlField::constant(required_number(j, "c", path));
  }
  if (kind == "affine") {
    allow_keys(j, path, {"kind", "slope", "intercept", "clip"});
    const double slope = required_number(j, "slope", path);
    const double intercept = number_or(j, "intercept", path, 0.0);
    const double clip = number_or(j, "clip", path, std::numeric_limits<double>::infinity());
    return guarded(path, [&] { return ControlField::affine(slope, intercept, clip); });
  }
  if (kind == "scatter") {
    allow_keys(j, path, {"kind", "xi1", "xi2", "c"});
    const double xi1 = required_number(j, "xi1", path);
    const double xi2 = required_number(j, "xi2", path);
    const double c = required_number(j, "c", path);
    return guarded(path, [&] { return ControlField::scatter(xi1, xi2, c); });
  }
  fail(join(path, "kind"), "must be constant, affine or scatter (got `" + kind + "`)");
}

std::vector<ControlField> parse_dictionary(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.empty()) fail(path, "must not be empty");
    std::vector<ControlField> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_field(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  allow_keys(j, path, {"standard"});
  if (!j.contains("standard")) fail(path, "must be an array of fields or {\"standard\": {...}}");
  const std::string sp = join(path, "standard");
  const json& s = j.at("standard");
  allow_keys(s, sp, {"c", "scatter", "xi1", "xi2"});
  const double c = required_number(s, "c", sp);
  bool scatter = false;
  if (s.contains("scatter")) {
    if (!s.at("scatter").is_boolean()) fail(join(sp, "scatter"), "must be a boolean");
    scatter = s.at("scatter").get<bool>();
  }
  const double xi1 = number_or(s, "xi1", sp, 0.0);
  const double xi2 = number_or(s, "xi2", sp, 1.0);
  return guarded(sp, [&] { return standard_dictionary(c, scatter, xi1, xi2).fields(); });
}

DensitySource parse_density(const json& j, const std::string& path, const std::filesystem::path& base_dir) {
  allow_keys(j, path, {"bump", "csv"});
  if (j.contains("bump") == j.contains("csv")) fail(path, "needs exactly one of `bump` or `csv`");
  DensitySource d;
  if (j.contains("csv")) {
    if (!j.at("csv").is_string()) fail(join(path, "csv"), "must be a path string");
    std::filesystem::path p = j.at("csv").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    d.csv = p;
    return d;
  }
  const std::string bp = join(path, "bump");
  const json& b = j.at("bump");
  allow_keys(b, bp, {"center", "radius", "mass"});
  d.center = required_number(b, "center", bp);
  d.radius = number_or(b, "radius", bp, 0.25);
  d.mass = number_or(b, "mass", bp, 1.0);
  if (!(d.radius > 0.0)) fail(join(bp, "radius"), "must be positive");
  if (!(d.mass > 0.0)) fail(join(bp, "mass"), "must be positive");
  return d;
}

ScheduleConfig parse_schedule(const json& j, const std::string& path) {
  allow_keys(j, path, {"field", "breakpoints", "fields"});
  ScheduleConfig s;
  if (j.contains("field")) {
    if (j.contains("breakpoints") || j.contains("fields")) {
      fail(path, "takes either `field` or `breakpoints` with `fields`, not both");
    }
    s.fields.push_back(parse_field(j.at("field"), join(path, "field")));
    return s;
  }
  if (!j.contains("breakpoints") || !j.contains("fields")) fail(path, "needs `field` or `breakpoints` and `fields`");
  s.breakpoints = get_numbers(j.at("breakpoints"), join(path, "breakpoints"));
  const json& f = j.at("fields");
  if (!f.is_array()) fail(join(path, "fields"), "must be an array of fields");
  for (std::size_t i = 0; i < f.size(); ++i) {
    s.fields.push_back(parse_field(f[i], join(path, "fields") + "[" + std::to_string(i) + "]"));
  }
  if (s.breakpoints.size() != s.fields.size() + 1) {
    fail(join(path, "breakpoints"), "must have exactly one more entry than `fields`");
  }
  return s;
}

}  // namespace

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  allow_keys(doc, "",
             {"domain", "n_cells", "T", "t0", "n_steps", "densities", "dictionaries", "cost", "sigma", "solver",
              "schedule", "schedules", "snapshot_times", "steps_per_unit", "sigmas", "fp_steps", "offset_spacing",
              "box_cells", "output_dir", "seed", "tolerance_override"});
  ScenarioConfig c;
  if (doc.contains("domain")) {
    const auto d = get_numbers(doc.at("domain"), "domain");
    if (d.size() != 2 || !(d[1] > d[0])) fail("domain", "must be [lo, hi] with lo < hi");
    c.domain = Interval{d[0], d[1]};
  }
  if (doc.contains("n_cells")) {
    c.n_cells = get_int(doc.at("n_cells"), "n_cells");
    if (c.n_cells < 2 || c.n_cells % 2 != 0) fail("n_cells", "must be even and >= 2");
  }
  c.T = number_or(doc, "T", "", c.T);
  c.t0 = number_or(doc, "t0", "", c.t0);
  if (!(c.T > c.t0)) fail("T", "must exceed t0");
  if (doc.contains("n_steps")) {
    c.n_steps = get_int(doc.at("n_steps"), "n_steps");
    if (c.n_steps < 1) fail("n_steps", "must be >= 1");
  }
  if (doc.contains("densities")) {
    const json& d = doc.at("densities");
    allow_keys(d, "densities", {"X", "Y"});
    if (d.contains("X")) c.density_x = parse_density(d.at("X"), "densities.X", base_dir);
    if (d.contains("Y")) c.density_y = parse_density(d.at("Y"), "densities.Y", base_dir);
  }
  if (doc.contains("dictionaries")) {
    const json& d = doc.at("dictionaries");
    allow_keys(d, "dictionaries", {"A", "B"});
    if (d.contains("A")) c.dict_a = parse_dictionary(d.at("A"), "dictionaries.A");
    if (d.contains("B")) c.dict_b = parse_dictionary(d.at("B"), "dictionaries.B");
  }
  if (doc.contains("cost")) {
    const json& j = doc.at("cost");
    allow_keys(j, "cost", {"final", "running"});
    if (j.contains("final")) {
      const json& f = j.at("final");
      if (f.is_string()) {
        const std::string s = f.get<std::string>();
        if (s == "psi1") {
          c.final_cost = FinalCost::overlap();
        } else if (s == "psi3") {
          c.final_cost = FinalCost::mean_diff_squared();
        } else if (s == "psi2") {
          fail("cost.final", "psi2 needs a window: {\"psi2\": {\"delta\": ...}}");
        } else {
          fail("cost.final", "must be psi1, psi3 or {\"psi2\": {\"delta\": ...}} (got `" + s + "`)");
        }
      } else {
        allow_keys(f, "cost.final", {"psi2"});
        if (!f.contains("psi2")) fail("cost.final", "must be psi1, psi3 or {\"psi2\": {\"delta\": ...}}");
        allow_keys(f.at("psi2"), "cost.final.psi2", {"delta"});
        const double delta = required_number(f.at("psi2"), "delta", "cost.final.psi2");
        c.final_cost = guarded("cost.final.psi2.delta", [&] { return FinalCost::window_diff_squared(delta); });
      }
    }
    if (j.contains("running")) {
      const json& r = j.at("running");
      if (r.is_string()) {
        if (r.get<std::string>() != "zero") fail("cost.running", "must be \"zero\" or {\"effort\": {...}}");
        c.running_cost = RunningCost::zero();
      } else {
        allow_keys(r, "cost.running", {"effort"});
        if (!r.contains("effort")) fail("cost.running", "must be \"zero\" or {\"effort\": {...}}");
        allow_keys(r.at("effort"), "cost.running.effort", {"wX", "wY"});
        const double wX = number_or(r.at("effort"), "wX", "cost.running.effort", 1.0);
        const double wY = number_or(r.at("effort"), "wY", "cost.running.effort", 1.0);
        c.running_cost = guarded("cost.running.effort", [&] { return RunningCost::control_effort(wX, wY); });
      }
    }
  }
  c.sigma = number_or(doc, "sigma", "", 0.0);
  if (c.sigma < 0.0) fail("sigma", "must be >= 0");
  if (doc.contains("solver")) {
    if (!doc.at("solver").is_string()) fail("solver", "must be a string");
    c.solver = doc.at("solver").get<std::string>();
    if (c.solver != "reduced" && c.solver != "simulate") fail("solver", "must be \"reduced\" or \"simulate\"");
  }
  if (doc.contains("schedule")) c.schedule = parse_schedule(doc.at("schedule"), "schedule");
  if (doc.contains("schedules")) {
    const json& s = doc.at("schedules");
    allow_keys(s, "schedules", {"X", "Y"});
    if (s.contains("X")) c.schedule_x = parse_schedule(s.at("X"), "schedules.X");
    if (s.contains("Y")) c.schedule_y = parse_schedule(s.at("Y"), "schedules.Y");
  }
  if (doc.contains("snapshot_times")) {
    c.snapshot_times = get_numbers(doc.at("snapshot_times"), "snapshot_times");
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
      if (c.snapshot_times[i] < c.t0 - 1e-12 || c.snapshot_times[i] > c.T + 1e-12) {
        fail("snapshot_times", "entries must lie in [t0, T]");
      }
      if (i > 0 && c.snapshot_times[i] < c.snapshot_times[i - 1]) fail("snapshot_times", "must be sorted");
    }
  }
  c.steps_per_unit = number_or(doc, "steps_per_unit", "", c.steps_per_unit);
  if (!(c.steps_per_unit > 0.0)) fail("steps_per_unit", "must be positive");
  if (doc.contains("sigmas")) {
    c.sigmas = get_numbers(doc.at("sigmas"), "sigmas");
    for (std::size_t i = 0; i < c.sigmas.size(); ++i) {
      if (c.sigmas[i] < 0.0) fail("sigmas", "entries must be >= 0");
      if (i > 0 && !(c.sigmas[i] < c.sigmas[i - 1])) fail("sigmas", "must be strictly descending");
    }
  }
  if (doc.contains("fp_steps")) {
    c.fp_steps = get_int(doc.at("fp_steps"), "fp_steps");
    if (c.fp_steps < 0) fail("fp_steps", "must be >= 0");
  }
  c.offset_spacing = number_or(doc, "offset_spacing", "", 0.0);
  if (c.offset_spacing < 0.0) fail("offset_spacing", "must be >= 0");
  if (doc.contains("box_cells")) c.box_cells = get_int(doc.at("box_cells"), "box_cells");
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) fail("output_dir", "must be a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) fail("seed", "must be a nonnegative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("tolerance_override")) {
    c.tolerance_override = get_number(doc.at("tolerance_override"), "tolerance_override");
    if (*c.tolerance_override < 0.0) fail("tolerance_override", "must be >= 0");
  }
  return c;
}

ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(doc, base_dir);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config_text(text, path.parent_path());
}

Grid1D config_grid(const ScenarioConfig& cfg) {
  if (!cfg.domain) fail("domain", "is required");
  return Grid1D(cfg.domain->lo, cfg.domain->hi, cfg.n_cells);
}

DensityGrid config_density(const ScenarioConfig& cfg, const std::string& which) {
  const auto& src = which == "X" ? cfg.density_x : cfg.density_y;
  const std::string key = "densities." + which;
  if (!src) fail(key, "is required");
  if (src->csv) {
    return guarded(key + ".csv", [&] {
      std::ifstream in(*src->csv);
      if (!in) throw InvalidArgument("cannot open " + src->csv->string());
      return read_density_csv(in);
    });
  }
  const Grid1D g = config_grid(cfg);
  return guarded(key + ".bump", [&] { return quartic_bump(g, src->center, src->radius, src->mass); });
}

ControlSchedule config_schedule(const ScenarioConfig& cfg, const ScheduleConfig& s) {
  if (s.breakpoints.empty()) return ControlSchedule::constant(s.fields.front(), cfg.t0, cfg.T);
  return guarded("schedule", [&] { return ControlSchedule(s.breakpoints, s.fields); });
}

GameSpec config_game(const ScenarioConfig& cfg) {
  GameSpec g;
  g.T = cfg.T;
  g.t0 = cfg.t0;
  g.n_steps = cfg.n_steps;
  g.mX0 = config_density(cfg, "X");
  g.mY0 = config_density(cfg, "Y");
  if (!(g.mX0.grid() == g.mY0.grid())) fail("densities", "X and Y must live on the same grid");
  if (!cfg.dict_a) fail("dictionaries.A", "is required");
  if (!cfg.dict_b) fail("dictionaries.B", "is required");
  g.dictA = ControlDictionary(*cfg.dict_a);
  g.dictB = ControlDictionary(*cfg.dict_b);
  g.fc = cfg.final_cost;
  g.rc = cfg.running_cost;
  g.sigma = cfg.sigma;
  g.reduced = cfg.solver == "reduced";
  g.offset_spacing = cfg.offset_spacing;
  g.box_cells_x = cfg.box_cells;
  g.box_cells_y = cfg.box_cells;
  g.flow_steps_per_unit = cfg.steps_per_unit;
  if (g.reduced && !(g.dictA.all_constant() && g.dictB.all_constant())) {
    fail("solver", "\"reduced\" requires constant-only dictionaries");
  }
  return g;
}

}  // namespace masschase
