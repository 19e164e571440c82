#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "masschase/config.hpp"
#include "masschase/error.hpp"
#include "masschase/flow.hpp"
#include "masschase/game.hpp"
#include "masschase/io.hpp"
#include "masschase/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace masschase;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Options {
  std::string config;
  std::string out;
  bool json = false;
};

json meta_block() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return {{"generated_at", buf}, {"tool", "masschase"}};
}

fs::path output_dir(const Options& opt, const ScenarioConfig& cfg) {
  if (!opt.out.empty()) return opt.out;
  if (cfg.output_dir) return *cfg.output_dir;
  return ".";
}

ScenarioConfig require_config(const Options& opt) {
  if (opt.config.empty()) throw ConfigError("config: --config is required for this command");
  return load_config(opt.config);
}

void emit(const Options& opt, const json& j) {
  if (opt.json) std::cout << j.dump(2) << "\n";
}

double mass_drift(const DensityGrid& m, double m0) { return m0 > 0.0 ? std::abs(total_mass(m) - m0) / m0 : 0.0; }

int cmd_transport(const Options& opt) {
  const ScenarioConfig cfg = require_config(opt);
  if (!cfg.schedule) throw ConfigError("config: `schedule` is required for transport");
  const DensityGrid m0 = config_density(cfg, "X");
  const ControlSchedule sched = config_schedule(cfg, *cfg.schedule);
  std::vector<double> times = cfg.snapshot_times;
  if (times.empty()) times = {cfg.t0, cfg.T};

  std::vector<DensityGrid> snaps;
  if (cfg.sigma > 0.0) {
    for (double s : times) {
      if (s == cfg.t0) {
        snaps.push_back(m0);
        continue;
      }
      const int n = cfg.fp_steps > 0
                        ? std::max(1, static_cast<int>(std::llround(cfg.fp_steps * (s - cfg.t0) / (cfg.T - cfg.t0))))
                        : fokker_planck_min_steps(m0.grid(), sched, cfg.sigma, cfg.t0, s);
      snaps.push_back(fokker_planck_solve(m0, sched, cfg.sigma, cfg.t0, s, n));
    }
  } else {
    snaps = solve_continuity(m0, sched, cfg.t0, times, cfg.steps_per_unit);
  }

  std::ostringstream csv;
  csv << "time,x,value\n";
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    for (std::size_t i = 0; i < snaps[k].size(); ++i) {
      csv << format_full(times[k]) << ',' << format_full(snaps[k].grid().x(i)) << ',' << format_full(snaps[k][i])
          << '\n';
    }
  }

  const double mass0 = total_mass(m0);
  json per = json::array();
  double worst_drift = 0.0;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const Interval s = support_of(snaps[k]);
    const double d = mass_drift(snaps[k], mass0);
    worst_drift = std::max(worst_drift, d);
    per.push_back({{"time", times[k]}, {"mass", total_mass(snaps[k])}, {"mass_drift", d}, {"support", {s.lo, s.hi}}});
  }
  // Identities along characteristics started inside the initial support.
  const Interval s0 = support_of(m0);
  const int steps = std::max(1, static_cast<int>(std::ceil(cfg.steps_per_unit * (cfg.T - cfg.t0))));
  double liouville = 0.0;
  double semigroup = 0.0;
  for (int q = 0; q <= 4; ++q) {
    const double x = s0.lo + (s0.hi - s0.lo) * q / 4.0;
    liouville = std::max(liouville, liouville_error(sched, x, cfg.t0, cfg.T, steps));
    semigroup = std::max(semigroup, semigroup_error(sched, x, cfg.t0, 0.5 * (cfg.t0 + cfg.T), cfg.T,
                                                    cfg.steps_per_unit));
  }
  const json diag = {{"mass_drift", worst_drift},
                     {"snapshots", per},
                     {"liouville_error", liouville},
                     {"semigroup_error", semigroup},
                     {"sigma", cfg.sigma},
                     {"meta", meta_block()}};
  const fs::path dir = output_dir(opt, cfg);
  write_text_file(dir / "snapshots.csv", csv.str());
  write_text_file(dir / "diagnostics.json", diag.dump(2) + "\n");
  emit(opt, diag);
  return kOk;
}

int cmd_solve(const Options& opt) {
  const ScenarioConfig cfg = require_config(opt);
  const GameSpec spec = config_game(cfg);
  if (!spec.reduced) throw ConfigError("config: `solver` must be \"reduced\" for solve");
  const ValueTable table = solve_values(spec);
  const FeedbackStrategy strategy = extract_feedback(table, spec);
  double dpp = 0.0;
  for (int k = 0; k + 1 < table.n_levels(); ++k) dpp = std::max(dpp, dpp_residual(table, spec, k));

  std::ostringstream values;
  write_value_table_csv(values, table);
  std::ostringstream strat;
  write_strategy_csv(strat, strategy);

  json summary = {{"lower", table.lower_origin()},
                  {"upper", table.upper_origin()},
                  {"gap", table.upper_origin() - table.lower_origin()},
                  {"dpp_residual", dpp},
                  {"n_steps", spec.n_steps},
                  {"offset_spacing", table.axis_x().spacing},
                  {"final_cost", spec.fc.name()},
                  {"running_cost", spec.rc.name()}};
  if (spec.n_steps <= 3) {
    const auto [bl, bu] = brute_force_value(spec, 3);
    summary["brute_force"] = {{"lower", bl},
                              {"upper", bu},
                              {"max_abs_diff", std::max(std::abs(bl - table.lower_origin()),
                                                        std::abs(bu - table.upper_origin()))}};
  }
  summary["meta"] = meta_block();
  const fs::path dir = output_dir(opt, cfg);
  write_text_file(dir / "values.csv", values.str());
  write_text_file(dir / "strategy.csv", strat.str());
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  emit(opt, summary);
  return kOk;
}

int cmd_verify(const Options& opt) {
  ScenarioConfig cfg;
  if (!opt.config.empty()) cfg = load_config(opt.config);
  ScenarioOptions so;
  so.seed = cfg.seed;
  so.tolerance_override = cfg.tolerance_override;

  std::vector<ScenarioReport> reports;
  reports.push_back(run_example_psi3(Psi3Params{}, so));
  reports.push_back(run_example_psi1(default_psi1_params(), so));
  reports.push_back(run_antelope_lion(AntelopeLionParams{}, so));
  reports.push_back(run_hamiltonian_suite(so));

  json list = json::array();
  std::size_t n_checks = 0;
  std::size_t n_passed = 0;
  bool ok = true;
  for (const auto& r : reports) {
    validate_report(r);
    list.push_back(to_json(r));
    n_checks += r.checks.size();
    n_passed += r.n_passed();
    ok = ok && r.passed();
    if (!opt.json) std::cout << to_text(r);
  }
  const json report = {{"passed", ok}, {"n_checks", n_checks}, {"n_passed", n_passed}, {"scenarios", list},
                       {"meta", meta_block()}};
  write_text_file(output_dir(opt, cfg) / "verify_report.json", report.dump(2) + "\n");
  emit(opt, report);
  if (!opt.json) std::cout << (ok ? "verify: all " : "verify: FAILED, ") << n_passed << "/" << n_checks
                           << " checks passed\n";
  return ok ? kOk : kCheckFailed;
}

int cmd_fp_sweep(const Options& opt) {
  const ScenarioConfig cfg = require_config(opt);
  if (cfg.sigmas.empty()) throw ConfigError("config: `sigmas` is required for fp-sweep");
  ViscositySweepParams p;
  p.mX0 = config_density(cfg, "X");
  p.mY0 = config_density(cfg, "Y");
  p.t0 = cfg.t0;
  p.T = cfg.T;
  const auto still = ScheduleConfig{{}, {ControlField::constant(0.0)}};
  p.alpha = config_schedule(cfg, cfg.schedule_x.value_or(still));
  p.beta = config_schedule(cfg, cfg.schedule_y.value_or(still));
  p.fc = cfg.final_cost;
  p.sigmas = cfg.sigmas;
  p.fp_steps = cfg.fp_steps;
  const auto rows = viscosity_sweep(p);

  std::ostringstream csv;
  csv << "sigma,J,gap_to_sigma0\n";
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << format_full(rows[i].sigma) << ',' << format_full(rows[i].J) << ',' << format_full(rows[i].gap) << '\n';
    if (i > 0 && rows[i].gap > rows[i - 1].gap) monotone = false;
  }
  write_text_file(output_dir(opt, cfg) / "sweep.csv", csv.str());
  if (opt.json) {
    json j = json::array();
    for (const auto& r : rows) j.push_back({{"sigma", r.sigma}, {"J", r.J}, {"gap_to_sigma0", r.gap}});
    emit(opt, {{"rows", j}, {"nonincreasing", monotone}});
  }
  return monotone ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-population mass differential game: transport, value solver and verification"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario configuration (JSON)");
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_flag("--json", opt.json, "Also print the JSON result to standard output");
  };
  CLI::App* transport = app.add_subcommand("transport", "Push a density along a schedule, write snapshots");
  CLI::App* solve = app.add_subcommand("solve", "Solve the reduced game, write value table and strategy");
  CLI::App* verify = app.add_subcommand("verify", "Run the built-in scenarios and property checks");
  CLI::App* sweep = app.add_subcommand("fp-sweep", "Vanishing-viscosity sweep over sigma");
  for (CLI::App* s : {transport, solve, verify, sweep}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (transport->parsed()) return cmd_transport(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (sweep->parsed()) return cmd_fp_sweep(opt);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
