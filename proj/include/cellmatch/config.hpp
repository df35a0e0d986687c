#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellmatch/experiment.hpp"
#include "cellmatch/json_fields.hpp"
#include "cellmatch/scenario.hpp"

namespace cellmatch {

/// Everything a command-line run needs, merged from a preset, a config file
/// and flags (in that order of precedence, lowest first).
struct RunConfig {
  ScenarioConfig scenario;
  SweepAxis axis = SweepAxis::n_picos;
  std::vector<std::size_t> values{10, 20, 30, 40};
  // One sweep per entry; several entries give one output per entry.
  std::vector<std::size_t> fixed{60};
  std::size_t replicas = 1000;
  std::vector<Algorithm> algorithms{Algorithm::proposed, Algorithm::max_sinr};
  bool include_macro_users = false;
  SolverConfig solver;
  BaselineConfig baseline;
  std::optional<std::uint64_t> seed;  // overrides scenario.seed when set
  std::optional<std::size_t> workers;
  std::string out;
  std::string format = "csv";

  std::uint64_t effective_seed() const { return seed ? *seed : scenario.seed; }

  SweepSpec sweep_for(std::size_t fixed_value) const {
    SweepSpec s;
    s.axis = axis;
    s.values = values;
    s.fixed = fixed_value;
    s.replicas = replicas;
    s.base = scenario;
    s.base.seed = effective_seed();
    s.algorithms = algorithms;
    s.solver = solver;
    s.baseline = baseline;
    s.include_macro_users = include_macro_users;
    if (workers) s.workers = *workers;
    return s;
  }

  void validate() const {
    if (format != "csv" && format != "json-lines") throw std::invalid_argument("format must be csv or json-lines");
    if (fixed.empty()) throw std::invalid_argument("sweep.fixed must name at least one value");
    if (solver.max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
    for (std::size_t f : fixed) sweep_for(f).validate();
  }
};

namespace detail {

inline std::vector<std::size_t> counts(FieldReader& f, const std::string& key, std::vector<std::size_t> fallback) {
  if (!f.has(key)) return fallback;
  const json& v = f.raw(key);
  std::vector<std::size_t> out;
  auto one = [&](const json& x) {
    if (!x.is_number_integer() || x.get<long long>() < 1) throw FormatError(f.path_of(key), "expected counts >= 1");
    out.push_back(x.get<std::size_t>());
  };
  if (v.is_array()) {
    for (const auto& x : v) one(x);
  } else {
    one(v);
  }
  if (out.empty()) throw FormatError(f.path_of(key), "expected at least one value");
  return out;
}

}  // namespace detail

inline ScenarioConfig scenario_config_from_json(const json& j, const std::string& path, ScenarioConfig c) {
  FieldReader f(j, path);
  c.macro_radius = f.number("macro_radius", c.macro_radius);
  c.n_users = static_cast<std::size_t>(f.unsigned_integer("n_users", c.n_users));
  c.n_picos = static_cast<std::size_t>(f.unsigned_integer("n_picos", c.n_picos));
  c.quota = static_cast<int>(f.integer("quota", c.quota));
  c.tau_range = f.range("tau_range", c.tau_range);
  c.pico_R_range = f.range("pico_R_range", c.pico_R_range);
  c.pico_r_ratio_range = f.range("pico_r_ratio_range", c.pico_r_ratio_range);
  c.prep_time_range = f.range("prep_time_range", c.prep_time_range);
  c.speed_range = f.range("speed_range", c.speed_range);
  c.exit_factor = f.number("exit_factor", c.exit_factor);
  c.seed = f.unsigned_integer("seed", c.seed);
  if (f.has("radio")) c.radio = radio_from_json(f.raw("radio"), f.path_of("radio"), c.radio);
  if (f.has("game")) c.game = game_from_json(f.raw("game"), f.path_of("game"), c.game);
  f.finish();
  return c;
}

/// Applies a config document on top of `base`. Top-level keys: scenario,
/// sweep, seed, workers, out, format. Unknown keys are rejected.
inline RunConfig run_config_from_json(const json& doc, RunConfig base = {}) {
  FieldReader top(doc, "");
  RunConfig c = std::move(base);
  if (top.has("scenario")) c.scenario = scenario_config_from_json(top.raw("scenario"), "scenario", c.scenario);
  if (top.has("sweep")) {
    FieldReader f(top.raw("sweep"), "sweep");
    try {
      if (f.has("axis")) c.axis = parse_axis(f.string("axis", ""));
      if (f.has("algorithms")) {
        const json& a = f.raw("algorithms");
        if (!a.is_array() || a.empty()) throw FormatError("sweep.algorithms", "expected a non-empty array");
        c.algorithms.clear();
        for (const auto& x : a) {
          if (!x.is_string()) throw FormatError("sweep.algorithms", "expected strings");
          c.algorithms.push_back(parse_algorithm(x.get<std::string>()));
        }
      }
    } catch (const std::invalid_argument& e) {
      throw FormatError("sweep", e.what());
    }
    c.values = detail::counts(f, "values", c.values);
    c.fixed = detail::counts(f, "fixed", c.fixed);
    c.replicas = static_cast<std::size_t>(f.unsigned_integer("replicas", c.replicas));
    c.include_macro_users = f.boolean("include_macro_users", c.include_macro_users);
    c.solver.max_outer = static_cast<std::size_t>(f.unsigned_integer("max_outer", c.solver.max_outer));
    c.solver.verify = f.boolean("verify", c.solver.verify);
    c.baseline.enforce_quota = f.boolean("enforce_quota", c.baseline.enforce_quota);
    f.finish();
  }
  if (top.has("seed")) c.seed = top.unsigned_integer("seed", 0);
  if (top.has("workers")) c.workers = static_cast<std::size_t>(top.unsigned_integer("workers", 1));
  c.out = top.string("out", c.out);
  c.format = top.string("format", c.format);
  top.finish();
  try {
    c.validate();
  } catch (const FormatError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw FormatError("", e.what());
  }
  return c;
}

inline RunConfig run_config_from_text(const std::string& text, RunConfig base = {}) {
  return run_config_from_json(parse_document(text), std::move(base));
}

inline constexpr std::string_view kPresetNames[] = {"fig2", "fig3", "fig4"};

/// Built-in sweep designs. fig2: N = 60, P in 10..40. fig3: P = 20,
/// N in 10..100. fig4: P in {10, 20}, N in 3..70.
inline RunConfig preset(std::string_view name) {
  RunConfig c;
  if (name == "fig2") {
    c.axis = SweepAxis::n_picos;
    c.values = {10, 15, 20, 25, 30, 35, 40};
    c.fixed = {60};
  } else if (name == "fig3") {
    c.axis = SweepAxis::n_users;
    c.values = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    c.fixed = {20};
  } else if (name == "fig4") {
    c.axis = SweepAxis::n_users;
    c.values = {3, 10, 20, 30, 40, 50, 60, 70};
    c.fixed = {10, 20};
    c.algorithms = {Algorithm::proposed};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected fig2, fig3 or fig4)");
  }
  return c;
}

}  // namespace cellmatch
