#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cellmatch/context.hpp"
#include "cellmatch/geometry.hpp"
#include "cellmatch/json_fields.hpp"
#include "cellmatch/radio.hpp"
#include "cellmatch/random.hpp"

namespace cellmatch {

using Range = std::pair<double, double>;

/// Game-level knobs that are not part of the radio or the geometry.
struct GameParams {
  double hf_threshold = 0.05;
  // Users only consider cells whose coverage disk contains them.
  bool require_coverage = true;
  // Effective quota of the macro cell as a "previous cell"; 0 means N (single macro).
  int mbs_effective_quota = 0;
  // Reliability factor standing in for R/r when a user is served by the macro cell.
  double macro_reliability = 1.0;

  friend bool operator==(const GameParams&, const GameParams&) = default;

  void validate() const {
    if (!(hf_threshold > 0.0 && hf_threshold <= 1.0)) throw std::invalid_argument("hf_threshold must lie in (0, 1]");
    if (mbs_effective_quota < 0) throw std::invalid_argument("mbs_effective_quota must be >= 0");
    if (!(macro_reliability > 0.0)) throw std::invalid_argument("macro_reliability must be > 0");
  }
};

struct MacroStation {
  Point position;
  double tx_power = dbm_to_watts(46.0);

  friend bool operator==(const MacroStation&, const MacroStation&) = default;
};

struct ScenarioConfig {
  double macro_radius = 1000.0;
  std::size_t n_users = 60;
  std::size_t n_picos = 20;
  int quota = 4;
  Range tau_range{0.5, 5.0};  // ms
  Range pico_R_range{100.0, 300.0};
  Range pico_r_ratio_range{0.02, 0.1};
  Range prep_time_range{1.0, 10.0};
  Range speed_range{1.0, 15.0};
  double exit_factor = kDefaultExitFactor;
  RadioConfig radio;
  GameParams game;
  std::uint64_t seed = 1;

  void validate() const {
    auto check_range = [](const Range& r, const char* name, double lo_bound) {
      if (!(r.first <= r.second)) throw std::invalid_argument(std::string(name) + ": min exceeds max");
      if (!(r.first >= lo_bound)) throw std::invalid_argument(std::string(name) + ": values out of domain");
    };
    if (!(macro_radius > 0.0)) throw std::invalid_argument("macro_radius must be > 0");
    if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
    if (n_picos < 1) throw std::invalid_argument("n_picos must be >= 1");
    if (quota < 1) throw std::invalid_argument("quota must be >= 1");
    check_range(tau_range, "tau_range", 0.0);
    if (!(tau_range.first > 0.0)) throw std::invalid_argument("tau_range: values must be > 0");
    check_range(pico_R_range, "pico_R_range", 0.0);
    if (!(pico_R_range.first > 0.0)) throw std::invalid_argument("pico_R_range: values must be > 0");
    check_range(pico_r_ratio_range, "pico_r_ratio_range", 0.0);
    if (!(pico_r_ratio_range.first > 0.0 && pico_r_ratio_range.second < 1.0))
      throw std::invalid_argument("pico_r_ratio_range must lie in (0, 1)");
    check_range(prep_time_range, "prep_time_range", 0.0);
    check_range(speed_range, "speed_range", 0.0);
    if (!(exit_factor > 1.0)) throw std::invalid_argument("exit_factor must be > 1");
    radio.validate();
    game.validate();
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// One realized network: a macro station at column 0 of the channel matrix
/// and small cells at columns 1..P.
struct Scenario {
  MacroStation mbs;
  std::vector<SmallCellProfile> cells;
  std::vector<UserProfile> users;
  ChannelMatrix channels;
  RadioConfig radio;
  GameParams game;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  std::size_t n_users() const noexcept { return users.size(); }
  std::size_t n_cells() const noexcept { return cells.size(); }

  std::vector<double> powers() const {
    std::vector<double> p;
    p.reserve(cells.size() + 1);
    p.push_back(mbs.tx_power);
    for (const auto& c : cells) p.push_back(c.tx_power);
    return p;
  }

  std::vector<Point> station_positions() const {
    std::vector<Point> s;
    s.reserve(cells.size() + 1);
    s.push_back(mbs.position);
    for (const auto& c : cells) s.push_back(c.geometry.center);
    return s;
  }

  int mbs_quota() const noexcept {
    return game.mbs_effective_quota > 0 ? game.mbs_effective_quota : static_cast<int>(users.size());
  }

  void validate() const {
    if (users.empty()) throw std::invalid_argument("scenario needs at least one user");
    radio.validate();
    game.validate();
    for (std::size_t k = 0; k < users.size(); ++k) {
      if (users[k].id != k) throw std::invalid_argument("user ids must equal their index");
      users[k].validate();
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k].id != k) throw std::invalid_argument("cell ids must equal their index");
      cells[k].validate();
    }
    if (channels.users() != users.size() || channels.stations() != cells.size() + 1)
      throw std::invalid_argument("channel matrix must be N x (P + 1)");
  }
};

inline Point uniform_in_disk(Rng& rng, double radius) {
  const double rho = radius * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

/// Draws a scenario. Cells, users and channels use separate labeled
/// sub-streams of the seed, so e.g. changing n_picos leaves user draws intact.
inline Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario s;
  s.radio = config.radio;
  s.game = config.game;
  s.mbs = {{0.0, 0.0}, config.radio.tx_power_macro};

  Rng cell_rng(derive_seed(config.seed, "cells"));
  s.cells.reserve(config.n_picos);
  for (std::size_t p = 0; p < config.n_picos; ++p) {
    SmallCellProfile c;
    c.id = p;
    c.geometry.center = uniform_in_disk(cell_rng, config.macro_radius);
    c.geometry.R = cell_rng.uniform(config.pico_R_range.first, config.pico_R_range.second);
    c.geometry.r = c.geometry.R * cell_rng.uniform(config.pico_r_ratio_range.first, config.pico_r_ratio_range.second);
    c.geometry.r_exit = config.exit_factor * c.geometry.R;
    c.quota = config.quota;
    c.prep_time = cell_rng.uniform(config.prep_time_range.first, config.prep_time_range.second);
    c.tx_power = config.radio.tx_power_pico;
    s.cells.push_back(c);
  }

  Rng user_rng(derive_seed(config.seed, "users"));
  s.users.reserve(config.n_users);
  for (std::size_t n = 0; n < config.n_users; ++n) {
    UserProfile u;
    u.id = n;
    u.position = uniform_in_disk(user_rng, config.macro_radius);
    u.tau = user_rng.uniform(config.tau_range.first, config.tau_range.second);
    u.theta = user_rng.uniform_open(-std::numbers::pi / 2, std::numbers::pi / 2);
    u.speed = user_rng.uniform(config.speed_range.first, config.speed_range.second);
    s.users.push_back(u);
  }

  std::vector<Point> user_pos;
  user_pos.reserve(s.users.size());
  for (const auto& u : s.users) user_pos.push_back(u.position);
  const auto stations = s.station_positions();
  s.channels = realize_channels(user_pos, stations, config.radio, derive_seed(config.seed, "channels"));
  return s;
}

// ---------------------------------------------------------------------------
// JSON mapping shared by fixtures and configuration files.

inline json radio_to_json(const RadioConfig& r) {
  return {{"noise_power", r.noise_power},       {"pathloss_exponent", r.pathloss_exponent},
          {"rayleigh_scale", r.rayleigh_scale}, {"tx_power_pico", r.tx_power_pico},
          {"tx_power_macro", r.tx_power_macro}, {"min_sinr_db", r.min_sinr_db},
          {"fading", r.fading},                 {"enforce_min_sinr", r.enforce_min_sinr}};
}

// Power fields accept watts ("noise_power") or dBm ("noise_power_dbm").
inline RadioConfig radio_from_json(const json& j, const std::string& path, RadioConfig r = {}) {
  FieldReader f(j, path);
  auto power = [&f](const std::string& key, double current) {
    if (f.has(key) && f.has(key + "_dbm")) throw FormatError(f.path_of(key), "give watts or dBm, not both");
    if (f.has(key + "_dbm")) return dbm_to_watts(f.number(key + "_dbm"));
    return f.number(key, current);
  };
  r.noise_power = power("noise_power", r.noise_power);
  r.tx_power_pico = power("tx_power_pico", r.tx_power_pico);
  r.tx_power_macro = power("tx_power_macro", r.tx_power_macro);
  r.pathloss_exponent = f.number("pathloss_exponent", r.pathloss_exponent);
  r.rayleigh_scale = f.number("rayleigh_scale", r.rayleigh_scale);
  r.min_sinr_db = f.number("min_sinr_db", r.min_sinr_db);
  r.fading = f.boolean("fading", r.fading);
  r.enforce_min_sinr = f.boolean("enforce_min_sinr", r.enforce_min_sinr);
  f.finish();
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path, e.what());
  }
  return r;
}

inline json game_to_json(const GameParams& g) {
  return {{"hf_threshold", g.hf_threshold},
          {"require_coverage", g.require_coverage},
          {"mbs_effective_quota", g.mbs_effective_quota},
          {"macro_reliability", g.macro_reliability}};
}

inline GameParams game_from_json(const json& j, const std::string& path, GameParams g = {}) {
  FieldReader f(j, path);
  g.hf_threshold = f.number("hf_threshold", g.hf_threshold);
  g.require_coverage = f.boolean("require_coverage", g.require_coverage);
  g.mbs_effective_quota = static_cast<int>(f.integer("mbs_effective_quota", g.mbs_effective_quota));
  g.macro_reliability = f.number("macro_reliability", g.macro_reliability);
  f.finish();
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path, e.what());
  }
  return g;
}

/// Fixture document. Channels are optional; when absent the gains are the
/// deterministic path loss with no fading.
inline json scenario_to_json(const Scenario& s) {
  json cells = json::array();
  for (const auto& c : s.cells) {
    cells.push_back({{"id", c.id},
                     {"x", c.geometry.center.x},
                     {"y", c.geometry.center.y},
                     {"R", c.geometry.R},
                     {"r", c.geometry.r},
                     {"r_exit", c.geometry.r_exit},
                     {"quota", c.quota},
                     {"prep_time", c.prep_time},
                     {"tx_power", c.tx_power}});
  }
  json users = json::array();
  for (const auto& u : s.users) {
    users.push_back({{"id", u.id},
                     {"x", u.position.x},
                     {"y", u.position.y},
                     {"tau", u.tau},
                     {"theta", u.theta},
                     {"speed", u.speed}});
  }
  json channels = json::array();
  for (std::size_t i = 0; i < s.channels.users(); ++i) {
    const auto row = s.channels.row(i);
    channels.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return {{"mbs", {{"x", s.mbs.position.x}, {"y", s.mbs.position.y}, {"tx_power", s.mbs.tx_power}}},
          {"radio", radio_to_json(s.radio)},
          {"game", game_to_json(s.game)},
          {"cells", cells},
          {"users", users},
          {"channels", channels}};
}

inline std::string serialize_fixture(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline Scenario scenario_from_json(const json& doc) {
  FieldReader top(doc, "");
  Scenario s;
  if (top.has("radio")) s.radio = radio_from_json(top.raw("radio"), "radio");
  if (top.has("game")) s.game = game_from_json(top.raw("game"), "game");

  s.mbs.tx_power = s.radio.tx_power_macro;
  if (top.has("mbs")) {
    FieldReader m(top.raw("mbs"), "mbs");
    s.mbs.position = {m.number("x", 0.0), m.number("y", 0.0)};
    s.mbs.tx_power = m.number("tx_power", s.mbs.tx_power);
    m.finish();
  }

  const json& cells = top.raw("cells");
  if (!cells.is_array()) throw FormatError("cells", "expected an array");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::string path = "cells[" + std::to_string(k) + "]";
    FieldReader f(cells[k], path);
    SmallCellProfile c;
    c.id = static_cast<std::size_t>(f.integer("id", static_cast<long>(k)));
    if (c.id != k) throw FormatError(f.path_of("id"), "ids must be 0..P-1 in order");
    c.geometry.center = {f.number("x"), f.number("y")};
    c.geometry.R = f.number("R");
    c.geometry.r = f.number("r");
    c.geometry.r_exit = f.number("r_exit", kDefaultExitFactor * c.geometry.R);
    c.quota = static_cast<int>(f.integer("quota", 4));
    c.prep_time = f.number("prep_time", 0.0);
    c.tx_power = f.number("tx_power", s.radio.tx_power_pico);
    f.finish();
    try {
      c.validate();
    } catch (const std::exception& e) {
      throw FormatError(path, e.what());
    }
    s.cells.push_back(c);
  }

  const json& users = top.raw("users");
  if (!users.is_array() || users.empty()) throw FormatError("users", "expected a non-empty array");
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string path = "users[" + std::to_string(k) + "]";
    FieldReader f(users[k], path);
    UserProfile u;
    u.id = static_cast<std::size_t>(f.integer("id", static_cast<long>(k)));
    if (u.id != k) throw FormatError(f.path_of("id"), "ids must be 0..N-1 in order");
    u.position = {f.number("x"), f.number("y")};
    u.tau = f.number("tau");
    u.theta = f.number("theta", 0.0);
    u.speed = f.number("speed", 0.0);
    f.finish();
    try {
      u.validate();
    } catch (const std::exception& e) {
      throw FormatError(path, e.what());
    }
    s.users.push_back(u);
  }

  if (top.has("channels")) {
    const json& ch = top.raw("channels");
    if (!ch.is_array() || ch.size() != s.users.size())
      throw FormatError("channels", "expected one row per user");
    s.channels = ChannelMatrix(s.users.size(), s.cells.size() + 1);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const std::string path = "channels[" + std::to_string(i) + "]";
      if (!ch[i].is_array() || ch[i].size() != s.cells.size() + 1)
        throw FormatError(path, "expected P + 1 gains (macro first)");
      for (std::size_t b = 0; b < ch[i].size(); ++b) {
        if (!ch[i][b].is_number()) throw FormatError(path + "[" + std::to_string(b) + "]", "expected a number");
        try {
          s.channels.set(i, b, ch[i][b].get<double>());
        } catch (const std::domain_error& e) {
          throw FormatError(path + "[" + std::to_string(b) + "]", e.what());
        }
      }
    }
  } else {
    RadioConfig flat = s.radio;
    flat.fading = false;
    std::vector<Point> pos;
    for (const auto& u : s.users) pos.push_back(u.position);
    s.channels = realize_channels(pos, s.station_positions(), flat, 0);
  }
  top.finish();
  return s;
}

inline Scenario load_fixture(const std::string& text) { return scenario_from_json(parse_document(text)); }

}  // namespace cellmatch
