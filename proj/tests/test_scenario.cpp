#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cellmatch/scenario.hpp"

using namespace cellmatch;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string diagnostic(const std::string& text) {
  try {
    load_fixture(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({
  "cells": [{"x": 10, "y": 0, "R": 100, "r": 2}],
  "users": [{"x": 0, "y": 0, "tau": 1.5}]
})";

}  // namespace

TEST(Generate, DeterministicPerSeed) {
  ScenarioConfig cfg;
  cfg.seed = 17;
  EXPECT_EQ(generate(cfg), generate(cfg));
  ScenarioConfig other = cfg;
  other.seed = 18;
  const auto a = generate(cfg);
  const auto b = generate(other);
  EXPECT_NE(a.users, b.users);
  EXPECT_NE(a.cells, b.cells);
  EXPECT_NE(a.channels, b.channels);
}

TEST(Generate, MinimalScenario) {
  ScenarioConfig cfg;
  cfg.n_users = 1;
  cfg.n_picos = 1;
  const auto s = generate(cfg);
  EXPECT_EQ(s.n_users(), 1u);
  EXPECT_EQ(s.n_cells(), 1u);
  EXPECT_EQ(s.channels.users(), 1u);
  EXPECT_EQ(s.channels.stations(), 2u);
  EXPECT_NO_THROW(s.validate());
}

TEST(Generate, DrawsRespectConfiguredRanges) {
  ScenarioConfig cfg;
  cfg.n_users = 500;
  cfg.n_picos = 100;
  const auto s = generate(cfg);
  for (const auto& u : s.users) {
    EXPECT_LE(std::hypot(u.position.x, u.position.y), cfg.macro_radius);
    EXPECT_GE(u.tau, cfg.tau_range.first);
    EXPECT_LE(u.tau, cfg.tau_range.second);
    EXPECT_LT(std::abs(u.theta), std::numbers::pi / 2);
    EXPECT_GE(u.speed, cfg.speed_range.first);
    EXPECT_LE(u.speed, cfg.speed_range.second);
  }
  for (const auto& c : s.cells) {
    EXPECT_LE(std::hypot(c.geometry.center.x, c.geometry.center.y), cfg.macro_radius);
    EXPECT_GE(c.geometry.R, cfg.pico_R_range.first);
    EXPECT_LE(c.geometry.R, cfg.pico_R_range.second);
    const double ratio = c.geometry.r / c.geometry.R;
    EXPECT_GE(ratio, cfg.pico_r_ratio_range.first - 1e-15);
    EXPECT_LE(ratio, cfg.pico_r_ratio_range.second + 1e-15);
    EXPECT_DOUBLE_EQ(c.geometry.r_exit, 1.1 * c.geometry.R);
    EXPECT_EQ(c.quota, 4);
    EXPECT_GE(c.prep_time, cfg.prep_time_range.first);
    EXPECT_LE(c.prep_time, cfg.prep_time_range.second);
  }
}

TEST(Generate, TauMeanIsMidpoint) {
  ScenarioConfig cfg;
  cfg.n_users = 100000;
  cfg.n_picos = 1;
  cfg.seed = 4;
  const auto s = generate(cfg);
  double sum = 0.0;
  for (const auto& u : s.users) sum += u.tau;
  const double mid = 0.5 * (cfg.tau_range.first + cfg.tau_range.second);
  EXPECT_NEAR(sum / static_cast<double>(s.n_users()), mid, 0.01 * mid);
}

TEST(Generate, UserPositionsUniformOverSectors) {
  ScenarioConfig cfg;
  cfg.n_users = 100000;
  cfg.n_picos = 1;
  cfg.seed = 8;
  const auto s = generate(cfg);
  // 8 angular sectors plus 2 radial bands: the R sqrt(u) transform gives the
  // inner half-area disk (radius R / sqrt 2) half the users.
  std::vector<double> counts(16, 0.0);
  for (const auto& u : s.users) {
    double a = std::atan2(u.position.y, u.position.x);
    if (a < 0) a += 2.0 * std::numbers::pi;
    const auto sector = std::min<std::size_t>(7, static_cast<std::size_t>(a / (std::numbers::pi / 4)));
    const bool inner = std::hypot(u.position.x, u.position.y) < cfg.macro_radius / std::sqrt(2.0);
    counts[sector * 2 + (inner ? 0 : 1)] += 1.0;
  }
  const double expected = static_cast<double>(cfg.n_users) / 16.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square 0.999 quantile with 15 degrees of freedom
  EXPECT_LT(chi2, 37.697);
}

TEST(Generate, SubStreamsAreIsolated) {
  ScenarioConfig cfg;
  cfg.seed = 5;
  ScenarioConfig more = cfg;
  more.n_picos = cfg.n_picos + 7;
  const auto a = generate(cfg);
  const auto b = generate(more);
  EXPECT_EQ(a.users, b.users);
  for (std::size_t p = 0; p < a.n_cells(); ++p) EXPECT_EQ(a.cells[p], b.cells[p]);
}

TEST(Generate, RejectsInconsistentRanges) {
  ScenarioConfig cfg;
  cfg.tau_range = {5.0, 0.5};
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.n_users = 0;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.pico_r_ratio_range = {0.5, 1.2};
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = {};
  cfg.exit_factor = 1.0;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
}

TEST(Fixture, RoundTrip) {
  ScenarioConfig cfg;
  cfg.n_users = 25;
  cfg.n_picos = 6;
  cfg.seed = 123;
  cfg.game.hf_threshold = 0.07;
  cfg.radio.min_sinr_db = 3.0;
  const auto s = generate(cfg);
  const auto back = load_fixture(serialize_fixture(s));
  EXPECT_EQ(back, s);
  EXPECT_EQ(serialize_fixture(back), serialize_fixture(s));
}

TEST(Fixture, MinimalDocumentUsesPathLoss) {
  const auto s = load_fixture(kMinimal);
  EXPECT_EQ(s.n_users(), 1u);
  EXPECT_DOUBLE_EQ(s.cells[0].geometry.r_exit, 110.0);
  EXPECT_EQ(s.cells[0].quota, 4);
  EXPECT_NEAR(s.channels(0, 0), 1.0, 1e-15);       // distance 0 clamped to 1 m
  EXPECT_NEAR(s.channels(0, 1), 1e-3, 1e-15);      // 10 m, exponent 3
}

TEST(Fixture, HandWrittenFile) {
  const auto s = load_fixture(read_file(CELLMATCH_SOURCE_DIR "/fixtures/three_users_two_cells.json"));
  EXPECT_EQ(s.n_users(), 3u);
  EXPECT_EQ(s.n_cells(), 2u);
  EXPECT_EQ(s.cells[0].quota, 1);
  EXPECT_DOUBLE_EQ(s.channels(2, 2), 0.03);
  EXPECT_FALSE(s.radio.enforce_min_sinr);
}

TEST(Fixture, DiagnosticsNameTheField) {
  EXPECT_NE(diagnostic(R"({"cells": [{"x": 1, "y": 0, "R": "big", "r": 2}], "users": [{"x": 0, "y": 0, "tau": 1}]})")
                .find("cells[0].R"),
            std::string::npos);
  EXPECT_NE(diagnostic(R"({"cells": [], "users": [{"x": 0, "y": 0}]})").find("users[0].tau"), std::string::npos);
  EXPECT_NE(diagnostic(R"({"cells": [], "users": [{"x": 0, "y": 0, "tau": 1, "colour": 2}]})").find("users[0].colour"),
            std::string::npos);
  EXPECT_NE(diagnostic(R"({"cells": [], "users": [{"x": 0, "y": 0, "tau": 1}], "radio": {"noise_power": -1}})")
                .find("radio"),
            std::string::npos);
  EXPECT_NE(diagnostic(R"({"cells": [{"x": 1, "y": 0, "R": 10, "r": 1}], "users": [{"x": 0, "y": 0, "tau": 1}],
                  "channels": [[1, -2]]})")
                .find("channels[0][1]"),
            std::string::npos);
  EXPECT_NE(diagnostic(R"({"cells": [{"x": 1, "y": 0, "R": 10, "r": 20}], "users": [{"x": 0, "y": 0, "tau": 1}]})")
                .find("cells[0]"),
            std::string::npos);
}

TEST(Fixture, ParseErrorReportsLine) {
  const std::string text = "{\n  \"cells\": [],\n  \"users\": [ oops ]\n}\n";
  EXPECT_NE(diagnostic(text).find("line 3"), std::string::npos);
}

TEST(Fixture, DbmPowerKeys) {
  const auto s = load_fixture(R"({"radio": {"tx_power_macro_dbm": 40, "noise_power_dbm": -100},
    "cells": [{"x": 10, "y": 0, "R": 100, "r": 2}], "users": [{"x": 0, "y": 0, "tau": 1}]})");
  EXPECT_NEAR(s.radio.tx_power_macro, 10.0, 1e-12);
  EXPECT_NEAR(s.radio.noise_power, 1e-13, 1e-25);
  EXPECT_NE(diagnostic(R"({"radio": {"noise_power": 1, "noise_power_dbm": 0}, "cells": [],
    "users": [{"x": 0, "y": 0, "tau": 1}]})")
                .find("radio.noise_power"),
            std::string::npos);
}
