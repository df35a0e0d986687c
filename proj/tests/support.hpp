#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cellmatch/matching.hpp"
#include "cellmatch/preferences.hpp"
#include "cellmatch/random.hpp"
#include "cellmatch/scenario.hpp"

namespace testing_support {

using namespace cellmatch;

struct CellSpec {
  Point center;
  double R = 200.0;
  double r = 4.0;
  int quota = 4;
  double prep_time = 0.0;
};

struct UserSpec {
  Point position;
  double tau = 1.0;
  double theta = 0.0;
  double speed = 0.0;
};

// Scenario with explicit gains (macro column first). The SINR floor and the
// coverage requirement are off unless the caller turns them back on.
inline Scenario hand_scenario(const std::vector<CellSpec>& cells, const std::vector<UserSpec>& users,
                              const std::vector<std::vector<double>>& gains, double noise = 1e-3) {
  Scenario s;
  s.radio.noise_power = noise;
  s.radio.tx_power_macro = 1.0;
  s.radio.tx_power_pico = 1.0;
  s.radio.enforce_min_sinr = false;
  s.game.require_coverage = false;
  s.mbs = {{0.0, 0.0}, 1.0};
  for (std::size_t p = 0; p < cells.size(); ++p) {
    SmallCellProfile c;
    c.id = p;
    c.geometry = {cells[p].center, cells[p].R, cells[p].r, 1.1 * cells[p].R};
    c.quota = cells[p].quota;
    c.prep_time = cells[p].prep_time;
    c.tx_power = 1.0;
    s.cells.push_back(c);
  }
  for (std::size_t n = 0; n < users.size(); ++n) {
    UserProfile u;
    u.id = n;
    u.position = users[n].position;
    u.tau = users[n].tau;
    u.theta = users[n].theta;
    u.speed = users[n].speed;
    s.users.push_back(u);
  }
  s.channels = ChannelMatrix(users.size(), cells.size() + 1);
  for (std::size_t n = 0; n < users.size(); ++n)
    for (std::size_t b = 0; b <= cells.size(); ++b) s.channels.set(n, b, gains.at(n).at(b));
  return s;
}

// Small random scenario where contention is common: floor and coverage off,
// low macro power, picos packed into a small disk.
inline ScenarioConfig contention_config(std::size_t users, std::size_t picos, std::uint64_t seed) {
  ScenarioConfig c;
  c.n_users = users;
  c.n_picos = picos;
  c.macro_radius = 300.0;
  c.quota = 2;
  c.seed = seed;
  c.radio.enforce_min_sinr = false;
  c.radio.tx_power_macro = dbm_to_watts(30.0);
  c.game.require_coverage = false;
  c.game.hf_threshold = 1.0;
  c.prep_time_range = {0.0, 1.0};
  return c;
}

// Every quota-feasible matching that only uses pairs allowed by `allowed`.
inline void for_each_matching(std::size_t users, const std::vector<int>& quotas,
                              const std::function<bool(std::size_t, std::size_t)>& allowed,
                              const std::function<void(const Matching&)>& visit) {
  Matching m(users, quotas);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == users) {
      visit(m);
      return;
    }
    rec(i + 1);
    for (std::size_t p = 0; p < quotas.size(); ++p) {
      if (!allowed(i, p) || m.full(p)) continue;
      m.assign(i, static_cast<int>(p));
      rec(i + 1);
      m.assign(i, kMacro);
    }
  };
  rec(0);
}

// Position of `item` in a ranked list, or the list size when absent.
inline std::size_t position_in(const PreferenceList& list, std::size_t item) {
  for (std::size_t k = 0; k < list.ranked.size(); ++k)
    if (list.ranked[k] == item) return k;
  return list.ranked.size();
}

// Blocking pairs of m under fixed strict preferences, by the textbook
// definition: user i prefers p to its partner (the macro is worst) and p has
// a free seat or holds someone it ranks below i.
inline std::vector<BlockingPair> frozen_blocking_pairs(const Matching& m, const std::vector<PreferenceList>& users,
                                                       const std::vector<PreferenceList>& cells) {
  std::vector<BlockingPair> out;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const int cur = m.cell_of(i);
    const std::size_t cur_pos =
        cur == kMacro ? users[i].ranked.size() : position_in(users[i], static_cast<std::size_t>(cur));
    for (std::size_t k = 0; k < users[i].ranked.size() && k < cur_pos; ++k) {
      const std::size_t p = users[i].ranked[k];
      const std::size_t rank_i = position_in(cells[p], i);
      if (rank_i == cells[p].ranked.size()) continue;
      bool wants = !m.full(p);
      for (std::size_t member : m.users_of(p))
        if (position_in(cells[p], member) > rank_i) wants = true;
      if (wants) out.push_back({i, p});
    }
  }
  return out;
}

struct RandomInstance {
  std::vector<PreferenceList> users;
  std::vector<PreferenceList> cells;
  std::vector<int> quotas;
};

// Random strict preferences over a random acceptability relation.
RandomInstance random_instance(Rng& rng, std::size_t n, std::size_t p) {
  RandomInstance inst;
  std::vector<std::vector<bool>> ok(n, std::vector<bool>(p));
  for (auto& row : ok)
    for (std::size_t j = 0; j < p; ++j) row[j] = rng.uniform() < 0.75;
  auto shuffled = [&](std::vector<std::size_t> v) {
    for (std::size_t a = v.size(); a > 1; --a) std::swap(v[a - 1], v[rng.next() % a]);
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> v;
    for (std::size_t j = 0; j < p; ++j)
      if (ok[i][j]) v.push_back(j);
    inst.users.push_back({i, shuffled(v)});
  }
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < n; ++i)
      if (ok[i][j]) v.push_back(i);
    inst.cells.push_back({j, shuffled(v)});
    inst.quotas.push_back(1 + static_cast<int>(rng.next() % 3));
  }
  return inst;
}

}  // namespace testing_support
