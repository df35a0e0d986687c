#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "cellmatch/context.hpp"
#include "cellmatch/geometry.hpp"
#include "cellmatch/matching_types.hpp"
#include "cellmatch/radio.hpp"
#include "cellmatch/scenario.hpp"

namespace cellmatch {

/// Matching-independent quantities of a scenario: link SINRs (interference
/// comes from every station regardless of load), spectral efficiencies and
/// the mutual acceptability relation.
class GameModel {
 public:
  explicit GameModel(Scenario scenario) : s_(std::move(scenario)) {
    s_.validate();
    const std::size_t n = s_.n_users();
    const std::size_t b = s_.n_cells() + 1;
    const auto powers = s_.powers();
    sinr_.resize(n * b);
    efficiency_.resize(n * b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < b; ++k) {
        const double v = cellmatch::sinr(s_.channels, powers, s_.radio.noise_power, i, k);
        sinr_[i * b + k] = v;
        efficiency_[i * b + k] = std::log2(1.0 + v);
      }
    }
    candidates_.resize(n);
    applicants_.resize(s_.n_cells());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < s_.n_cells(); ++p) {
        if (user_accepts(i, p) && cell_accepts(p, i)) {
          candidates_[i].push_back(p);
          applicants_[p].push_back(i);
        }
      }
    }
  }

  const Scenario& scenario() const noexcept { return s_; }
  std::size_t n_users() const noexcept { return s_.n_users(); }
  std::size_t n_cells() const noexcept { return s_.n_cells(); }

  // Station index convention: 0 = macro, 1 + p = small cell p.
  double station_sinr(std::size_t user, std::size_t station) const {
    return sinr_.at(user * (n_cells() + 1) + station);
  }
  double station_efficiency(std::size_t user, std::size_t station) const {
    return efficiency_.at(user * (n_cells() + 1) + station);
  }
  double cell_sinr(std::size_t user, std::size_t cell) const { return station_sinr(user, cell + 1); }
  double cell_efficiency(std::size_t user, std::size_t cell) const { return station_efficiency(user, cell + 1); }

  double reliability(std::size_t cell) const {
    const auto& g = s_.cells.at(cell).geometry;
    return g.R / g.r;
  }

  bool in_coverage(std::size_t user, std::size_t cell) const {
    const auto& g = s_.cells.at(cell).geometry;
    return distance(s_.users.at(user).position, g.center) <= g.R;
  }

  bool user_accepts(std::size_t user, std::size_t cell) const {
    if (s_.game.require_coverage && !in_coverage(user, cell)) return false;
    return is_acceptable_to_user(s_.cells[cell], s_.game.hf_threshold, cell_sinr(user, cell), s_.radio);
  }

  bool cell_accepts(std::size_t cell, std::size_t user) const {
    return is_acceptable_to_cell(s_.users.at(user), s_.cells.at(cell));
  }

  bool mutually_acceptable(std::size_t user, std::size_t cell) const {
    const auto& c = candidates_.at(user);
    return std::binary_search(c.begin(), c.end(), cell);
  }

  // Mutually acceptable cells of a user / users of a cell, ascending by id.
  const std::vector<std::size_t>& candidates(std::size_t user) const { return candidates_.at(user); }
  const std::vector<std::size_t>& applicants(std::size_t cell) const { return applicants_.at(cell); }

  std::vector<int> quotas() const {
    std::vector<int> q;
    q.reserve(n_cells());
    for (const auto& c : s_.cells) q.push_back(c.quota);
    return q;
  }

  Matching initial_matching() const { return Matching(n_users(), quotas()); }

 private:
  Scenario s_;
  std::vector<double> sinr_;
  std::vector<double> efficiency_;
  std::vector<std::vector<std::size_t>> candidates_;
  std::vector<std::vector<std::size_t>> applicants_;
};

/// Load the user would see in `cell` if admitted under `m`. A user already
/// in the cell counts itself once; a newcomer to a full cell displaces a
/// member, so the load stays at the quota.
inline std::size_t prospective_load(const Matching& m, std::size_t user, std::size_t cell) {
  if (m.cell_of(user) == static_cast<int>(cell)) return m.occupancy(cell);
  return std::min(m.occupancy(cell) + 1, static_cast<std::size_t>(m.quota(cell)));
}

/// Reliability-weighted rate over load, (R/r) log2(1 + SINR) / max(1, K).
inline double user_utility(const GameModel& model, const Matching& m, std::size_t user, std::size_t cell) {
  return model.reliability(cell) *
         rate_over_load(model.cell_sinr(user, cell), static_cast<long>(prospective_load(m, user, cell)));
}

/// Utility of being served by the macro station; R/r is replaced by the
/// configured macro reliability.
inline double macro_utility(const GameModel& model, const Matching& m, std::size_t user) {
  const std::size_t load = m.macro_load() + (m.on_macro(user) ? 0 : 1);
  return model.scenario().game.macro_reliability *
         rate_over_load(model.station_sinr(user, 0), static_cast<long>(load));
}

// Utility of the user's current assignment under m.
inline double served_utility(const GameModel& model, const Matching& m, std::size_t user) {
  const int c = m.cell_of(user);
  return c == kMacro ? macro_utility(model, m, user) : user_utility(model, m, user, static_cast<std::size_t>(c));
}

/// Offloading term of the cell utility for a user whose previous cell is
/// `source` (kMacro or a small cell) carrying `load` users.
inline double offload_factor(const GameModel& model, const Matching& m, int source, std::size_t load) {
  const int q = source == kMacro ? model.scenario().mbs_quota() : m.quota(static_cast<std::size_t>(source));
  return 1.0 + std::log(static_cast<double>(std::max<std::size_t>(1, load)) / static_cast<double>(q));
}

/// Cell utility [1 + ln(max(1, k') / q')] / tau, where k' and q' belong to the
/// user's current serving cell under m. May be negative.
inline double cell_utility(const GameModel& model, const Matching& m, std::size_t cell, std::size_t user) {
  (void)cell;  // the value depends on the applicant only, not on which cell scores it
  const int source = m.cell_of(user);
  const std::size_t load = source == kMacro ? m.macro_load() : m.occupancy(static_cast<std::size_t>(source));
  return offload_factor(model, m, source, load) / model.scenario().users.at(user).tau;
}

struct PreferenceList {
  std::size_t owner = 0;
  std::vector<std::size_t> ranked;

  friend bool operator==(const PreferenceList&, const PreferenceList&) = default;
};

namespace detail {

template <typename Score>
PreferenceList rank_by(std::size_t owner, std::span<const std::size_t> items, Score score) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(items.size());
  for (std::size_t id : items) scored.emplace_back(score(id), id);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  scored.erase(std::unique(scored.begin(), scored.end(),
                           [](const auto& a, const auto& b) { return a.second == b.second; }),
               scored.end());
  PreferenceList out{owner, {}};
  out.ranked.reserve(scored.size());
  for (const auto& [value, id] : scored) out.ranked.push_back(id);
  return out;
}

}  // namespace detail

/// Candidate cells by descending user utility under m; ties go to the lower id.
inline PreferenceList build_user_preferences(const GameModel& model, const Matching& m, std::size_t user,
                                             std::span<const std::size_t> cells) {
  return detail::rank_by(user, cells, [&](std::size_t p) { return user_utility(model, m, user, p); });
}

inline PreferenceList build_cell_preferences(const GameModel& model, const Matching& m, std::size_t cell,
                                             std::span<const std::size_t> users) {
  return detail::rank_by(cell, users, [&](std::size_t n) { return cell_utility(model, m, cell, n); });
}

struct PreferenceProfile {
  std::vector<PreferenceList> users;
  std::vector<PreferenceList> cells;
};

// Every agent's list over its mutually acceptable partners, under m.
inline PreferenceProfile build_preferences(const GameModel& model, const Matching& m) {
  PreferenceProfile prefs;
  prefs.users.reserve(model.n_users());
  for (std::size_t i = 0; i < model.n_users(); ++i)
    prefs.users.push_back(build_user_preferences(model, m, i, model.candidates(i)));
  prefs.cells.reserve(model.n_cells());
  for (std::size_t p = 0; p < model.n_cells(); ++p)
    prefs.cells.push_back(build_cell_preferences(model, m, p, model.applicants(p)));
  return prefs;
}

}  // namespace cellmatch
