#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "cellmatch/matching_types.hpp"
#include "cellmatch/preferences.hpp"

namespace cellmatch {

struct RoundOutcome {
  Matching matching;
  std::size_t proposals = 0;       // applications sent to small cells
  std::size_t proposal_rounds = 0; // synchronous apply/hold/reject rounds
  std::size_t fallbacks = 0;       // users that exhausted their list
};

/// User-proposing deferred acceptance on frozen preference lists. Free users
/// apply in synchronous rounds to their next cell; each cell holds its best
/// applicants up to quota and rejects the rest. Users that run out of cells
/// stay on the macro station. A cell rejects any user absent from its list.
inline RoundOutcome deferred_acceptance_round(std::span<const PreferenceList> user_prefs,
                                              std::span<const PreferenceList> cell_prefs,
                                              std::span<const int> quotas) {
  const std::size_t n_users = user_prefs.size();
  const std::size_t n_cells = cell_prefs.size();
  if (quotas.size() != n_cells) throw std::invalid_argument("one quota per cell required");

  constexpr std::size_t kUnranked = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> rank(n_cells, std::vector<std::size_t>(n_users, kUnranked));
  for (std::size_t p = 0; p < n_cells; ++p) {
    const auto& list = cell_prefs[p].ranked;
    for (std::size_t pos = 0; pos < list.size(); ++pos) rank[p].at(list[pos]) = pos;
  }

  RoundOutcome out{Matching(n_users, std::vector<int>(quotas.begin(), quotas.end())), 0, 0, 0};
  std::vector<std::size_t> next(n_users, 0);
  std::vector<std::vector<std::size_t>> held(n_cells);
  std::vector<std::size_t> free_users(n_users);
  for (std::size_t i = 0; i < n_users; ++i) free_users[i] = i;

  std::vector<std::vector<std::size_t>> incoming(n_cells);
  while (true) {
    bool any = false;
    for (auto& in : incoming) in.clear();
    for (std::size_t i : free_users) {
      const auto& list = user_prefs[i].ranked;
      if (next[i] >= list.size()) continue;
      const std::size_t p = list[next[i]++];
      if (p >= n_cells) throw std::out_of_range("preference list names unknown cell");
      incoming[p].push_back(i);
      ++out.proposals;
      any = true;
    }
    if (!any) break;
    ++out.proposal_rounds;

    free_users.clear();
    for (std::size_t p = 0; p < n_cells; ++p) {
      if (incoming[p].empty()) continue;
      auto& pool = held[p];
      for (std::size_t i : incoming[p]) {
        if (rank[p][i] == kUnranked)
          free_users.push_back(i);
        else
          pool.push_back(i);
      }
      std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) { return rank[p][a] < rank[p][b]; });
      const auto keep = std::min(pool.size(), static_cast<std::size_t>(quotas[p]));
      for (std::size_t k = keep; k < pool.size(); ++k) free_users.push_back(pool[k]);
      pool.resize(keep);
    }
    std::sort(free_users.begin(), free_users.end());
  }

  for (std::size_t p = 0; p < n_cells; ++p)
    for (std::size_t i : held[p]) out.matching.assign(i, static_cast<int>(p));
  out.fallbacks = out.matching.macro_load();
  return out;
}

struct SolverConfig {
  std::size_t max_outer = 100;
  bool verify = true;
};

struct OuterIteration {
  std::size_t proposals = 0;
  std::size_t proposal_rounds = 0;
  std::size_t fallbacks = 0;
};

struct SolveReport {
  Matching final;
  std::size_t outer_iterations = 0;
  std::size_t inner_proposal_rounds = 0;
  std::size_t proposals = 0;
  bool converged = false;
  bool cycle_detected = false;
  bool stability_checked = false;
  bool stable = false;
  std::size_t blocking_pairs = 0;
  std::vector<OuterIteration> iterations;

  /// Applications per user until the final matching first appeared: each
  /// proposal to a small cell counts once, and so does a fall back to the
  /// macro station. The round that only confirms a fixed point is excluded.
  double applications_per_user() const {
    if (iterations.empty() || final.n_users() == 0) return 0.0;
    std::size_t counted = iterations.size();
    if (converged && counted > 1) --counted;
    std::size_t total = 0;
    for (std::size_t k = 0; k < counted; ++k) total += iterations[k].proposals + iterations[k].fallbacks;
    return static_cast<double>(total) / static_cast<double>(final.n_users());
  }
};

inline double total_user_utility(const GameModel& model, const Matching& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < model.n_users(); ++i) sum += served_utility(model, m, i);
  return sum;
}

struct BlockingPair {
  std::size_t user = 0;
  std::size_t cell = 0;

  friend bool operator==(const BlockingPair&, const BlockingPair&) = default;
};

struct StabilityReport {
  bool stable = true;
  std::vector<BlockingPair> blocking;
};

/// Member of `cell` the cell would give up first: lowest cell utility under
/// m, the higher id among ties.
inline std::size_t least_preferred_member(const GameModel& model, const Matching& m, std::size_t cell) {
  const auto& members = m.users_of(cell);
  if (members.empty()) throw std::logic_error("cell has no members");
  std::size_t worst = members.front();
  double worst_value = cell_utility(model, m, cell, worst);
  for (std::size_t k = 1; k < members.size(); ++k) {
    const double v = cell_utility(model, m, cell, members[k]);
    if (v <= worst_value) {
      worst = members[k];
      worst_value = v;
    }
  }
  return worst;
}

/// Result of moving `user` into `cell`, evicting the least preferred member
/// to the macro station when the cell is full.
struct Deviation {
  Matching after;
  std::optional<std::size_t> evicted;
  double user_gain = 0.0;  // U_user(after) - U_user(before)
  double cell_gain = 0.0;  // V_cell(after) - V_cell(before)

  bool blocks() const noexcept { return user_gain > 0.0 && cell_gain > 0.0; }
};

/// Evaluates the single deviation (user -> cell) against m. Members of the
/// cell are scored with their own cell as previous cell; the newcomer is
/// scored with the cell it leaves, at that cell's load before leaving. The
/// cell gain is accumulated as per-member differences so unchanged members
/// cancel exactly.
inline Deviation evaluate_deviation(const GameModel& model, const Matching& m, std::size_t user, std::size_t cell) {
  if (m.cell_of(user) == static_cast<int>(cell)) throw std::invalid_argument("user already in cell");
  Deviation d{m, std::nullopt, 0.0, 0.0};
  if (m.full(cell)) {
    d.evicted = least_preferred_member(model, m, cell);
    d.after.assign(*d.evicted, kMacro);
  }
  d.after.assign(user, static_cast<int>(cell));

  d.user_gain = user_utility(model, d.after, user, cell) - served_utility(model, m, user);

  double gain = cell_utility(model, m, cell, user);
  for (std::size_t member : m.users_of(cell)) {
    const double before = cell_utility(model, m, cell, member);
    if (d.evicted && *d.evicted == member)
      gain -= before;
    else
      gain += cell_utility(model, d.after, cell, member) - before;
  }
  d.cell_gain = gain;
  return d;
}

/// Single-deviation stability: (n, p) blocks m when both strictly gain from
/// the deviation built by evaluate_deviation. Only mutually acceptable pairs
/// are considered.
inline StabilityReport verify_stability(const GameModel& model, const Matching& m) {
  StabilityReport r;
  for (std::size_t n = 0; n < model.n_users(); ++n) {
    for (std::size_t p : model.candidates(n)) {
      if (m.cell_of(n) == static_cast<int>(p)) continue;
      if (evaluate_deviation(model, m, n, p).blocks()) r.blocking.push_back({n, p});
    }
  }
  r.stable = r.blocking.empty();
  return r;
}

/// Iterates deferred acceptance on preferences rebuilt from the previous
/// matching until the matching repeats. Starts with everybody on the macro
/// station. A recurrence of an older matching stops the loop as a cycle, in
/// which case (and on hitting max_outer) the best matching seen by total
/// user utility is returned.
inline SolveReport solve(const GameModel& model, const SolverConfig& config = {}) {
  SolveReport report;
  Matching current = model.initial_matching();
  std::unordered_set<Matching, MatchingHash> visited{current};
  Matching best = current;
  double best_value = total_user_utility(model, current);
  const auto quotas = model.quotas();

  while (report.outer_iterations < config.max_outer) {
    const PreferenceProfile prefs = build_preferences(model, current);
    RoundOutcome round = deferred_acceptance_round(prefs.users, prefs.cells, quotas);
    round.matching.audit();
    ++report.outer_iterations;
    report.inner_proposal_rounds += round.proposal_rounds;
    report.proposals += round.proposals;
    report.iterations.push_back({round.proposals, round.proposal_rounds, round.fallbacks});

    if (round.matching == current) {
      report.converged = true;
      break;
    }
    if (visited.count(round.matching)) {
      report.cycle_detected = true;
      break;
    }
    const double value = total_user_utility(model, round.matching);
    if (value > best_value) {
      best_value = value;
      best = round.matching;
    }
    visited.insert(round.matching);
    current = std::move(round.matching);
  }

  report.final = report.converged ? current : best;
  if (report.converged && config.verify) {
    const auto st = verify_stability(model, report.final);
    report.stability_checked = true;
    report.stable = st.stable;
    report.blocking_pairs = st.blocking.size();
  }
  return report;
}

/// One-line text record of a solve, "key=value" fields separated by spaces.
inline std::string to_record(const SolveReport& r) {
  std::ostringstream os;
  os << "converged=" << r.converged << " cycle=" << r.cycle_detected << " stable=" << r.stable
     << " checked=" << r.stability_checked << " outer=" << r.outer_iterations
     << " rounds=" << r.inner_proposal_rounds << " proposals=" << r.proposals << " assignment=";
  const auto& a = r.final.assignment();
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  return os.str();
}

struct BaselineConfig {
  bool enforce_quota = true;
};

/// Max-SINR association. Each user picks the small cell with the strongest
/// SINR among those it can hear (coverage and the SINR floor, when enabled,
/// still apply; HF and preparation-time context is ignored). Each cell keeps
/// its quota of strongest applicants; the rest fall back to the macro.
inline Matching max_sinr_baseline(const GameModel& model, const BaselineConfig& config = {}) {
  const auto& s = model.scenario();
  std::vector<std::vector<std::size_t>> applicants(model.n_cells());
  for (std::size_t i = 0; i < model.n_users(); ++i) {
    int choice = kMacro;
    double best = -1.0;
    for (std::size_t p = 0; p < model.n_cells(); ++p) {
      if (s.game.require_coverage && !model.in_coverage(i, p)) continue;
      const double v = model.cell_sinr(i, p);
      if (s.radio.enforce_min_sinr && v < s.radio.min_sinr_linear()) continue;
      if (v > best) {
        best = v;
        choice = static_cast<int>(p);
      }
    }
    if (choice != kMacro) applicants[static_cast<std::size_t>(choice)].push_back(i);
  }

  std::vector<int> quotas = model.quotas();
  if (!config.enforce_quota)
    for (auto& q : quotas) q = std::max(q, static_cast<int>(model.n_users()));
  Matching m(model.n_users(), quotas);
  for (std::size_t p = 0; p < model.n_cells(); ++p) {
    auto& pool = applicants[p];
    std::stable_sort(pool.begin(), pool.end(),
                     [&](std::size_t a, std::size_t b) { return model.cell_sinr(a, p) > model.cell_sinr(b, p); });
    const auto keep = std::min(pool.size(), static_cast<std::size_t>(quotas[p]));
    for (std::size_t k = 0; k < keep; ++k) m.assign(pool[k], static_cast<int>(p));
  }
  return m;
}

}  // namespace cellmatch
