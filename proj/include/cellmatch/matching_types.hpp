#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellmatch {

// Assignment marker for users served by the (nearest) macro station.
inline constexpr int kMacro = -1;

/// Many-to-one assignment of users to small cells. Each user holds at most
/// one cell, each cell at most its quota of users; unassigned users sit on
/// the macro station. Both directions are kept in sync.
class Matching {
 public:
  Matching() = default;

  Matching(std::size_t users, std::vector<int> quotas)
      : user_to_cell_(users, kMacro), cell_to_users_(quotas.size()), quotas_(std::move(quotas)) {
    for (int q : quotas_)
      if (q < 1) throw std::invalid_argument("quota must be >= 1");
  }

  std::size_t n_users() const noexcept { return user_to_cell_.size(); }
  std::size_t n_cells() const noexcept { return cell_to_users_.size(); }

  int cell_of(std::size_t user) const { return user_to_cell_.at(user); }
  bool on_macro(std::size_t user) const { return cell_of(user) == kMacro; }

  // Members of a cell, ascending by user id.
  const std::vector<std::size_t>& users_of(std::size_t cell) const { return cell_to_users_.at(cell); }

  std::size_t occupancy(std::size_t cell) const { return users_of(cell).size(); }
  int quota(std::size_t cell) const { return quotas_.at(cell); }
  bool full(std::size_t cell) const { return occupancy(cell) >= static_cast<std::size_t>(quota(cell)); }
  std::span<const int> quotas() const noexcept { return quotas_; }

  std::size_t macro_load() const noexcept {
    return static_cast<std::size_t>(std::count(user_to_cell_.begin(), user_to_cell_.end(), kMacro));
  }

  /// Moves `user` to `cell` (or kMacro). Throws if the target is full.
  void assign(std::size_t user, int cell) {
    const int from = cell_of(user);
    if (from == cell) return;
    if (cell != kMacro) {
      if (cell < 0 || static_cast<std::size_t>(cell) >= n_cells()) throw std::out_of_range("cell index out of range");
      if (full(static_cast<std::size_t>(cell))) throw std::logic_error("cell quota exceeded");
    }
    if (from != kMacro) {
      auto& members = cell_to_users_[static_cast<std::size_t>(from)];
      members.erase(std::find(members.begin(), members.end(), user));
    }
    if (cell != kMacro) {
      auto& members = cell_to_users_[static_cast<std::size_t>(cell)];
      members.insert(std::upper_bound(members.begin(), members.end(), user), user);
    }
    user_to_cell_[user] = cell;
  }

  const std::vector<int>& assignment() const noexcept { return user_to_cell_; }

  /// Checks quota and bidirectional consistency; throws std::logic_error.
  void audit() const {
    std::vector<std::size_t> seen(n_cells(), 0);
    for (std::size_t n = 0; n < n_users(); ++n) {
      const int c = user_to_cell_[n];
      if (c == kMacro) continue;
      if (c < 0 || static_cast<std::size_t>(c) >= n_cells())
        throw std::logic_error("user " + std::to_string(n) + " assigned to unknown cell");
      const auto& m = cell_to_users_[static_cast<std::size_t>(c)];
      if (!std::binary_search(m.begin(), m.end(), n))
        throw std::logic_error("user " + std::to_string(n) + " missing from its cell's member list");
      ++seen[static_cast<std::size_t>(c)];
    }
    for (std::size_t p = 0; p < n_cells(); ++p) {
      const auto& m = cell_to_users_[p];
      if (m.size() != seen[p] || !std::is_sorted(m.begin(), m.end()) ||
          std::adjacent_find(m.begin(), m.end()) != m.end())
        throw std::logic_error("cell " + std::to_string(p) + " member list inconsistent");
      if (m.size() > static_cast<std::size_t>(quotas_[p]))
        throw std::logic_error("cell " + std::to_string(p) + " exceeds its quota");
    }
  }

  friend bool operator==(const Matching& a, const Matching& b) {
    return a.user_to_cell_ == b.user_to_cell_ && a.quotas_ == b.quotas_;
  }

 private:
  std::vector<int> user_to_cell_;
  std::vector<std::vector<std::size_t>> cell_to_users_;
  std::vector<int> quotas_;
};

struct MatchingHash {
  std::size_t operator()(const Matching& m) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int c : m.assignment()) h = (h ^ std::hash<int>{}(c)) * 0x100000001b3ULL;
    return h;
  }
};

}  // namespace cellmatch
