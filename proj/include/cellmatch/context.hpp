#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include "cellmatch/geometry.hpp"
#include "cellmatch/radio.hpp"

namespace cellmatch {

/// A user's context: urgency tau (same time unit as delivery times, ms by
/// default), trajectory angle theta and speed V.
struct UserProfile {
  std::size_t id = 0;
  Point position;
  double tau = 1.0;
  double theta = 0.0;
  double speed = 0.0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("user tau must be > 0");
    if (!(std::abs(theta) < std::numbers::pi / 2)) throw std::invalid_argument("user theta must satisfy |theta| < pi/2");
    if (!(speed >= 0.0)) throw std::invalid_argument("user speed must be >= 0");
    if (!std::isfinite(position.x) || !std::isfinite(position.y))
      throw std::invalid_argument("user position must be finite");
  }
};

struct SmallCellProfile {
  std::size_t id = 0;
  CellGeometry geometry;
  int quota = 4;
  double prep_time = 0.0;  // T_p [s]
  double tx_power = dbm_to_watts(30.0);

  friend bool operator==(const SmallCellProfile&, const SmallCellProfile&) = default;

  void validate() const {
    cellmatch::validate(geometry);
    if (quota < 1) throw std::invalid_argument("cell quota must be >= 1");
    if (!(prep_time >= 0.0)) throw std::invalid_argument("cell prep_time must be >= 0");
    if (!(tx_power > 0.0)) throw std::invalid_argument("cell tx_power must be > 0");
  }
};

/// Logistic quality of experience 1 / (1 + exp(t - tau)).
inline double qoe(double t, double tau) {
  if (!(t >= 0.0)) throw std::domain_error("delivery time must be >= 0");
  if (!(tau > 0.0)) throw std::domain_error("urgency must be > 0");
  const double x = t - tau;
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

/// Cell-side admission test: the interaction time D/V must cover the
/// preparation time. A stationary user never leaves, so it always qualifies.
inline bool is_acceptable_to_cell(const UserProfile& user, const SmallCellProfile& cell) {
  if (user.speed == 0.0) return true;
  return chord_length(cell.geometry, user.theta) / user.speed >= cell.prep_time;
}

/// User-side test: the cell's HF probability is below the threshold and,
/// when the radio floor is enforced, the link SINR reaches it.
inline bool is_acceptable_to_user(const SmallCellProfile& cell, double hf_threshold, double link_sinr,
                                  const RadioConfig& radio) {
  if (!(hf_threshold > 0.0 && hf_threshold <= 1.0)) throw std::domain_error("hf_threshold must lie in (0, 1]");
  if (!(hf_probability(cell.geometry) < hf_threshold)) return false;
  return !radio.enforce_min_sinr || link_sinr >= radio.min_sinr_linear();
}

}  // namespace cellmatch
