#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cellmatch/random.hpp"

namespace cellmatch {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Circular coverage region of a small cell. A trajectory crossing the
/// inner circle of radius `r` suffers a handover failure; a handover out of
/// the cell must complete before the user is `r_exit` from the center.
struct CellGeometry {
  Point center;
  double R = 0.0;       // coverage radius [m]
  double r = 0.0;       // handover-failure radius [m]
  double r_exit = 0.0;  // exit radius [m], r_exit > R

  friend bool operator==(const CellGeometry&, const CellGeometry&) = default;
};

inline constexpr double kDefaultExitFactor = 1.1;

inline void validate(const CellGeometry& g) {
  if (!std::isfinite(g.center.x) || !std::isfinite(g.center.y))
    throw std::domain_error("cell center must be finite");
  if (!(g.r > 0.0 && g.r < g.R && g.R < g.r_exit))
    throw std::domain_error("cell geometry requires 0 < r < R < r_exit");
}

/// Chord D = 2 R cos(theta) cut by a straight trajectory entering at angle theta.
inline double chord_length(const CellGeometry& g, double theta) {
  if (!(std::abs(theta) < std::numbers::pi / 2))
    throw std::domain_error("trajectory angle must satisfy |theta| < pi/2");
  return 2.0 * g.R * std::cos(theta);
}

inline double interaction_time(double chord, double speed) {
  if (!(speed > 0.0)) throw std::domain_error("speed must be positive");
  if (chord < 0.0) throw std::domain_error("chord length must be non-negative");
  return chord / speed;
}

/// Pr(D < d) for theta uniform on (-pi/2, pi/2).
inline double chord_cdf(const CellGeometry& g, double d) {
  if (!(d >= 0.0 && d <= 2.0 * g.R)) throw std::domain_error("chord length outside [0, 2R]");
  return 1.0 - (2.0 / std::numbers::pi) * std::acos(d / (2.0 * g.R));
}

/// Probability that a uniformly oriented trajectory crosses the HF circle,
/// i.e. Pr(D >= 2 sqrt(R^2 - r^2)).
inline double hf_probability(const CellGeometry& g) {
  if (!(g.r >= 0.0) || g.r > g.R) throw std::domain_error("HF radius must satisfy 0 <= r <= R");
  const double ratio = g.r / g.R;
  return (2.0 / std::numbers::pi) * std::acos(std::sqrt(1.0 - ratio * ratio));
}

struct LinearHf {
  double value = 0.0;
  bool exact_fallback = false;  // ratio above kLinearHfMaxRatio; value is exact
};

inline constexpr double kLinearHfMaxRatio = 0.2;

// First-order expansion 2r/(pi R); only trusted for small r/R.
inline LinearHf hf_probability_linear(const CellGeometry& g) {
  if (!(g.r >= 0.0) || g.r > g.R) throw std::domain_error("HF radius must satisfy 0 <= r <= R");
  const double ratio = g.r / g.R;
  if (ratio > kLinearHfMaxRatio) return {hf_probability(g), true};
  return {2.0 * ratio / std::numbers::pi, false};
}

/// Distribution of user speed as Pr(V < x). Either a point mass or a
/// piecewise-linear CDF through (speed, probability) knots.
class SpeedDistribution {
 public:
  static SpeedDistribution deterministic(double speed) {
    if (!(speed >= 0.0)) throw std::domain_error("speed must be non-negative");
    SpeedDistribution d;
    d.point_ = speed;
    return d;
  }

  static SpeedDistribution piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw std::invalid_argument("piecewise-linear speed CDF needs at least two knots");
    for (std::size_t k = 1; k < knots.size(); ++k) {
      if (!(knots[k].first > knots[k - 1].first) || knots[k].second < knots[k - 1].second)
        throw std::invalid_argument("speed CDF knots must be increasing in speed and nondecreasing in probability");
    }
    if (knots.front().second != 0.0 || knots.back().second != 1.0)
      throw std::invalid_argument("speed CDF must run from 0 to 1");
    SpeedDistribution d;
    d.knots_ = std::move(knots);
    return d;
  }

  double cdf_below(double x) const noexcept {
    if (point_) return *point_ < x ? 1.0 : 0.0;
    if (x <= knots_.front().first) return 0.0;
    if (x >= knots_.back().first) return 1.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const auto& k) { return v < k.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }

 private:
  SpeedDistribution() = default;
  std::optional<double> point_;
  std::vector<std::pair<double, double>> knots_;
};

inline constexpr double kDefaultHandoverDeadline = 2.0;  // t_m [s]

/// HF probability for a handover from `src` into `dst` whose centers are
/// `center_distance` apart. Returns nullopt when the geometry admits no
/// handover (centers outside the closed window [R_src + r_dst, r_exit_src + R_dst]).
inline std::optional<double> inter_cell_hf_probability(const CellGeometry& src, const CellGeometry& dst,
                                                       double center_distance, const SpeedDistribution& speed,
                                                       double deadline = kDefaultHandoverDeadline) {
  if (!(center_distance > 0.0)) throw std::domain_error("center distance must be positive");
  if (!(deadline > 0.0)) throw std::domain_error("handover deadline must be positive");
  if (!(src.r_exit > src.R)) throw std::domain_error("exit radius must exceed coverage radius");
  if (center_distance > src.r_exit + dst.R || center_distance < src.R + dst.r) return std::nullopt;
  const double fast_enough = speed.cdf_below((src.r_exit - src.R) / deadline);
  return 1.0 - fast_enough * (1.0 - hf_probability(dst));
}

inline std::optional<double> inter_cell_hf_probability(const CellGeometry& src, const CellGeometry& dst,
                                                       double center_distance, double speed,
                                                       double deadline = kDefaultHandoverDeadline) {
  return inter_cell_hf_probability(src, dst, center_distance, SpeedDistribution::deterministic(speed), deadline);
}

/// Monte-Carlo estimate of hf_probability: draw entry angles and count
/// chords whose perpendicular offset R sin|theta| falls inside the HF circle.
/// The test is done on the chord (2R cos(theta) > 2 sqrt(R^2 - r^2)), which
/// stays exact near |theta| = pi/2 where sin rounds to 1.
inline double mc_hf_oracle(const CellGeometry& g, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (!(g.R > 0.0)) throw std::domain_error("coverage radius must be positive");
  const double ratio = g.r / g.R;
  const double tangent_cos = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double theta = rng.uniform_open(-std::numbers::pi / 2, std::numbers::pi / 2);
    if (std::cos(theta) > tangent_cos) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace cellmatch
