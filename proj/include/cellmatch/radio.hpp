#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellmatch/geometry.hpp"
#include "cellmatch/random.hpp"

namespace cellmatch {

inline double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) noexcept { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

struct RadioConfig {
  double noise_power = dbm_to_watts(-121.0);  // sigma^2 [W]
  double pathloss_exponent = 3.0;
  double rayleigh_scale = 2.0;  // amplitude scale; power gain has mean 2 scale^2
  double tx_power_pico = dbm_to_watts(30.0);
  double tx_power_macro = dbm_to_watts(46.0);
  double min_sinr_db = 9.56;
  bool fading = true;
  bool enforce_min_sinr = true;

  void validate() const {
    if (!(noise_power > 0.0)) throw std::invalid_argument("radio.noise_power must be > 0");
    if (!(pathloss_exponent >= 2.0)) throw std::invalid_argument("radio.pathloss_exponent must be >= 2");
    if (!(rayleigh_scale > 0.0)) throw std::invalid_argument("radio.rayleigh_scale must be > 0");
    if (!(tx_power_pico > 0.0)) throw std::invalid_argument("radio.tx_power_pico must be > 0");
    if (!(tx_power_macro > 0.0)) throw std::invalid_argument("radio.tx_power_macro must be > 0");
  }

  double min_sinr_linear() const noexcept { return db_to_linear(min_sinr_db); }

  friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

/// Power gains c_ij, one row per user and one column per base station.
/// Column 0 is the macro base station; column 1 + p is small cell p.
class ChannelMatrix {
 public:
  ChannelMatrix() = default;
  ChannelMatrix(std::size_t users, std::size_t stations) : users_(users), stations_(stations), gains_(users * stations) {}

  std::size_t users() const noexcept { return users_; }
  std::size_t stations() const noexcept { return stations_; }

  double operator()(std::size_t user, std::size_t station) const { return gains_.at(user * stations_ + station); }

  void set(std::size_t user, std::size_t station, double gain) {
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw std::domain_error("channel gain must be finite and >= 0");
    gains_.at(user * stations_ + station) = gain;
  }

  std::span<const double> row(std::size_t user) const {
    return std::span<const double>(gains_).subspan(user * stations_, stations_);
  }

  friend bool operator==(const ChannelMatrix&, const ChannelMatrix&) = default;

 private:
  std::size_t users_ = 0;
  std::size_t stations_ = 0;
  std::vector<double> gains_;
};

inline constexpr double kMinLinkDistance = 1.0;  // close-in clamp [m]

inline double pathloss_gain(double dist, double exponent) noexcept {
  return std::pow(std::max(dist, kMinLinkDistance), -exponent);
}

/// c_ij = g_ij d_ij^-exponent, g_ij exponential with mean 2 scale^2 (squared
/// Rayleigh amplitude), or 1 when fading is disabled. Draw order is row-major.
inline ChannelMatrix realize_channels(std::span<const Point> users, std::span<const Point> stations,
                                      const RadioConfig& config, std::uint64_t seed) {
  config.validate();
  ChannelMatrix m(users.size(), stations.size());
  Rng rng(seed);
  const double mean_gain = 2.0 * config.rayleigh_scale * config.rayleigh_scale;
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t b = 0; b < stations.size(); ++b) {
      const double g = config.fading ? rng.exponential(mean_gain) : 1.0;
      m.set(i, b, g * pathloss_gain(distance(users[i], stations[b]), config.pathloss_exponent));
    }
  }
  return m;
}

inline double sinr(const ChannelMatrix& channels, std::span<const double> powers, double noise_power,
                   std::size_t user, std::size_t station) {
  if (station >= channels.stations() || powers.size() != channels.stations())
    throw std::out_of_range("station index or power vector does not match channel matrix");
  const auto gains = channels.row(user);
  double interference = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k)
    if (k != station) interference += powers[k] * gains[k];
  return powers[station] * gains[station] / (interference + noise_power);
}

/// Per-station transmit powers under the column convention above.
inline std::vector<double> station_powers(const RadioConfig& config, std::size_t small_cells) {
  std::vector<double> p(small_cells + 1, config.tx_power_pico);
  p[0] = config.tx_power_macro;
  return p;
}

inline double sinr(const ChannelMatrix& channels, const RadioConfig& config, std::size_t user, std::size_t station) {
  const auto powers = station_powers(config, channels.stations() - 1);
  return sinr(channels, powers, config.noise_power, user, station);
}

// Spectral efficiency shared equally among the `load` users of a cell.
inline double rate_over_load(double sinr_value, long load) {
  if (load < 0) throw std::domain_error("load must be >= 0");
  return std::log2(1.0 + sinr_value) / static_cast<double>(std::max(1L, load));
}

inline double rate_over_load(const ChannelMatrix& channels, const RadioConfig& config, std::size_t user,
                             std::size_t station, long load) {
  return rate_over_load(sinr(channels, config, user, station), load);
}

}  // namespace cellmatch
