#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cellmatch/context.hpp"
#include "cellmatch/random.hpp"

using namespace cellmatch;

namespace {

SmallCellProfile cell(double R, double r, double prep_time) {
  SmallCellProfile c;
  c.geometry = {{0.0, 0.0}, R, r, 1.1 * R};
  c.prep_time = prep_time;
  return c;
}

UserProfile user(double theta, double speed) {
  UserProfile u;
  u.tau = 1.0;
  u.theta = theta;
  u.speed = speed;
  return u;
}

}  // namespace

TEST(Qoe, Examples) {
  EXPECT_DOUBLE_EQ(qoe(3.0, 3.0), 0.5);
  EXPECT_NEAR(qoe(21.0, 1.0), 1.0 / (1.0 + std::exp(20.0)), 1e-20);
  EXPECT_NEAR(qoe(21.0, 1.0), 2.06e-9, 0.01e-9);
  EXPECT_NEAR(qoe(0.0, 5.0), 0.9933071490757153, 1e-12);
}

TEST(Qoe, StableInTheTails) {
  EXPECT_GE(qoe(1000.0, 0.5), 0.0);
  EXPECT_LT(qoe(1000.0, 0.5), 1e-300);
  EXPECT_LE(qoe(0.0, 800.0), 1.0);
  EXPECT_TRUE(std::isfinite(qoe(1e6, 1.0)));
}

TEST(Qoe, LogisticSymmetry) {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double tau = rng.uniform(0.5, 5.0);
    const double t = rng.uniform(0.0, 2.0 * tau);
    EXPECT_NEAR(qoe(t, tau) + qoe(2.0 * tau - t, tau), 1.0, 1e-12);
  }
}

TEST(Qoe, MonotoneAndBounded) {
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double tau = rng.uniform(0.5, 5.0);
    const double t = rng.uniform(0.0, 30.0);
    const double dt = rng.uniform(1e-3, 1.0);
    const double v = qoe(t, tau);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(qoe(t + dt, tau), v);
    EXPECT_GT(qoe(t, tau + dt), v);
  }
}

TEST(Qoe, RejectsBadInput) {
  EXPECT_THROW(qoe(-1.0, 1.0), std::domain_error);
  EXPECT_THROW(qoe(1.0, 0.0), std::domain_error);
}

TEST(AcceptableToCell, Examples) {
  // D = 1000 at theta = 0 with R = 500; D = 100 at cos(theta) = 0.1
  EXPECT_TRUE(is_acceptable_to_cell(user(0.0, 10.0), cell(500, 10, 50)));
  EXPECT_FALSE(is_acceptable_to_cell(user(std::acos(0.1), 10.0), cell(500, 10, 50)));
  EXPECT_TRUE(is_acceptable_to_cell(user(1.5, 0.0), cell(500, 10, 1e9)));
}

TEST(AcceptableToCell, BoundaryIsAcceptable) {
  // D / V = 1000 / 10 = 100 exactly
  EXPECT_TRUE(is_acceptable_to_cell(user(0.0, 10.0), cell(500, 10, 100.0)));
}

TEST(AcceptableToCell, MonotoneInSpeedAndChord) {
  Rng rng(9);
  for (int k = 0; k < 2000; ++k) {
    const double theta = rng.uniform_open(-1.5, 1.5);
    const double speed = rng.uniform(0.1, 20.0);
    const auto c = cell(rng.uniform(100, 300), 5, rng.uniform(1, 100));
    if (!is_acceptable_to_cell(user(theta, speed), c)) continue;
    EXPECT_TRUE(is_acceptable_to_cell(user(theta, speed * rng.uniform()), c));
    EXPECT_TRUE(is_acceptable_to_cell(user(theta * rng.uniform(), speed), c));
  }
}

TEST(AcceptableToUser, Examples) {
  RadioConfig radio;
  const double good = radio.min_sinr_linear() * 2.0;
  EXPECT_TRUE(is_acceptable_to_user(cell(500, 25, 0), 0.05, good, radio));
  EXPECT_FALSE(is_acceptable_to_user(cell(500, 250, 0), 0.05, good, radio));
  for (double r : {1.0, 100.0, 499.0}) EXPECT_TRUE(is_acceptable_to_user(cell(500, r, 0), 1.0, good, radio));
}

TEST(AcceptableToUser, SinrFloor) {
  RadioConfig radio;
  const double floor = radio.min_sinr_linear();
  EXPECT_TRUE(is_acceptable_to_user(cell(500, 25, 0), 0.05, floor, radio));
  EXPECT_FALSE(is_acceptable_to_user(cell(500, 25, 0), 0.05, floor * 0.999, radio));
  radio.enforce_min_sinr = false;
  EXPECT_TRUE(is_acceptable_to_user(cell(500, 25, 0), 0.05, 0.0, radio));
}

TEST(AcceptableToUser, ThresholdIsStrict) {
  RadioConfig radio;
  radio.enforce_min_sinr = false;
  const auto c = cell(500, 40, 0);
  const double p = hf_probability(c.geometry);
  EXPECT_FALSE(is_acceptable_to_user(c, p, 1.0, radio));
  EXPECT_TRUE(is_acceptable_to_user(c, std::nextafter(p, 1.0), 1.0, radio));
  // r/R = 0.08 sits just above a 5% threshold
  EXPECT_FALSE(is_acceptable_to_user(c, 0.05, 1.0, radio));
  EXPECT_THROW(is_acceptable_to_user(c, 0.0, 1.0, radio), std::domain_error);
}

TEST(Profiles, Validation) {
  UserProfile u;
  EXPECT_NO_THROW(u.validate());
  u.tau = 0.0;
  EXPECT_THROW(u.validate(), std::invalid_argument);
  u = {};
  u.theta = std::numbers::pi / 2;
  EXPECT_THROW(u.validate(), std::invalid_argument);
  u = {};
  u.speed = -1.0;
  EXPECT_THROW(u.validate(), std::invalid_argument);

  auto c = cell(100, 5, 0);
  EXPECT_NO_THROW(c.validate());
  c.quota = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = cell(100, 5, -1);
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
