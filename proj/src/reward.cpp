#include "tossing/reward.hpp"

#include <algorithm>
#include <cmath>

#include "tossing/errors.hpp"

namespace tossing {

namespace {

double quadratic_term(double theta, double bar) {
  if (theta > bar) return 0.0;
  const double e = theta - bar;
  return e * e / (bar * bar);
}

double linear_term(double d, double low, double high) {
  if (d <= low) return 1.0;
  if (d > high) return 0.0;
  return -d / (high - low) + high / (high - low);
}

}  // namespace

void RewardConfig::validate() const {
  if (!(theta_bar_roll > 0.0) || !(theta_bar_yaw > 0.0)) {
    throw InvalidInput("rotation thresholds must be positive");
  }
  if (!(d_x_low < d_x_high) || !(d_y_low < d_y_high)) {
    throw InvalidInput("position thresholds need low < high");
  }
  if (!(d_bar_z >= 0.0)) throw InvalidInput("d_bar_z must be non-negative");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) throw InvalidInput("weights must be finite");
}

double release_reward(bool release_success) {
  return release_success ? kReleaseSuccessReward : kReleaseFailureReward;
}

double rotation_reward(double theta_roll, double theta_yaw, const RewardConfig& cfg) {
  if (!(theta_roll >= 0.0) || !(theta_yaw >= 0.0)) {
    throw InvalidInput("rotation errors must be non-negative");
  }
  return quadratic_term(theta_roll, cfg.theta_bar_roll) + quadratic_term(theta_yaw, cfg.theta_bar_yaw);
}

double position_reward(double d_x, double d_y, double d_z, const RewardConfig& cfg) {
  if (!(d_x >= 0.0) || !(d_y >= 0.0) || !(d_z >= 0.0)) {
    throw InvalidInput("landing distances must be non-negative");
  }
  const double r_x = linear_term(d_x, cfg.d_x_low, cfg.d_x_high);
  const double r_y = linear_term(d_y, cfg.d_y_low, cfg.d_y_high);
  const bool below = d_z < cfg.d_bar_z;
  const double r_z = (below != cfg.invert_rz) ? -1.0 : 0.0;
  return r_x + r_y + r_z;
}

double total_reward(const TossOutcome& outcome, const RewardConfig& cfg) {
  return release_reward(outcome.release_success) +
         cfg.alpha * rotation_reward(outcome.theta_roll, outcome.theta_yaw, cfg) +
         cfg.beta * position_reward(outcome.d_x, outcome.d_y, outcome.d_z, cfg);
}

double min_total_reward(const RewardConfig& cfg) {
  // Rotation spans [0, 2], position spans [-1, 2].
  return kReleaseFailureReward + std::min(0.0, 2.0 * cfg.alpha) +
         std::min(-cfg.beta, 2.0 * cfg.beta);
}

double max_total_reward(const RewardConfig& cfg) {
  return kReleaseSuccessReward + std::max(0.0, 2.0 * cfg.alpha) +
         std::max(-cfg.beta, 2.0 * cfg.beta);
}

}  // namespace tossing
