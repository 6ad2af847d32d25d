#pragma once

#include "tossing/flight.hpp"

namespace tossing {

/// Weights and thresholds of the immediate toss reward. Angles in degrees,
/// distances in meters.
struct RewardConfig {
  double alpha = 1.0;
  double beta = 1.0;
  double theta_bar_roll = 360.0;
  double theta_bar_yaw = 180.0;
  double d_x_low = 0.03;
  double d_y_low = 0.03;
  double d_x_high = 0.15;
  double d_y_high = 0.06;
  double d_bar_z = 0.3;
  /// Flip the vertical term to penalize d_z >= d_bar_z instead.
  bool invert_rz = false;

  void validate() const;
};

constexpr double kReleaseSuccessReward = 1.0;
constexpr double kReleaseFailureReward = -10.0;

double release_reward(bool release_success);

/// Quadratic in each angle error, 1 at zero error and 0 from the threshold on.
double rotation_reward(double theta_roll, double theta_yaw, const RewardConfig& cfg = {});

/// Piecewise-linear in d_x and d_y, plus a 0/-1 step in d_z.
double position_reward(double d_x, double d_y, double d_z, const RewardConfig& cfg = {});

double total_reward(const TossOutcome& outcome, const RewardConfig& cfg = {});

/// Lowest and highest values total_reward can take under `cfg`.
double min_total_reward(const RewardConfig& cfg = {});
double max_total_reward(const RewardConfig& cfg = {});

}  // namespace tossing
