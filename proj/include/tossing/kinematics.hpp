#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Core>

#include "tossing/domain.hpp"

namespace tossing {

/// How the object is held: normalized grasp position across the width
/// (grasp_x) and along the height (grasp_z), rotation of the object about
/// the tool axis, and the finger opening before closing.
struct GraspState {
  static constexpr double kMaxOpening = 0.140;

  double grasp_x = 0.5;
  double grasp_z = 0.5;
  double gripper_angle = 0.0;  // rad
  double gripper_opening = 0.1;

  void validate() const;
};

/// One axis of the discrete action grid; index i maps affinely onto
/// [min, max].
struct ActionDimension {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  double value(int index) const;
};

/// Six factors, ordered as release angles of joints 2, 3, 4 (rad) followed by
/// their angular velocities (rad/s).
struct ActionGrid {
  std::array<ActionDimension, 6> dims;

  static ActionGrid desk_default();
  /// Same ranges resampled to the given cardinalities.
  ActionGrid with_counts(const std::array<int, 6>& counts) const;

  std::array<int, 6> cardinalities() const;
  std::size_t cell_count() const;
  void validate() const;
};

struct TossAction {
  std::array<int, 6> index{};

  bool in_range(const ActionGrid& grid) const;
  constexpr bool operator==(const TossAction&) const = default;
};

struct JointMotion {
  Eigen::Vector3d angle = Eigen::Vector3d::Zero();     // joints 2..4, relative
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // rad/s
};

JointMotion decode_action(const ActionGrid& grid, const TossAction& action);

/// Planar three-link chain (joints 2, 3, 4) acting in the vertical plane that
/// contains the target. Joint 2 sits at (0, 0, shoulder_height); angles are
/// measured from the forward horizontal, positive upward.
struct ArmGeometry {
  double shoulder_height = 0.30;
  std::array<double, 3> link_length{0.425, 0.392, 0.25};
  /// Fingers open this much beyond the grasp opening at release.
  double release_stroke = 0.02;
  double max_opening = GraspState::kMaxOpening;

  void validate() const;
};

struct ChainState {
  Eigen::Vector2d tool_position;  // (x, z)
  Eigen::Vector2d tool_velocity;
  double tool_angle = 0.0;     // absolute angle of the last link
  double angular_rate = 0.0;   // sum of joint rates
  Eigen::Matrix<double, 2, 3> jacobian;
};

ChainState chain_kinematics(const ArmGeometry& arm, const JointMotion& motion);

struct ReleaseState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // object center; x forward, z up
  Eigen::Vector3d linear_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  bool released = false;
};

/// Object state at the moment the fingers open, ignoring failure detection.
ReleaseState release_from_joints(const ArmGeometry& arm, const JointMotion& motion,
                                 const GraspState& grasp, const BoxObject& object);

ReleaseState forward_release(const ArmGeometry& arm, const ActionGrid& grid,
                             const TossAction& action, const GraspState& grasp,
                             const BoxObject& object);

/// Failure when the fingers could not get around the object, never open wide
/// enough to free it, or the object leaves moving backward and downward.
bool detect_release_failure(const ArmGeometry& arm, const ActionGrid& grid,
                            const TossAction& action, const GraspState& grasp,
                            const BoxObject& object);

/// The two opening-width conditions alone.
bool opening_failure(const ArmGeometry& arm, const GraspState& grasp, const BoxObject& object);

bool dropped_backward(const Eigen::Vector3d& velocity);

}  // namespace tossing
