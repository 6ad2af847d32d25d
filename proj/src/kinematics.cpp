#include "tossing/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "tossing/errors.hpp"

namespace tossing {

void GraspState::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(grasp_x) || !unit(grasp_z)) throw InvalidInput("grasp positions must lie in [0, 1]");
  if (!std::isfinite(gripper_angle)) throw InvalidInput("gripper_angle must be finite");
  if (!(gripper_opening > 0.0) || gripper_opening > kMaxOpening) {
    throw InvalidInput(fmt::format("gripper_opening {} outside (0, {}]", gripper_opening,
                                   kMaxOpening));
  }
}

double ActionDimension::value(int index) const {
  if (count <= 1) return min;
  return min + (max - min) * static_cast<double>(index) / static_cast<double>(count - 1);
}

ActionGrid ActionGrid::desk_default() {
  constexpr double deg = M_PI / 180.0;
  ActionGrid grid;
  grid.dims = {{
      {20.0 * deg, 80.0 * deg, 7},     // joint 2 angle
      {-150.0 * deg, -40.0 * deg, 6},  // joint 3 angle
      {-120.0 * deg, 0.0, 5},          // joint 4 angle
      {-1.5, 1.5, 6},                  // joint 2 rate
      {-2.0, 2.0, 5},                  // joint 3 rate
      {-3.0, 3.0, 6},                  // joint 4 rate
  }};
  return grid;
}

ActionGrid ActionGrid::with_counts(const std::array<int, 6>& counts) const {
  ActionGrid out = *this;
  for (std::size_t k = 0; k < 6; ++k) out.dims[k].count = counts[k];
  out.validate();
  return out;
}

std::array<int, 6> ActionGrid::cardinalities() const {
  std::array<int, 6> out{};
  for (std::size_t k = 0; k < 6; ++k) out[k] = dims[k].count;
  return out;
}

std::size_t ActionGrid::cell_count() const {
  std::size_t n = 1;
  for (const auto& d : dims) n *= static_cast<std::size_t>(d.count);
  return n;
}

void ActionGrid::validate() const {
  for (std::size_t k = 0; k < 6; ++k) {
    const auto& d = dims[k];
    if (d.count < 1) throw InvalidInput(fmt::format("action dimension {} has no values", k));
    if (!std::isfinite(d.min) || !std::isfinite(d.max) || d.max < d.min) {
      throw InvalidInput(fmt::format("action dimension {} has an invalid range", k));
    }
  }
}

bool TossAction::in_range(const ActionGrid& grid) const {
  for (std::size_t k = 0; k < 6; ++k) {
    if (index[k] < 0 || index[k] >= grid.dims[k].count) return false;
  }
  return true;
}

JointMotion decode_action(const ActionGrid& grid, const TossAction& action) {
  if (!action.in_range(grid)) throw InvalidInput("action index outside the grid");
  JointMotion m;
  for (int j = 0; j < 3; ++j) {
    m.angle[j] = grid.dims[static_cast<std::size_t>(j)].value(action.index[static_cast<std::size_t>(j)]);
    m.velocity[j] =
        grid.dims[static_cast<std::size_t>(j + 3)].value(action.index[static_cast<std::size_t>(j + 3)]);
  }
  return m;
}

void ArmGeometry::validate() const {
  for (double l : link_length) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidInput("link lengths must be non-negative");
  }
  if (!std::isfinite(shoulder_height)) throw InvalidInput("shoulder_height must be finite");
  if (!(release_stroke >= 0.0)) throw InvalidInput("release_stroke must be non-negative");
  if (!(max_opening > 0.0)) throw InvalidInput("max_opening must be positive");
}

ChainState chain_kinematics(const ArmGeometry& arm, const JointMotion& motion) {
  ChainState s;
  s.tool_position = {0.0, arm.shoulder_height};
  s.tool_velocity.setZero();
  s.jacobian.setZero();

  double absolute = 0.0;
  for (int i = 0; i < 3; ++i) {
    absolute += motion.angle[i];
    const double len = arm.link_length[static_cast<std::size_t>(i)];
    s.tool_position += len * Eigen::Vector2d(std::cos(absolute), std::sin(absolute));
    // Link i moves with every joint at or before it.
    for (int j = 0; j <= i; ++j) {
      s.jacobian(0, j) -= len * std::sin(absolute);
      s.jacobian(1, j) += len * std::cos(absolute);
    }
  }
  s.tool_angle = absolute;
  s.angular_rate = motion.velocity.sum();
  s.tool_velocity = s.jacobian * motion.velocity;
  return s;
}

ReleaseState release_from_joints(const ArmGeometry& arm, const JointMotion& motion,
                                 const GraspState& grasp, const BoxObject& object) {
  const ChainState chain = chain_kinematics(arm, motion);

  // Planar angles grow about -y. The object hangs below the tool, upright
  // when the last link points straight down.
  const double tilt = chain.tool_angle + M_PI / 2.0;
  ReleaseState r;
  r.orientation = (Eigen::AngleAxisd(-tilt, Eigen::Vector3d::UnitY()) *
                   Eigen::AngleAxisd(grasp.gripper_angle, Eigen::Vector3d::UnitZ()))
                      .toRotationMatrix();
  r.angular_velocity = {0.0, -chain.angular_rate, 0.0};

  const Eigen::Vector3d offset_body{(0.5 - grasp.grasp_x) * object.width, 0.0,
                                    (0.5 - grasp.grasp_z) * object.height};
  const Eigen::Vector3d offset = r.orientation * offset_body;
  const Eigen::Vector3d tool{chain.tool_position.x(), 0.0, chain.tool_position.y()};
  const Eigen::Vector3d tool_velocity{chain.tool_velocity.x(), 0.0, chain.tool_velocity.y()};

  r.position = tool + offset;
  r.linear_velocity = tool_velocity + r.angular_velocity.cross(offset);
  r.released = true;
  return r;
}

bool opening_failure(const ArmGeometry& arm, const GraspState& grasp, const BoxObject& object) {
  const double held = object.depth;
  const double release_opening = std::min(grasp.gripper_opening + arm.release_stroke, arm.max_opening);
  return grasp.gripper_opening < held || release_opening <= held;
}

bool dropped_backward(const Eigen::Vector3d& velocity) {
  return velocity.x() < 0.0 && velocity.z() < 0.0;
}

bool detect_release_failure(const ArmGeometry& arm, const ActionGrid& grid,
                            const TossAction& action, const GraspState& grasp,
                            const BoxObject& object) {
  if (opening_failure(arm, grasp, object)) return true;
  const ReleaseState r = release_from_joints(arm, decode_action(grid, action), grasp, object);
  return dropped_backward(r.linear_velocity);
}

ReleaseState forward_release(const ArmGeometry& arm, const ActionGrid& grid,
                             const TossAction& action, const GraspState& grasp,
                             const BoxObject& object) {
  ReleaseState r = release_from_joints(arm, decode_action(grid, action), grasp, object);
  if (opening_failure(arm, grasp, object) || dropped_backward(r.linear_velocity)) {
    r.released = false;
    r.linear_velocity.setZero();
    r.angular_velocity.setZero();
  }
  return r;
}

}  // namespace tossing
