#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tossing/domain.hpp"
#include "tossing/kinematics.hpp"

namespace tossing {

/// Physics constants and the toss frame. The toss frame has x pointing from
/// joint 2 toward the target slot, z up, and the target slot center at
/// (standoff, 0, floor_height).
struct SimConfig {
  double time_step = 1e-3;
  double gravity = 9.81;
  double standoff = 0.90;
  double wall_height = 0.20;
  double wall_thickness = 0.01;
  double max_flight_time = 5.0;

  void validate() const;
};

enum class Face { bottom, top, front, back, left, right };

std::string to_string(Face face);

/// Face whose outward normal points most nearly downward; near-ties (within
/// 1e-9) resolve toward the bottom face.
Face lowest_face(const Eigen::Matrix3d& orientation);

/// Heading of the orientation about the vertical, measured on the body axis
/// that lies along +x when the object rests on `face` with zero yaw.
double heading(const Eigen::Matrix3d& orientation, Face face);

/// Body-to-world rotation of an object resting on `face` with the given yaw.
Eigen::Matrix3d rest_orientation(Face face, double yaw);

struct LandingPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // object center at impact
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
};

struct RestPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // object center at rest
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  Face face = Face::bottom;
  double yaw = 0.0;             // rad
  double roll_error_deg = 0.0;  // 0 upright, 90 on a side, 180 upside down

  LandingPose as_landing() const { return {position, orientation}; }
};

/// No-bounce rest: the object drops onto its lowest face, keeping its heading.
RestPose settle(const LandingPose& landing, const BoxObject& object, double surface_height);

struct TossOutcome {
  bool release_success = true;
  double theta_roll = 0.0;  // deg, [0, 360]
  double theta_yaw = 0.0;   // deg, [0, 180]
  double d_x = 0.0;         // along the toss direction
  double d_y = 0.0;         // lateral
  double d_z = 0.0;         // rest height above the floor
  Pose2 landed_pose;        // workspace frame; yaw relative to the slot's nominal heading
  bool collided = false;
  double flight_time = 0.0;
  Face rest_face = Face::bottom;

  void validate() const;
};

struct TrajectorySample {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double roll_deg = 0.0;
  double yaw_deg = 0.0;
};

/// Drag-free ballistic flight until the lowest point of the object reaches
/// the floor or the top of an obstacle it descends onto. Walls and occupied
/// slots are axis-aligned boxes; touching one sideways sets `collided` and
/// kills the horizontal velocity. Throws InvalidInput on non-finite state and
/// PreconditionViolation when `release.released` is false.
TossOutcome simulate_flight(const ReleaseState& release, const Workspace& ws, const Slot& target,
                            const BoxObject& object, const SimConfig& sim,
                            std::vector<TrajectorySample>* trace = nullptr);

struct TossSetup {
  ArmGeometry arm;
  ActionGrid grid = ActionGrid::desk_default();
  SimConfig sim;
};

/// Release plus flight. A failed release drops the object from where the
/// fingers were, with no velocity, and marks the outcome unsuccessful.
TossOutcome simulate_toss(const TossSetup& setup, const TossAction& action,
                          const GraspState& grasp, const Workspace& ws, const Slot& target,
                          const BoxObject& object, std::vector<TrajectorySample>* trace = nullptr);

enum class Task { pick_and_place, pick_and_toss };

std::string to_string(Task task);

/// Per-object durations. 112 s and 76 s for eight objects under all-PP and
/// all-PT execution give the defaults.
struct TaskTimes {
  double pick_and_place = 14.0;
  double pick_and_toss = 9.5;

  void validate() const;
};

double task_time(Task task, const TaskTimes& times = {});

}  // namespace tossing
