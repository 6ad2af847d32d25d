#include "tossing/flight.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "tossing/errors.hpp"

namespace tossing {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;
constexpr double kFaceTieTolerance = 1e-9;

constexpr std::array<Face, 6> kFaces{Face::bottom, Face::top,  Face::front,
                                     Face::back,   Face::left, Face::right};

Eigen::Vector3d face_normal(Face face) {
  switch (face) {
    case Face::bottom: return -Eigen::Vector3d::UnitZ();
    case Face::top: return Eigen::Vector3d::UnitZ();
    case Face::front: return Eigen::Vector3d::UnitX();
    case Face::back: return -Eigen::Vector3d::UnitX();
    case Face::left: return Eigen::Vector3d::UnitY();
    case Face::right: return -Eigen::Vector3d::UnitY();
  }
  return -Eigen::Vector3d::UnitZ();
}

// Exact 0/±1 rotations taking the face normal to -z.
Eigen::Matrix3d face_down(Face face) {
  Eigen::Matrix3d m;
  switch (face) {
    case Face::bottom: m << 1, 0, 0, 0, 1, 0, 0, 0, 1; break;
    case Face::top: m << 1, 0, 0, 0, -1, 0, 0, 0, -1; break;
    case Face::front: m << 0, 0, 1, 0, 1, 0, -1, 0, 0; break;
    case Face::back: m << 0, 0, -1, 0, 1, 0, 1, 0, 0; break;
    case Face::left: m << 1, 0, 0, 0, 0, 1, 0, -1, 0; break;
    case Face::right: m << 1, 0, 0, 0, 0, -1, 0, 1, 0; break;
  }
  return m;
}

double face_roll_error(Face face) {
  switch (face) {
    case Face::bottom: return 0.0;
    case Face::top: return 180.0;
    default: return 90.0;
  }
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  return a;
}

struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
};

Eigen::Vector3d half_extents(const BoxObject& object) {
  return {object.width / 2.0, object.depth / 2.0, object.height / 2.0};
}

Eigen::Vector3d aabb_half(const Eigen::Matrix3d& r, const Eigen::Vector3d& half) {
  return r.cwiseAbs() * half;
}

bool footprint_overlap(const Eigen::Vector3d& c, const Eigen::Vector3d& half, const Box& b) {
  return c.x() + half.x() > b.lo.x() && c.x() - half.x() < b.hi.x() &&
         c.y() + half.y() > b.lo.y() && c.y() - half.y() < b.hi.y();
}

bool volume_overlap(const Eigen::Vector3d& c, const Eigen::Vector3d& half, const Box& b) {
  return footprint_overlap(c, half, b) && c.z() + half.z() > b.lo.z() &&
         c.z() - half.z() < b.hi.z();
}

// Obstacles in the toss frame. A workspace point (x, y) maps to
// (standoff + y - ty, tx - x), with (tx, ty) the target slot center.
class Scene {
public:
  Scene(const Workspace& ws, const Slot& target, const BoxObject& object, const SimConfig& sim)
      : floor_(ws.floor_height()) {
    const Pose2 t = ws.slot_pose(target.cell());
    tx_ = t.x;
    ty_ = t.y;
    standoff_ = sim.standoff;

    const double x_near = to_x(0.0);
    const double x_far = to_x(ws.extent_y());
    const double y_left = to_y(0.0);
    const double y_right = to_y(ws.extent_x());
    const double th = sim.wall_thickness;
    const double top = floor_ + sim.wall_height;
    if (ws.walls().has(Side::top))
      boxes_.push_back({{x_near - th, y_right - th, floor_}, {x_near, y_left + th, top}});
    if (ws.walls().has(Side::bottom))
      boxes_.push_back({{x_far, y_right - th, floor_}, {x_far + th, y_left + th, top}});
    if (ws.walls().has(Side::left))
      boxes_.push_back({{x_near - th, y_left, floor_}, {x_far + th, y_left + th, top}});
    if (ws.walls().has(Side::right))
      boxes_.push_back({{x_near - th, y_right - th, floor_}, {x_far + th, y_right, top}});

    const Eigen::Vector3d half = half_extents(object);
    for (int r = 0; r < ws.rows(); ++r) {
      for (int c = 0; c < ws.cols(); ++c) {
        if (!ws.occupied(r, c)) continue;
        const Pose2 s = ws.slot_pose({r, c});
        const Eigen::Vector3d center{to_x(s.y), to_y(s.x), floor_ + half.z()};
        boxes_.push_back({center - half, center + half});
      }
    }
  }

  double floor() const { return floor_; }

  // Highest surface under the footprint among obstacles approached from above.
  double surface(const Eigen::Vector3d& c, const Eigen::Vector3d& half, double prev_bottom) const {
    double s = floor_;
    for (const Box& b : boxes_) {
      if (b.hi.z() <= prev_bottom + 1e-12 && footprint_overlap(c, half, b)) {
        s = std::max(s, b.hi.z());
      }
    }
    return s;
  }

  bool collides(const Eigen::Vector3d& c, const Eigen::Vector3d& half) const {
    return std::any_of(boxes_.begin(), boxes_.end(),
                       [&](const Box& b) { return volume_overlap(c, half, b); });
  }

  Pose2 to_workspace(const Eigen::Vector3d& p, double yaw) const {
    return {tx_ - p.y(), ty_ + p.x() - standoff_, yaw};
  }

private:
  double to_x(double ws_y) const { return standoff_ + ws_y - ty_; }
  double to_y(double ws_x) const { return tx_ - ws_x; }

  double floor_;
  double tx_ = 0.0;
  double ty_ = 0.0;
  double standoff_ = 0.0;
  std::vector<Box> boxes_;
};

Eigen::Matrix3d rotate(const Eigen::Matrix3d& r0, const Eigen::Vector3d& omega, double t) {
  const double rate = omega.norm();
  if (rate == 0.0 || t == 0.0) return r0;
  return Eigen::AngleAxisd(rate * t, omega / rate).toRotationMatrix() * r0;
}

TrajectorySample sample(double t, const Eigen::Vector3d& p, const Eigen::Vector3d& v,
                        const Eigen::Matrix3d& r) {
  const double up = std::clamp(r(2, 2), -1.0, 1.0);
  return {t, p, v, std::acos(up) * kRadToDeg, heading(r, lowest_face(r)) * kRadToDeg};
}

}  // namespace

void SimConfig::validate() const {
  if (!(time_step > 0.0)) throw InvalidInput("time_step must be positive");
  if (!(gravity > 0.0)) throw InvalidInput("gravity must be positive");
  if (!(wall_height >= 0.0) || !(wall_thickness > 0.0)) throw InvalidInput("bad wall geometry");
  if (!(max_flight_time > 0.0)) throw InvalidInput("max_flight_time must be positive");
  if (!std::isfinite(standoff)) throw InvalidInput("standoff must be finite");
}

std::string to_string(Face face) {
  switch (face) {
    case Face::bottom: return "bottom";
    case Face::top: return "top";
    case Face::front: return "front";
    case Face::back: return "back";
    case Face::left: return "left";
    case Face::right: return "right";
  }
  return "?";
}

Face lowest_face(const Eigen::Matrix3d& orientation) {
  double best = std::numeric_limits<double>::infinity();
  Face best_face = Face::bottom;
  for (Face f : kFaces) {
    const double z = (orientation * face_normal(f)).z();
    if (z < best) {
      best = z;
      best_face = f;
    }
  }
  const double bottom_z = (orientation * face_normal(Face::bottom)).z();
  if (bottom_z <= best + kFaceTieTolerance) return Face::bottom;
  return best_face;
}

double heading(const Eigen::Matrix3d& orientation, Face face) {
  const Eigen::Vector3d axis = face_down(face).transpose() * Eigen::Vector3d::UnitX();
  const Eigen::Vector3d v = orientation * axis;
  return std::atan2(v.y(), v.x());
}

Eigen::Matrix3d rest_orientation(Face face, double yaw) {
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * face_down(face);
}

RestPose settle(const LandingPose& landing, const BoxObject& object, double surface_height) {
  RestPose rest;
  rest.face = lowest_face(landing.orientation);
  rest.yaw = heading(landing.orientation, rest.face);
  rest.orientation = rest_orientation(rest.face, rest.yaw);
  rest.roll_error_deg = face_roll_error(rest.face);
  const Eigen::Vector3d half = aabb_half(rest.orientation, half_extents(object));
  rest.position = {landing.position.x(), landing.position.y(), surface_height + half.z()};
  return rest;
}

void TossOutcome::validate() const {
  if (!(theta_roll >= 0.0 && theta_roll <= 360.0)) throw InvalidInput("theta_roll outside [0,360]");
  if (!(theta_yaw >= 0.0 && theta_yaw <= 180.0)) throw InvalidInput("theta_yaw outside [0,180]");
  if (!(d_x >= 0.0) || !(d_y >= 0.0) || !(d_z >= 0.0)) {
    throw InvalidInput("landing distances must be non-negative");
  }
}

TossOutcome simulate_flight(const ReleaseState& release, const Workspace& ws, const Slot& target,
                            const BoxObject& object, const SimConfig& sim,
                            std::vector<TrajectorySample>* trace) {
  if (!release.released) throw PreconditionViolation("object was not released");
  if (!release.position.allFinite() || !release.linear_velocity.allFinite() ||
      !release.angular_velocity.allFinite() || !release.orientation.allFinite()) {
    throw InvalidInput("release state is not finite");
  }
  sim.validate();
  object.validate();

  const Scene scene(ws, target, object, sim);
  const Eigen::Vector3d half_body = half_extents(object);
  const Eigen::Vector3d gravity{0.0, 0.0, -sim.gravity};
  const double dt = sim.time_step;

  TossOutcome out;
  Eigen::Vector3d p = release.position;
  Eigen::Vector3d v = release.linear_velocity;
  const Eigen::Matrix3d& r0 = release.orientation;
  const Eigen::Vector3d& omega = release.angular_velocity;
  double t = 0.0;

  Eigen::Vector3d half = aabb_half(r0, half_body);
  double bottom = p.z() - half.z();
  if (scene.collides(p, half)) out.collided = true;
  if (trace) trace->push_back(sample(t, p, v, r0));

  double surface = scene.surface(p, half, bottom);
  Eigen::Matrix3d r_land = r0;
  bool landed = bottom <= surface;
  while (!landed) {
    if (t > sim.max_flight_time) throw Error("flight did not terminate");
    Eigen::Vector3d v_step = v;
    Eigen::Vector3d p_next = p + v_step * dt + 0.5 * gravity * dt * dt;
    const double t_next = t + dt;
    const Eigen::Matrix3d r_next = rotate(r0, omega, t_next);
    const Eigen::Vector3d half_next = aabb_half(r_next, half_body);

    surface = scene.surface(p_next, half_next, bottom);
    if (p_next.z() - half_next.z() > surface && scene.collides(p_next, half_next)) {
      out.collided = true;
      v_step.x() = 0.0;
      v_step.y() = 0.0;
      p_next = p + v_step * dt + 0.5 * gravity * dt * dt;
      surface = scene.surface(p_next, half_next, bottom);
    }

    if (p_next.z() - half_next.z() <= surface) {
      // Exact crossing time within the step for the parabolic height.
      const double height = p.z() - half_next.z() - surface;
      double tau = 0.0;
      if (height > 0.0) {
        tau = (v_step.z() + std::sqrt(v_step.z() * v_step.z() + 2.0 * sim.gravity * height)) /
              sim.gravity;
        tau = std::clamp(tau, 0.0, dt);
      }
      p = p + v_step * tau + 0.5 * gravity * tau * tau;
      v = v_step + gravity * tau;
      t += tau;
      p.z() = surface + half_next.z();
      r_land = rotate(r0, omega, t);
      landed = true;
    } else {
      p = p_next;
      v = v_step + gravity * dt;
      t = t_next;
      bottom = p.z() - half_next.z();
      r_land = r_next;
    }
    if (trace) trace->push_back(sample(t, p, v, r_land));
  }

  const RestPose rest = settle({p, r_land}, object, surface);
  out.flight_time = t;
  out.rest_face = rest.face;
  out.theta_roll = rest.roll_error_deg;
  out.theta_yaw = std::abs(wrap_angle(rest.yaw)) * kRadToDeg;
  out.theta_yaw = std::min(out.theta_yaw, 180.0);
  out.d_x = std::abs(rest.position.x() - sim.standoff);
  out.d_y = std::abs(rest.position.y());
  out.d_z = std::max(surface - scene.floor(), 0.0);
  out.landed_pose = scene.to_workspace(rest.position, wrap_angle(rest.yaw));
  return out;
}

TossOutcome simulate_toss(const TossSetup& setup, const TossAction& action,
                          const GraspState& grasp, const Workspace& ws, const Slot& target,
                          const BoxObject& object, std::vector<TrajectorySample>* trace) {
  grasp.validate();
  ReleaseState release = forward_release(setup.arm, setup.grid, action, grasp, object);
  if (release.released) return simulate_flight(release, ws, target, object, setup.sim, trace);

  release.released = true;  // slips out of the fingers where it is
  TossOutcome out = simulate_flight(release, ws, target, object, setup.sim, trace);
  out.release_success = false;
  return out;
}

std::string to_string(Task task) {
  return task == Task::pick_and_place ? "PP" : "PT";
}

void TaskTimes::validate() const {
  if (!(pick_and_place > 0.0) || !(pick_and_toss > 0.0)) {
    throw InvalidInput("task times must be positive");
  }
}

double task_time(Task task, const TaskTimes& times) {
  return task == Task::pick_and_place ? times.pick_and_place : times.pick_and_toss;
}

}  // namespace tossing
