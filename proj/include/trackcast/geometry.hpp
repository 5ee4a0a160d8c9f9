/* Copyright 2026 The Trackcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Coordinate frames, allocentric/egocentric transforms, camera projection and
// displacement-error primitives. All types are immutable values and all
// operations are pure functions.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "trackcast/common.hpp"

namespace trackcast {

enum class Frame { kGlobal, kEgo, kAllocentric, kImage };

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(const Point2& a, const Point2& b) {
  return (a - b).norm();
}

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  Point2 xy() const { return {x, y}; }
};

// Ordered future waypoints at the scene frame rate.
struct Trajectory {
  std::vector<Point2> points;
  Frame frame = Frame::kGlobal;

  int size() const { return static_cast<int>(points.size()); }
  bool finite() const {
    for (const auto& p : points) {
      if (!p.finite()) return false;
    }
    return true;
  }
};

// Wraps an angle to [-pi, pi).
inline double wrap_angle(double angle) {
  double a = std::fmod(angle + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Rigid 2D frame. `origin` maps to (0, 0) and the global direction `heading`
// (angle from the +x axis, in [-pi, pi)) maps to the local +y axis.
struct FrameTransform {
  Point2 origin;
  double heading = 0.0;

  static FrameTransform identity() { return {{0.0, 0.0}, kPi / 2.0}; }
};

enum class TransformDirection { kForward, kInverse };

inline Point2 transform_point(const Point2& p, const FrameTransform& frame,
                              TransformDirection direction) {
  if (!p.finite() || !std::isfinite(frame.heading) || !frame.origin.finite()) {
    throw InvalidInputError("transform_point: non-finite input");
  }
  const double rot = kPi / 2.0 - frame.heading;
  const double c = std::cos(rot);
  const double s = std::sin(rot);
  if (direction == TransformDirection::kForward) {
    const Point2 d = p - frame.origin;
    return {c * d.x - s * d.y, s * d.x + c * d.y};
  }
  return {c * p.x + s * p.y + frame.origin.x,
          -s * p.x + c * p.y + frame.origin.y};
}

// Forward maps a global-frame trajectory into the local frame; inverse is the
// exact inverse. `local_tag` names the frame of forward outputs.
inline Trajectory transform_trajectory(const Trajectory& traj,
                                       const FrameTransform& frame,
                                       TransformDirection direction,
                                       Frame local_tag = Frame::kAllocentric) {
  Trajectory out;
  out.points.reserve(traj.points.size());
  for (const auto& p : traj.points) {
    out.points.push_back(transform_point(p, frame, direction));
  }
  out.frame =
      direction == TransformDirection::kForward ? local_tag : Frame::kGlobal;
  return out;
}

struct DisplacementErrors {
  double ade = 0.0;
  double fde = 0.0;
};

// ade = mean per-step L2 distance, fde = L2 distance at the final step.
inline DisplacementErrors displacement_errors(const Trajectory& pred,
                                              const Trajectory& gt) {
  if (pred.size() != gt.size()) {
    throw InvalidInputError("displacement_errors: length mismatch");
  }
  if (pred.points.empty()) {
    throw InvalidInputError("displacement_errors: empty trajectory");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.points.size(); ++i) {
    sum += distance(pred.points[i], gt.points[i]);
  }
  return {sum / static_cast<double>(pred.points.size()),
          distance(pred.points.back(), gt.points.back())};
}

// Pinhole camera: X_cam = R * X + t, pixel = K * X_cam / depth.
struct CameraModel {
  Eigen::Matrix3d intrinsic = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;

  void validate() const {
    if (intrinsic(0, 0) <= 0.0 || intrinsic(1, 1) <= 0.0) {
      throw InvalidInputError("CameraModel: focal entries must be positive");
    }
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
      throw InvalidInputError("CameraModel: rotation is not orthonormal");
    }
  }
};

// Projects a global-frame point. Absent when the point is at or behind the
// camera plane or lands outside the image bounds.
inline std::optional<Point2> project_to_camera(const Point3& p,
                                               const CameraModel& cam) {
  cam.validate();
  if (!p.finite()) {
    throw InvalidInputError("project_to_camera: non-finite point");
  }
  const Eigen::Vector3d cam_point =
      cam.rotation * Eigen::Vector3d(p.x, p.y, p.z) + cam.translation;
  if (cam_point.z() <= 0.0) return std::nullopt;
  const Eigen::Vector3d homo = cam.intrinsic * cam_point;
  const Point2 pixel{homo.x() / homo.z(), homo.y() / homo.z()};
  if (pixel.x < 0.0 || pixel.x >= cam.width || pixel.y < 0.0 ||
      pixel.y >= cam.height) {
    return std::nullopt;
  }
  return pixel;
}

inline constexpr double kStationarySpeed = 1e-6;  // m/s

// Heading is the angle of the velocity vector. Stationary agents keep the
// heading of the most recent moving step, supplied as `fallback` (0 when no
// such step exists).
inline double heading_from_velocity(double vx, double vy,
                                    double fallback = 0.0) {
  if (std::hypot(vx, vy) < kStationarySpeed) return wrap_angle(fallback);
  return std::atan2(vy, vx);
}

// Frame with the agent's position at the origin and its motion direction as
// the +y axis.
inline FrameTransform allocentric_frame(const Point2& position, double vx,
                                        double vy, double fallback_heading = 0.0) {
  return {position, heading_from_velocity(vx, vy, fallback_heading)};
}

}  // namespace trackcast
