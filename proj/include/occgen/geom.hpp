// Copyright 2026 The occgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace occgen {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Semantic class index into the scene ontology. 255 is reserved.
using ClassId = std::uint8_t;
using TrackId = std::uint64_t;
using Timestamp = std::int64_t;  // microseconds

inline constexpr ClassId kNoClass = 255;

/// Rigid transform taking points from a source frame into a target frame.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Timestamp timestamp = 0;

  static Pose identity(Timestamp ts = 0);
  static Pose from_translation(const Vec3& t, Timestamp ts = 0);
  /// Rotation by `yaw` about +z followed by translation.
  static Pose from_yaw(double yaw, const Vec3& t = Vec3::Zero(), Timestamp ts = 0);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// True when the rotation is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// `a ∘ b`: applying the result equals applying b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);

enum class Frame : std::uint8_t { kSensor, kEgo, kWorld, kObjectCanonical };

const char* to_string(Frame frame);

/// Points in a single coordinate frame with an optional label column.
struct PointCloud {
  PointCloud() = default;
  explicit PointCloud(Frame f) : frame(f) {}

  std::vector<Vec3> points;
  std::optional<std::vector<ClassId>> labels;
  Frame frame = Frame::kWorld;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return labels.has_value(); }

  /// Appends `other`. The label column survives only if both sides have one,
  /// unless `fill` is given, in which case missing labels take that value.
  void append(const PointCloud& other, std::optional<ClassId> fill = std::nullopt);
};

/// p' = R p + t for every point. Labels are carried over unchanged.
PointCloud transform(const Pose& pose, const PointCloud& cloud, Frame target);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

/// Oriented box with yaw-only rotation, expressed in the world frame.
struct Box3D {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // full extents
  double yaw = 0.0;
  ClassId class_id = 0;
  TrackId track_id = 0;
  Timestamp timestamp = 0;

  /// Box frame to world frame.
  Pose to_world() const { return Pose::from_yaw(yaw, center, timestamp); }
  /// World frame to box (object-canonical) frame.
  Pose to_canonical() const { return invert(to_world()); }
};

/// Half-open containment in the box frame: [-size/2, size/2) per axis.
bool box_contains(const Box3D& box, const Vec3& point);

/// Linear center/size, shortest-arc yaw. Throws kTrackMismatch on differing ids.
Box3D box_interpolate(const Box3D& a, const Box3D& b, double alpha);

/// Pinhole camera; `extrinsics` maps camera frame (x right, y down, z
/// forward) to world.
struct Camera {
  Mat3 intrinsics = Mat3::Identity();
  Pose extrinsics;
  int width = 0;
  int height = 0;
  std::string id;

  bool is_valid() const;
  Vec3 center() const { return extrinsics.translation; }
};

struct Projection {
  enum class Outcome { kInImage, kOutOfImage, kBehindCamera };
  Outcome outcome = Outcome::kBehindCamera;
  Vec2 pixel = Vec2::Zero();
  double depth = 0.0;  // along the optical axis, not range
};

Projection project_to_image(const Camera& camera, const Vec3& point_world);

}  // namespace occgen
