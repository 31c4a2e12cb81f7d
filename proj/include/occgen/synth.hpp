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
#include <utility>
#include <vector>

#include <json.hpp>

#include "occgen/grid.hpp"
#include "occgen/scene.hpp"
#include "occgen/visibility.hpp"

namespace occgen::synth {

/// Constant velocity and yaw rate, starting at t = 0.
struct Motion {
  Vec3 velocity = Vec3::Zero();  // m/s, world frame
  double yaw_rate = 0.0;         // rad/s
};

/// Solid yaw-oriented box in the world. A slab is a box that spans a z-range
/// over an xy region; it only differs in how scripts describe it.
struct Primitive {
  enum class Shape { kBox, kSlab };
  Shape shape = Shape::kBox;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;
  ClassId class_id = 0;
  std::optional<Motion> motion;
  TrackId track_id = 0;  // annotated boxes only exist for moving primitives

  Box3D box_at(Timestamp t) const;
};

struct LidarPattern {
  int azimuth_count = 1024;
  std::vector<double> elevations_deg;
  double max_range = 75.0;
  double range_noise_std = 0.0;
  Pose extrinsic;  // sensor -> ego
};

struct EgoTrajectory {
  Vec3 start = Vec3::Zero();
  double start_yaw = 0.0;
  Vec3 velocity = Vec3::Zero();  // m/s, world frame
  double yaw_rate = 0.0;
};

struct SceneScript {
  std::string scene_id = "synthetic";
  GridSpec grid = GridSpec::waymo();
  std::vector<std::string> class_names{"general_object", "ground", "wall", "vehicle"};
  ClassId go_class = 0;
  std::vector<Primitive> primitives;
  LidarPattern lidar;
  std::vector<Camera> cameras;  // extrinsics are camera -> ego
  EgoTrajectory ego;
  int frame_count = 1;
  Timestamp period_us = 100000;
  int keyframe_interval = 1;
  /// Point labels only on keyframes, so other frames go through KNN voting.
  bool labels_on_keyframes_only = true;
  /// Annotation boxes are the primitive grown by this much on every side.
  double box_margin = 0.1;
  std::uint64_t seed = 0;

  Timestamp timestamp(int frame) const { return frame * period_us; }
  bool is_keyframe(int frame) const { return frame % std::max(1, keyframe_interval) == 0; }
};

/// Camera looking along `yaw` (about +z) in the ego frame from `position`,
/// tilted down by `pitch` radians.
Camera mounted_camera(const std::string& id, double fx, double fy, double cx, double cy, int width, int height,
                      const Vec3& position, double yaw, double pitch = 0.0);

/// Elevation angles (degrees) evenly spaced over [lo, hi].
std::vector<double> linspace_deg(double lo, double hi, int count);

Pose ego_pose_at(const SceneScript& script, int frame);

/// Entry/exit parameters of the line o + t d against a box, if it hits.
std::optional<std::pair<double, double>> intersect_box(const Box3D& box, const Vec3& origin, const Vec3& dir);

/// One simulated sweep: nearest primitive hit per beam within max range.
FrameBundle simulate_lidar(const SceneScript& script, int frame);

struct AnalyticTruth {
  OccGrid occupancy;      // occupied (center inside a primitive) or free
  VisibilityMask camera;  // line of sight from any camera to the voxel
};

/// Ground truth in the ego grid at `frame`.
AnalyticTruth analytic_gt(const SceneScript& script, int frame, unsigned threads = 1);

/// Simulates every frame into a scene bundle.
SceneBundle generate_scene(const SceneScript& script);

/// Built-in scenes:
///  - "static-room": ground slab enclosed by four walls, ego driving through,
///    dense scans, six surround cameras.
///  - "occluder": ground, a far wall and a randomly placed box in between,
///    one forward camera. `seed` picks the occluder.
///  - "moving": static room plus a vehicle crossing it at 10 m/s.
/// Throws kSpecValidation for an unknown name.
SceneScript demo_script(const std::string& name, std::uint64_t seed = 0);

SceneScript script_from_json(const nlohmann::json& j);
nlohmann::json script_to_json(const SceneScript& script);

}  // namespace occgen::synth
