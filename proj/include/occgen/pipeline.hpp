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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "occgen/aggregation.hpp"
#include "occgen/grid.hpp"
#include "occgen/scene.hpp"
#include "occgen/visibility.hpp"

namespace occgen {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  GridSpec grid = GridSpec::waymo();
  int knn_k = 5;
  int min_points = 1;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  /// Annotated classes aggregated as static scenery (e.g. parked vehicles).
  std::set<ClassId> static_classes;
  /// Ego-frame box removed from the joint evaluation mask.
  std::optional<Box3D> ego_footprint;

  /// Throws kSpecValidation for unusable settings.
  void validate() const;
  /// Canonical description of everything that affects outputs.
  nlohmann::json to_json() const;
};

/// Scene-wide aggregation shared by every keyframe.
struct AggregatedScene {
  /// Static points in the world frame, all labeled (voted where needed).
  PointCloud static_world;
  /// Source frame of each static point.
  std::vector<std::uint32_t> static_source;
  /// Sensor origin in the world frame, per frame.
  std::vector<Vec3> sensor_origins;
  std::map<TrackId, ObjectCanonicalCloud> objects;
  /// Sensor origin of each canonical object point, in the object frame.
  std::map<TrackId, std::vector<Vec3>> object_ray_origins;
  /// Annotated or interpolated boxes, per frame index.
  std::vector<std::vector<Box3D>> boxes;
  /// Number of static points whose label came from KNN voting.
  std::size_t voted_points = 0;
};

/// Interpolates tracks, splits every frame and aggregates static scenery and
/// objects; unlabeled static points are labeled by KNN voting.
AggregatedScene aggregate_scene(const SceneBundle& scene, const PipelineConfig& config);

/// Aggregated points (labeled) and their LiDAR rays re-posed into the ego
/// frame of `frame`.
struct KeyframeInputs {
  PointCloud cloud;
  std::vector<Ray> rays;
};

KeyframeInputs keyframe_inputs(const SceneBundle& scene, const AggregatedScene& agg, std::size_t frame);

struct KeyframeResult {
  std::size_t frame_index = 0;
  Timestamp timestamp = 0;
  OccGrid occupancy;  // occupied / free / unobserved
  VisibilityMask lidar;
  VisibilityMask camera;
  VisibilityMask joint;
};

/// Full label generation for every keyframe, in frame order.
std::vector<KeyframeResult> run_pipeline(const SceneBundle& scene, const PipelineConfig& config);

/// Writes each keyframe's grid and masks plus provenance.json under `out_dir`.
void write_results(const std::filesystem::path& out_dir, const SceneBundle& scene, const PipelineConfig& config,
                   const std::vector<KeyframeResult>& results);

/// read_scene + run_pipeline + write_results.
std::vector<KeyframeResult> run_pipeline(const std::filesystem::path& scene_dir, const PipelineConfig& config,
                                         const std::filesystem::path& out_dir);

}  // namespace occgen
