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

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "occgen/geom.hpp"

namespace occgen {

/// One LiDAR sweep with its poses and (possibly interpolated) annotations.
struct FrameBundle {
  Timestamp timestamp = 0;
  PointCloud lidar_cloud{Frame::kSensor};  // sensor frame
  Pose ego_pose;         // ego -> world
  Pose lidar_extrinsic;  // sensor -> ego
  std::vector<Box3D> boxes;  // world frame
  bool is_keyframe = false;

  Pose sensor_to_world() const { return compose(ego_pose, lidar_extrinsic); }
};

struct ObjectCanonicalCloud {
  TrackId track_id = 0;
  ClassId class_id = 0;
  PointCloud points{Frame::kObjectCanonical};
};

struct SplitOptions {
  /// Boxes of these classes are treated as static scenery.
  std::set<ClassId> static_classes;
};

/// Points of one frame split into static scenery (world frame) and
/// per-track object-canonical clouds. Point order within each output
/// follows the input order.
struct SplitResult {
  PointCloud static_world{Frame::kWorld};
  std::map<TrackId, PointCloud> per_object;
  /// For each input point: index into frame.boxes of the owning box, or -1.
  std::vector<int> owner;
};

SplitResult split_dynamic_static(const FrameBundle& frame, const SplitOptions& options = {});

/// Boxes at every requested timestamp. Keyframe timestamps keep their own
/// boxes; other timestamps get shortest-arc interpolation between the
/// enclosing keyframe appearances of each track. No extrapolation.
/// Throws kNoAnnotation when `keyframes` is empty.
std::map<Timestamp, std::vector<Box3D>> interpolate_tracks(const std::vector<FrameBundle>& keyframes,
                                                           const std::vector<Timestamp>& all_timestamps);

/// Concatenated static world points of all frames, in frame order.
PointCloud aggregate_static(const std::vector<FrameBundle>& frames, const SplitOptions& options = {});

/// Union of a track's canonical points across frames. Throws kUnknownTrack
/// if no frame has a box with that id.
ObjectCanonicalCloud aggregate_object(const std::vector<FrameBundle>& frames, TrackId track_id,
                                      const SplitOptions& options = {});

/// Canonical clouds re-posed by the boxes, labeled with the box class.
/// Throws kMissingTrack for a box without a canonical cloud.
PointCloud place_objects(const std::map<TrackId, ObjectCanonicalCloud>& canon,
                         const std::vector<Box3D>& boxes_at_t);

/// Majority class among the k nearest labeled points, for every unlabeled
/// point. Class ties pick the smallest id; equal distances prefer the lower
/// reference index. Throws kInsufficientReference when `labeled` is empty or
/// unlabeled.
std::vector<ClassId> knn_label_vote(const PointCloud& unlabeled, const PointCloud& labeled, int k,
                                    unsigned threads = 1);

}  // namespace occgen
