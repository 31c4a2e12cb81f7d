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

#include <string>
#include <vector>

#include "occgen/aggregation.hpp"
#include "occgen/geom.hpp"

namespace occgen {

/// A recorded (or simulated) sequence with calibration and annotations.
struct SceneBundle {
  std::string scene_id;
  /// Ontology; the class id is the index. Ids are dense from 0.
  std::vector<std::string> class_names;
  ClassId go_class = 0;
  Pose lidar_extrinsic;  // sensor -> ego
  /// Camera calibration; `extrinsics` here is camera -> ego.
  std::vector<Camera> cameras;
  std::vector<FrameBundle> frames;

  /// Cameras posed in the world at frame `i`.
  std::vector<Camera> cameras_in_world(std::size_t i) const {
    std::vector<Camera> out = cameras;
    for (Camera& c : out) c.extrinsics = compose(frames[i].ego_pose, c.extrinsics);
    return out;
  }
};

}  // namespace occgen
