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

#include "occgen/visibility.hpp"

#include <algorithm>

#include "occgen/error.hpp"
#include "occgen/parallel.hpp"

namespace occgen {

namespace {

void merge_max(std::vector<std::uint8_t>& into, const std::vector<std::uint8_t>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] = std::max(into[i], from[i]);
}

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw Error(ErrorKind::kSpecMismatch, std::string(what) + ": grid specs differ");
}

}  // namespace

std::size_t VisibilityMask::count(std::uint8_t v) const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), v));
}

std::vector<VoxelIndex> traverse_ray(const GridSpec& spec, const Ray& ray) {
  std::vector<VoxelIndex> cells;
  walk_ray(spec, ray.origin, ray.endpoint, [&](const VoxelIndex& idx, std::size_t) {
    cells.push_back(idx);
    return true;
  });
  return cells;
}

VisibilityMask lidar_visibility(const GridSpec& spec, const OccGrid& occ, const std::vector<Ray>& rays,
                                const VisibilityOptions& options) {
  require_same_spec(spec, occ.spec, "lidar_visibility");
  const unsigned shards = shard_count(rays.size(), options.threads);
  std::vector<VisibilityMask> partial(shards, VisibilityMask(spec, MaskKind::kLidar));

  parallel_shards(rays.size(), shards, [&](std::size_t begin, std::size_t end, unsigned s) {
    auto& values = partial[s].values;
    for (std::size_t r = begin; r < end; ++r) {
      const Ray& ray = rays[r];
      walk_ray(spec, ray.origin, ray.endpoint, [&](const VoxelIndex&, std::size_t l) {
        if (occ.state[l] == VoxelState::kOccupied) return false;
        values[l] = std::max<std::uint8_t>(values[l], kLidarFree);
        return true;
      });
      if (const auto end_idx = world_to_voxel(spec, ray.endpoint)) {
        const std::size_t l = spec.linear(*end_idx);
        if (occ.state[l] == VoxelState::kOccupied) values[l] = kLidarOccupied;
      }
    }
  });

  VisibilityMask mask = std::move(partial.front());
  for (std::size_t s = 1; s < partial.size(); ++s) merge_max(mask.values, partial[s].values);
  return mask;
}

std::vector<Ray> camera_rays(const GridSpec& spec, const OccGrid& occ, const Camera& camera) {
  require_same_spec(spec, occ.spec, "camera_rays");
  std::vector<Ray> rays;
  const Vec3 origin = camera.center();
  for (std::size_t l = 0; l < occ.state.size(); ++l) {
    if (occ.state[l] != VoxelState::kOccupied) continue;
    const Vec3 target = voxel_center(spec, spec.unlinear(l));
    if (project_to_image(camera, target).outcome != Projection::Outcome::kInImage) continue;
    rays.push_back(Ray{origin, target, Ray::Kind::kCameraQuery});
  }
  return rays;
}

VisibilityMask camera_visibility(const GridSpec& spec, const OccGrid& occ,
                                 const std::vector<Camera>& cameras,
                                 const VisibilityOptions& options,
                                 const CameraRayObserver& observer) {
  require_same_spec(spec, occ.spec, "camera_visibility");
  VisibilityMask mask(spec, MaskKind::kCamera);
  std::vector<std::size_t> marked;
  for (const Camera& camera : cameras) {
    const std::vector<Ray> rays = camera_rays(spec, occ, camera);
    // The observer sees rays in order, so tracing runs serially.
    const unsigned shards = observer ? 1u : shard_count(rays.size(), options.threads);
    std::vector<std::vector<std::uint8_t>> partial(
        shards, std::vector<std::uint8_t>(spec.voxel_count(), kCameraUnobserved));
    parallel_shards(rays.size(), shards, [&](std::size_t begin, std::size_t end, unsigned s) {
      auto& values = partial[s];
      for (std::size_t r = begin; r < end; ++r) {
        if (observer) marked.clear();
        walk_ray(spec, rays[r].origin, rays[r].endpoint, [&](const VoxelIndex&, std::size_t l) {
          values[l] = kCameraObserved;
          if (observer) marked.push_back(l);
          return occ.state[l] != VoxelState::kOccupied;
        });
        if (observer) observer(rays[r], marked);
      }
    });
    for (const auto& p : partial) merge_max(mask.values, p);
  }
  return mask;
}

VisibilityMask finalize_masks(const VisibilityMask& lidar, const VisibilityMask& camera) {
  require_same_spec(lidar.spec, camera.spec, "finalize_masks");
  VisibilityMask joint(lidar.spec, MaskKind::kJoint);
  for (std::size_t i = 0; i < joint.values.size(); ++i) {
    const bool lidar_seen = lidar.values[i] == kLidarFree || lidar.values[i] == kLidarOccupied;
    joint.values[i] = (lidar_seen && camera.values[i] == kCameraObserved) ? 1 : 0;
  }
  return joint;
}

OccGrid apply_lidar_mask(const OccGrid& voxelized, const VisibilityMask& lidar) {
  require_same_spec(voxelized.spec, lidar.spec, "apply_lidar_mask");
  OccGrid out(voxelized.spec);
  for (std::size_t i = 0; i < out.state.size(); ++i) {
    if (lidar.values[i] == kLidarOccupied && voxelized.state[i] == VoxelState::kOccupied) {
      out.set_occupied(i, voxelized.semantics[i]);
    } else if (lidar.values[i] == kLidarFree) {
      out.state[i] = VoxelState::kFree;
    }
  }
  return out;
}

}  // namespace occgen
