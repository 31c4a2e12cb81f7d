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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "occgen/geom.hpp"
#include "occgen/grid.hpp"

namespace occgen {

struct Ray {
  enum class Kind : std::uint8_t { kLidarReturn, kCameraQuery };
  Vec3 origin = Vec3::Zero();
  Vec3 endpoint = Vec3::Zero();
  Kind kind = Kind::kLidarReturn;
};

enum class MaskKind : std::uint8_t { kLidar = 0, kCamera = 1, kJoint = 2 };

// Ordered so that the merge join is a plain max().
enum LidarVisibility : std::uint8_t {
  kLidarUnobserved = 0,
  kLidarFree = 1,
  kLidarOccupied = 2,
};

enum CameraVisibility : std::uint8_t {
  kCameraUnobserved = 0,
  kCameraObserved = 1,
};

struct VisibilityMask {
  GridSpec spec;
  MaskKind kind = MaskKind::kLidar;
  std::vector<std::uint8_t> values;

  VisibilityMask() = default;
  VisibilityMask(const GridSpec& s, MaskKind k) : spec(s), kind(k), values(s.voxel_count(), 0) {}

  std::uint8_t at(const VoxelIndex& i) const { return values[spec.linear(i)]; }
  std::size_t count(std::uint8_t v) const;

  bool operator==(const VisibilityMask& o) const {
    return spec == o.spec && kind == o.kind && values == o.values;
  }
};

/// Integer-stepping voxel walk over the part of segment [origin, endpoint]
/// inside the grid. `visit(index, linear)` is called for every cell the
/// segment crosses with positive length, in order; returning false stops
/// the walk. On simultaneous boundary crossings the axes step x, y, z in
/// turn and the zero-length cells in between are skipped. The cell that
/// contains the endpoint (per world_to_voxel) is always visited last when
/// it is inside the grid.
template <typename Visit>
void walk_ray(const GridSpec& spec, const Vec3& origin, const Vec3& endpoint, Visit&& visit) {
  const Vec3 d = endpoint - origin;
  const double s = spec.voxel_size;
  double t0 = 0.0;
  double t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = spec.min_corner[a];
    const double hi = spec.min_corner[a] + spec.dims[a] * s;
    if (d[a] == 0.0) {
      if (origin[a] < lo || origin[a] >= hi) return;
      continue;
    }
    double ta = (lo - origin[a]) / d[a];
    double tb = (hi - origin[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t0 < t1)) return;

  VoxelIndex idx;
  int step[3];
  double t_max[3];
  for (int a = 0; a < 3; ++a) {
    const double rel = (origin[a] + t0 * d[a] - spec.min_corner[a]) / s;
    double f = std::floor(rel);
    if (d[a] < 0.0 && rel == f) f -= 1.0;
    idx[a] = std::clamp(static_cast<int>(f), 0, spec.dims[a] - 1);
  }
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (spec.min_corner[a] + (idx[a] + 1) * s - origin[a]) / d[a];
    } else if (d[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (spec.min_corner[a] + idx[a] * s - origin[a]) / d[a];
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
    }
  }

  std::size_t last = std::numeric_limits<std::size_t>::max();
  std::size_t prev = last;
  double t_entry = t0;
  for (;;) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    const double t_exit = std::min(t_max[axis], t1);
    if (t_exit > t_entry) {
      const std::size_t l = spec.linear(idx);
      if (!visit(static_cast<const VoxelIndex&>(idx), l)) return;
      prev = last;
      last = l;
    }
    if (t_max[axis] >= t1) break;
    idx[axis] += step[axis];
    if (idx[axis] < 0 || idx[axis] >= spec.dims[axis]) break;
    t_entry = t_max[axis];
    t_max[axis] = (spec.min_corner[axis] + (step[axis] > 0 ? idx[axis] + 1 : idx[axis]) * s -
                   origin[axis]) /
                  d[axis];
  }

  if (const auto end_idx = world_to_voxel(spec, endpoint)) {
    const std::size_t l = spec.linear(*end_idx);
    if (l != last && l != prev) visit(*end_idx, l);
  }
}

/// Ordered cells crossed by the ray, clipped to the grid.
std::vector<VoxelIndex> traverse_ray(const GridSpec& spec, const Ray& ray);

struct VisibilityOptions {
  unsigned threads = 1;
};

/// LiDAR mask: endpoint voxels that are occupied in `occ` become
/// kLidarOccupied, cells crossed before the first occupied cell become
/// kLidarFree, everything else stays kLidarUnobserved.
VisibilityMask lidar_visibility(const GridSpec& spec, const OccGrid& occ, const std::vector<Ray>& rays,
                                const VisibilityOptions& options = {});

/// Camera-center to voxel-center rays for every occupied voxel whose center
/// projects into the image with positive depth. Ordered by voxel index.
std::vector<Ray> camera_rays(const GridSpec& spec, const OccGrid& occ, const Camera& camera);

/// Receives each cast camera ray with the cells it marked observed.
using CameraRayObserver = std::function<void(const Ray&, const std::vector<std::size_t>&)>;

/// Camera mask: along each camera ray, cells up to and including the first
/// occupied one are observed. Cameras merge by union.
VisibilityMask camera_visibility(const GridSpec& spec, const OccGrid& occ,
                                 const std::vector<Camera>& cameras,
                                 const VisibilityOptions& options = {},
                                 const CameraRayObserver& observer = {});

/// Joint evaluation mask: LiDAR observed (free or occupied) and camera
/// observed. Throws kSpecMismatch when the grids differ.
VisibilityMask finalize_masks(const VisibilityMask& lidar, const VisibilityMask& camera);

/// Combines the voxelized grid with the LiDAR mask into the final label grid:
/// occupied where both agree, free where the mask says free, else unobserved.
OccGrid apply_lidar_mask(const OccGrid& voxelized, const VisibilityMask& lidar);

}  // namespace occgen
