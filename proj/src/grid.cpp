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

#include "occgen/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "occgen/error.hpp"

namespace occgen {

GridSpec GridSpec::make(const Vec3& min_corner, const Vec3& max_corner, double voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw Error(ErrorKind::kSpecValidation, "voxel size must be positive and finite");
  }
  GridSpec spec;
  spec.min_corner = min_corner;
  spec.max_corner = max_corner;
  spec.voxel_size = voxel_size;
  for (int i = 0; i < 3; ++i) {
    const double extent = max_corner[i] - min_corner[i];
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      throw Error(ErrorKind::kSpecValidation, "grid range must have max > min on every axis");
    }
    const double cells = std::round(extent / voxel_size);
    if (cells < 1.0 || cells > std::numeric_limits<int>::max() ||
        std::abs(cells * voxel_size - extent) >= 1e-6) {
      std::ostringstream msg;
      msg << "voxel size " << voxel_size << " does not divide range [" << min_corner[i] << ", "
          << max_corner[i] << "] on axis " << "xyz"[i];
      throw Error(ErrorKind::kSpecValidation, msg.str());
    }
    spec.dims[i] = static_cast<int>(cells);
  }
  return spec;
}

GridSpec GridSpec::waymo(double voxel_size) {
  return make(Vec3(-40.0, -40.0, -5.0), Vec3(40.0, 40.0, 7.8), voxel_size);
}

GridSpec GridSpec::nuscenes(double voxel_size) {
  return make(Vec3(-40.0, -40.0, -1.0), Vec3(40.0, 40.0, 5.4), voxel_size);
}

std::optional<VoxelIndex> world_to_voxel(const GridSpec& spec, const Vec3& p) {
  VoxelIndex idx;
  for (int i = 0; i < 3; ++i) {
    const double f = std::floor((p[i] - spec.min_corner[i]) / spec.voxel_size);
    if (!(f >= 0.0) || f >= spec.dims[i]) return std::nullopt;
    idx[i] = static_cast<int>(f);
  }
  return idx;
}

Vec3 voxel_center(const GridSpec& spec, const VoxelIndex& idx) {
  if (!spec.contains(idx)) {
    std::ostringstream msg;
    msg << "voxel index (" << idx[0] << ", " << idx[1] << ", " << idx[2]
        << ") outside grid dims (" << spec.dims[0] << ", " << spec.dims[1] << ", "
        << spec.dims[2] << ")";
    throw Error(ErrorKind::kIndexOutOfRange, msg.str());
  }
  return spec.min_corner +
         spec.voxel_size * Vec3(idx[0] + 0.5, idx[1] + 0.5, idx[2] + 0.5);
}

std::size_t OccGrid::count(VoxelState s) const {
  return static_cast<std::size_t>(std::count(state.begin(), state.end(), s));
}

}  // namespace occgen
