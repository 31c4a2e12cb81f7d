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

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "occgen/geom.hpp"

namespace occgen {

using VoxelIndex = std::array<int, 3>;

/// Regular axis-aligned lattice of cubic, half-open cells.
struct GridSpec {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();
  double voxel_size = 0.0;
  std::array<int, 3> dims{0, 0, 0};

  /// Validates that the voxel size divides every axis range (to 1e-6 m) and
  /// derives dims. Throws kSpecValidation otherwise.
  static GridSpec make(const Vec3& min_corner, const Vec3& max_corner, double voxel_size);

  /// x,y in [-40,40], z in [-5,7.8], 0.4 m.
  static GridSpec waymo(double voxel_size = 0.4);
  /// x,y in [-40,40], z in [-1,5.4], 0.4 m.
  static GridSpec nuscenes(double voxel_size = 0.4);

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  bool contains(const VoxelIndex& idx) const {
    return idx[0] >= 0 && idx[0] < dims[0] && idx[1] >= 0 && idx[1] < dims[1] &&
           idx[2] >= 0 && idx[2] < dims[2];
  }

  /// x slowest, z fastest.
  std::size_t linear(const VoxelIndex& idx) const {
    return (static_cast<std::size_t>(idx[0]) * dims[1] + idx[1]) * dims[2] + idx[2];
  }

  VoxelIndex unlinear(std::size_t l) const {
    const int z = static_cast<int>(l % dims[2]);
    l /= dims[2];
    const int y = static_cast<int>(l % dims[1]);
    return {static_cast<int>(l / dims[1]), y, z};
  }

  bool operator==(const GridSpec& o) const {
    return min_corner == o.min_corner && max_corner == o.max_corner &&
           voxel_size == o.voxel_size && dims == o.dims;
  }
};

/// floor((p - min) / size) per axis; nullopt outside [0, dims).
std::optional<VoxelIndex> world_to_voxel(const GridSpec& spec, const Vec3& p);

/// min + (index + 0.5) * size. Throws kIndexOutOfRange.
Vec3 voxel_center(const GridSpec& spec, const VoxelIndex& idx);

enum class VoxelState : std::uint8_t { kUnobserved = 0, kFree = 1, kOccupied = 2 };

/// Dense per-voxel occupancy state and semantics. `semantics` holds
/// kNoClass wherever the state is not occupied.
struct OccGrid {
  GridSpec spec;
  std::vector<VoxelState> state;
  std::vector<ClassId> semantics;

  OccGrid() = default;
  explicit OccGrid(const GridSpec& s, VoxelState fill = VoxelState::kUnobserved)
      : spec(s), state(s.voxel_count(), fill), semantics(s.voxel_count(), kNoClass) {}

  VoxelState state_at(const VoxelIndex& i) const { return state[spec.linear(i)]; }
  ClassId class_at(const VoxelIndex& i) const { return semantics[spec.linear(i)]; }

  void set_occupied(std::size_t l, ClassId c) {
    state[l] = VoxelState::kOccupied;
    semantics[l] = c;
  }

  std::size_t count(VoxelState s) const;

  bool operator==(const OccGrid& o) const {
    return spec == o.spec && state == o.state && semantics == o.semantics;
  }
};

}  // namespace occgen
