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

#include "occgen/voxelizer.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "occgen/parallel.hpp"

namespace occgen {

namespace {

// (linear voxel index, class) packed so that sorting groups voxels and
// orders classes ascending within each voxel.
inline std::uint64_t pack(std::size_t linear, ClassId c) {
  return (static_cast<std::uint64_t>(linear) << 8) | c;
}

}  // namespace

OccGrid voxelize(const PointCloud& cloud, const GridSpec& spec, const VoxelizeOptions& options) {
  OccGrid grid(spec);
  const std::size_t n = cloud.size();
  const unsigned shards = shard_count(n, options.threads);
  std::vector<std::vector<std::uint64_t>> keys(shards);

  parallel_shards(n, shards, [&](std::size_t begin, std::size_t end, unsigned s) {
    auto& out = keys[s];
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const auto idx = world_to_voxel(spec, cloud.points[i]);
      if (!idx) continue;
      const ClassId c = cloud.labels ? (*cloud.labels)[i] : options.unlabeled_class;
      out.push_back(pack(spec.linear(*idx), c));
    }
    std::sort(out.begin(), out.end());
  });

  std::vector<std::uint64_t> all;
  for (auto& k : keys) {
    const auto mid = static_cast<std::ptrdiff_t>(all.size());
    all.insert(all.end(), k.begin(), k.end());
    std::inplace_merge(all.begin(), all.begin() + mid, all.end());
  }

  const int min_points = std::max(1, options.min_points);
  std::size_t i = 0;
  while (i < all.size()) {
    const std::uint64_t voxel = all[i] >> 8;
    int total = 0;
    int best_count = 0;
    ClassId best_class = kNoClass;
    while (i < all.size() && (all[i] >> 8) == voxel) {
      const ClassId c = static_cast<ClassId>(all[i] & 0xFF);
      int run = 0;
      while (i < all.size() && all[i] == pack(voxel, c)) {
        ++run;
        ++i;
      }
      total += run;
      // Classes arrive ascending, so strict > keeps the smallest id on ties.
      if (run > best_count) {
        best_count = run;
        best_class = c;
      }
    }
    if (total >= min_points) grid.set_occupied(static_cast<std::size_t>(voxel), best_class);
  }
  return grid;
}

}  // namespace occgen
