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

#include "occgen/geom.hpp"
#include "occgen/grid.hpp"

namespace occgen {

struct VoxelizeOptions {
  /// Voxels with fewer in-bounds points stay unobserved.
  int min_points = 1;
  /// Label given to points without a label column.
  ClassId unlabeled_class = 0;
  unsigned threads = 1;
};

/// Majority-class occupancy from labeled points. Produces only kOccupied and
/// kUnobserved; free space is a visibility outcome. Class ties resolve to the
/// smallest id.
OccGrid voxelize(const PointCloud& cloud, const GridSpec& spec, const VoxelizeOptions& options = {});

}  // namespace occgen
