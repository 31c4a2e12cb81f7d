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
#include <vector>

#include <json.hpp>

#include "occgen/grid.hpp"
#include "occgen/visibility.hpp"

namespace occgen {

/// Per-class TP/FP/FN over the masked voxels. Index `num_classes` is the
/// "free" label: it competes with the semantic classes but is only scored
/// when asked for.
struct ConfusionTable {
  int num_classes = 0;
  std::vector<std::uint64_t> tp, fp, fn;  // size num_classes + 1
  std::uint64_t masked_voxels = 0;

  explicit ConfusionTable(int classes = 0)
      : num_classes(classes), tp(classes + 1, 0), fp(classes + 1, 0), fn(classes + 1, 0) {}

  int free_index() const { return num_classes; }

  bool operator==(const ConfusionTable&) const = default;
};

/// Counts over voxels where `mask` is nonzero. A voxel's label is its class
/// when occupied and "free" otherwise. Throws kSpecMismatch if the three
/// grids differ, kSchemaViolation for a class id >= num_classes.
ConfusionTable confusion(const OccGrid& pred, const OccGrid& gt, const VisibilityMask& mask, int num_classes);

struct MiouOptions {
  /// Also score the free label (diagnostic).
  bool include_free = false;
  /// Classes left out of the average (e.g. the general-object class).
  std::vector<int> exclude;
};

struct MiouResult {
  /// IoU per class (free last); nullopt where TP+FP+FN = 0 or excluded.
  std::vector<std::optional<double>> iou;
  /// Mean over present classes; nullopt when no class is present.
  std::optional<double> mean;
  /// Mean over all scored classes with absent classes counted as 0.
  std::optional<double> mean_zero_filled;
  int present_classes = 0;
};

MiouResult miou(const ConfusionTable& table, const MiouOptions& options = {});

/// Machine-readable report: counts, per-class IoU, and mIoU under both
/// zero-denominator conventions, with and without `go_class`.
nlohmann::json evaluation_report(const ConfusionTable& table, const std::vector<std::string>& class_names,
                                 std::optional<int> go_class, bool include_free);

}  // namespace occgen
