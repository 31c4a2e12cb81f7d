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

#include "occgen/eval.hpp"

#include <algorithm>
#include <sstream>

#include "occgen/error.hpp"

namespace occgen {

ConfusionTable confusion(const OccGrid& pred, const OccGrid& gt, const VisibilityMask& mask,
                         int num_classes) {
  if (!(pred.spec == gt.spec) || !(gt.spec == mask.spec)) {
    throw Error(ErrorKind::kSpecMismatch, "prediction, ground truth and mask must share a grid spec");
  }
  ConfusionTable table(num_classes);
  const int free_label = table.free_index();
  auto label_of = [&](const OccGrid& g, std::size_t i) -> int {
    if (g.state[i] != VoxelState::kOccupied) return free_label;
    const int c = g.semantics[i];
    if (c >= num_classes) {
      std::ostringstream msg;
      msg << "class id " << c << " outside ontology of " << num_classes << " classes";
      throw Error(ErrorKind::kSchemaViolation, msg.str());
    }
    return c;
  };
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    if (mask.values[i] == 0) continue;
    ++table.masked_voxels;
    const int p = label_of(pred, i);
    const int g = label_of(gt, i);
    if (p == g) {
      ++table.tp[p];
    } else {
      ++table.fp[p];
      ++table.fn[g];
    }
  }
  return table;
}

MiouResult miou(const ConfusionTable& table, const MiouOptions& options) {
  MiouResult out;
  const int scored = table.num_classes + (options.include_free ? 1 : 0);
  out.iou.assign(table.num_classes + 1, std::nullopt);
  double sum = 0.0;
  int considered = 0;
  for (int c = 0; c < scored; ++c) {
    if (std::find(options.exclude.begin(), options.exclude.end(), c) != options.exclude.end()) continue;
    ++considered;
    const std::uint64_t denom = table.tp[c] + table.fp[c] + table.fn[c];
    if (denom == 0) continue;
    const double iou = static_cast<double>(table.tp[c]) / static_cast<double>(denom);
    out.iou[c] = iou;
    sum += iou;
    ++out.present_classes;
  }
  if (out.present_classes > 0) {
    out.mean = sum / out.present_classes;
    out.mean_zero_filled = sum / considered;
  }
  return out;
}

nlohmann::json evaluation_report(const ConfusionTable& table, const std::vector<std::string>& class_names,
                                 std::optional<int> go_class, bool include_free) {
  using nlohmann::json;
  auto name_of = [&](int c) -> std::string {
    if (c == table.free_index()) return "free";
    if (c < static_cast<int>(class_names.size())) return class_names[c];
    return "class_" + std::to_string(c);
  };
  auto opt = [](const std::optional<double>& v) -> json { return v ? json(*v) : json(nullptr); };

  MiouOptions with_go{.include_free = include_free, .exclude = {}};
  MiouOptions without_go = with_go;
  if (go_class) without_go.exclude.push_back(*go_class);
  const MiouResult all = miou(table, with_go);
  const MiouResult no_go = miou(table, without_go);

  json classes = json::array();
  const int last = table.num_classes + (include_free ? 1 : 0);
  for (int c = 0; c < last; ++c) {
    classes.push_back({{"id", c},
                       {"name", name_of(c)},
                       {"tp", table.tp[c]},
                       {"fp", table.fp[c]},
                       {"fn", table.fn[c]},
                       {"iou", opt(all.iou[c])}});
  }
  json report;
  report["masked_voxels"] = table.masked_voxels;
  report["classes"] = classes;
  report["free_scored"] = include_free;
  report["miou"] = {
      {"exclude_absent", opt(all.mean)},
      {"absent_as_zero", opt(all.mean_zero_filled)},
      {"present_classes", all.present_classes},
  };
  report["miou_without_go"] = {
      {"exclude_absent", opt(no_go.mean)},
      {"absent_as_zero", opt(no_go.mean_zero_filled)},
      {"present_classes", no_go.present_classes},
  };
  if (go_class) report["go_class"] = *go_class;
  return report;
}

}  // namespace occgen
