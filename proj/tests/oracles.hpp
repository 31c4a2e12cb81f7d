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

// Brute-force reference implementations used only by tests. None of these
// call into the code paths they check.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "occgen/geom.hpp"
#include "occgen/grid.hpp"

namespace occgen::oracle {

inline VoxelIndex cell_of(const GridSpec& spec, const Vec3& p, bool* inside) {
  VoxelIndex idx;
  *inside = true;
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - spec.min_corner[a]) / spec.voxel_size);
    if (f < 0 || f >= spec.dims[a]) *inside = false;
    idx[a] = static_cast<int>(f);
  }
  return idx;
}

/// Cells hit by sampling the segment every `step` meters (plus both ends).
inline std::set<VoxelIndex> sampled_cells(const GridSpec& spec, const Vec3& a, const Vec3& b, double step) {
  std::set<VoxelIndex> out;
  const double len = (b - a).norm();
  const long n = std::max(1L, static_cast<long>(std::ceil(len / step)));
  for (long i = 0; i <= n; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
    bool inside = false;
    const VoxelIndex idx = cell_of(spec, p, &inside);
    if (inside) out.insert(idx);
  }
  return out;
}

/// Length of segment [a, b] inside the closed cube of cell `idx`.
inline double cell_intersection_length(const GridSpec& spec, const Vec3& a, const Vec3& b, const VoxelIndex& idx) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = b - a;
  for (int ax = 0; ax < 3; ++ax) {
    const double lo = spec.min_corner[ax] + idx[ax] * spec.voxel_size;
    const double hi = lo + spec.voxel_size;
    if (d[ax] == 0.0) {
      if (a[ax] < lo || a[ax] > hi) return 0.0;
      continue;
    }
    double ta = (lo - a[ax]) / d[ax];
    double tb = (hi - a[ax]) / d[ax];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

/// k nearest by full sort of all (distance, index) pairs, then majority vote
/// with smallest-class tie-break.
inline std::vector<ClassId> knn_vote(const std::vector<Vec3>& queries, const std::vector<Vec3>& ref,
                                     const std::vector<ClassId>& labels, int k) {
  std::vector<ClassId> out;
  for (const Vec3& q : queries) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const Vec3 d = q - ref[j];
      all.emplace_back(d.x() * d.x() + d.y() * d.y() + d.z() * d.z(), j);
    }
    std::sort(all.begin(), all.end());
    std::map<ClassId, int> votes;
    for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) ++votes[labels[all[i].second]];
    ClassId best = votes.begin()->first;
    for (const auto& [c, n] : votes) {
      if (n > votes[best]) best = c;
    }
    out.push_back(best);
  }
  return out;
}

/// Per-voxel class counts in a std::map, majority with smallest-id ties.
inline std::map<std::size_t, ClassId> count_voxels(const GridSpec& spec, const std::vector<Vec3>& pts,
                                                   const std::vector<ClassId>& labels, int min_points) {
  std::map<std::size_t, std::map<ClassId, int>> counts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool inside = false;
    const VoxelIndex idx = cell_of(spec, pts[i], &inside);
    if (!inside) continue;
    const std::size_t l = (static_cast<std::size_t>(idx[0]) * spec.dims[1] + idx[1]) * spec.dims[2] + idx[2];
    ++counts[l][labels[i]];
  }
  std::map<std::size_t, ClassId> out;
  for (const auto& [l, per_class] : counts) {
    int total = 0, best_n = -1;
    ClassId best = 0;
    for (const auto& [c, n] : per_class) {
      total += n;
      if (n > best_n) {
        best_n = n;
        best = c;
      }
    }
    if (total >= min_points) out[l] = best;
  }
  return out;
}

/// Rz(yaw) written out by hand.
inline Vec3 rotate_z(const Vec3& p, double yaw) {
  return Vec3(std::cos(yaw) * p.x() - std::sin(yaw) * p.y(), std::sin(yaw) * p.x() + std::cos(yaw) * p.y(), p.z());
}

inline Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
  if (q.norm() < 1e-3) q = Eigen::Quaterniond::Identity();
  q.normalize();
  Pose p;
  p.rotation = q.toRotationMatrix();
  p.translation = Vec3(u(rng), u(rng), u(rng)) * 50.0;
  return p;
}

/// Per-class TP/FP/FN by scanning every voxel once per class. Index
/// num_classes stands for "not occupied".
struct ClassCounts {
  std::vector<std::uint64_t> tp, fp, fn;
};

inline ClassCounts enumerate_counts(const std::vector<int>& pred, const std::vector<int>& gt,
                                    const std::vector<bool>& mask, int num_classes) {
  ClassCounts out{std::vector<std::uint64_t>(num_classes + 1), std::vector<std::uint64_t>(num_classes + 1),
                  std::vector<std::uint64_t>(num_classes + 1)};
  for (int c = 0; c <= num_classes; ++c) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!mask[i]) continue;
      const bool p = pred[i] == c, g = gt[i] == c;
      out.tp[c] += p && g;
      out.fp[c] += p && !g;
      out.fn[c] += !p && g;
    }
  }
  return out;
}

}  // namespace occgen::oracle
