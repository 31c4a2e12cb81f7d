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

#include "occgen/aggregation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "occgen/error.hpp"
#include "occgen/parallel.hpp"

namespace occgen {

namespace {

std::vector<int> boxes_by_track(const std::vector<Box3D>& boxes, const SplitOptions& options) {
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(boxes.size()); ++i) {
    if (!options.static_classes.contains(boxes[i].class_id)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return boxes[a].track_id < boxes[b].track_id; });
  return order;
}

}  // namespace

SplitResult split_dynamic_static(const FrameBundle& frame, const SplitOptions& options) {
  SplitResult out;
  const Pose to_world = frame.sensor_to_world();
  const std::vector<int> order = boxes_by_track(frame.boxes, options);
  std::vector<Pose> to_canonical;
  to_canonical.reserve(frame.boxes.size());
  for (const Box3D& b : frame.boxes) to_canonical.push_back(b.to_canonical());

  const auto& cloud = frame.lidar_cloud;
  if (cloud.labels) out.static_world.labels.emplace();
  out.owner.assign(cloud.size(), -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 world = to_world.apply(cloud.points[i]);
    int owner = -1;
    for (int b : order) {
      if (box_contains(frame.boxes[b], world)) {
        owner = b;
        break;
      }
    }
    out.owner[i] = owner;
    if (owner < 0) {
      out.static_world.points.push_back(world);
      if (cloud.labels) out.static_world.labels->push_back((*cloud.labels)[i]);
      continue;
    }
    auto& obj = out.per_object[frame.boxes[owner].track_id];
    obj.frame = Frame::kObjectCanonical;
    obj.points.push_back(to_canonical[owner].apply(world));
  }
  return out;
}

std::map<Timestamp, std::vector<Box3D>> interpolate_tracks(const std::vector<FrameBundle>& keyframes,
                                                           const std::vector<Timestamp>& all_timestamps) {
  if (keyframes.empty()) {
    throw Error(ErrorKind::kNoAnnotation, "no annotated keyframes to interpolate from");
  }
  // Per-track keyframe appearances, ordered by time.
  std::map<TrackId, std::map<Timestamp, const Box3D*>> tracks;
  std::map<Timestamp, const FrameBundle*> by_time;
  for (const FrameBundle& kf : keyframes) {
    by_time[kf.timestamp] = &kf;
    for (const Box3D& b : kf.boxes) tracks[b.track_id][kf.timestamp] = &b;
  }

  std::map<Timestamp, std::vector<Box3D>> out;
  for (Timestamp t : all_timestamps) {
    auto& boxes = out[t];
    boxes.clear();
    if (auto kf = by_time.find(t); kf != by_time.end()) {
      boxes = kf->second->boxes;
      continue;
    }
    for (const auto& [track, seq] : tracks) {
      auto after = seq.upper_bound(t);
      if (after == seq.begin() || after == seq.end()) continue;
      auto before = std::prev(after);
      const Box3D& a = *before->second;
      const Box3D& b = *after->second;
      const double alpha = static_cast<double>(t - a.timestamp) /
                           static_cast<double>(b.timestamp - a.timestamp);
      Box3D box = box_interpolate(a, b, alpha);
      box.timestamp = t;
      boxes.push_back(box);
    }
  }
  return out;
}

PointCloud aggregate_static(const std::vector<FrameBundle>& frames, const SplitOptions& options) {
  PointCloud out;
  out.frame = Frame::kWorld;
  bool first = true;
  for (const FrameBundle& f : frames) {
    SplitResult split = split_dynamic_static(f, options);
    if (first) {
      out = std::move(split.static_world);
      first = false;
    } else {
      out.append(split.static_world);
    }
  }
  return out;
}

ObjectCanonicalCloud aggregate_object(const std::vector<FrameBundle>& frames, TrackId track_id,
                                      const SplitOptions& options) {
  ObjectCanonicalCloud out;
  out.track_id = track_id;
  bool found = false;
  for (const FrameBundle& f : frames) {
    const auto it = std::find_if(f.boxes.begin(), f.boxes.end(),
                                 [&](const Box3D& b) { return b.track_id == track_id; });
    if (it == f.boxes.end()) continue;
    if (!found) out.class_id = it->class_id;
    found = true;
    SplitResult split = split_dynamic_static(f, options);
    if (auto obj = split.per_object.find(track_id); obj != split.per_object.end()) {
      out.points.points.insert(out.points.points.end(), obj->second.points.begin(),
                               obj->second.points.end());
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "track " << track_id << " does not appear in any frame";
    throw Error(ErrorKind::kUnknownTrack, msg.str());
  }
  return out;
}

PointCloud place_objects(const std::map<TrackId, ObjectCanonicalCloud>& canon,
                         const std::vector<Box3D>& boxes_at_t) {
  PointCloud out;
  out.frame = Frame::kWorld;
  out.labels.emplace();
  for (const Box3D& box : boxes_at_t) {
    const auto it = canon.find(box.track_id);
    if (it == canon.end()) {
      std::ostringstream msg;
      msg << "box references track " << box.track_id << " without a canonical cloud";
      throw Error(ErrorKind::kMissingTrack, msg.str());
    }
    const Pose to_world = box.to_world();
    for (const Vec3& p : it->second.points.points) {
      out.points.push_back(to_world.apply(p));
      out.labels->push_back(box.class_id);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// KNN voting

namespace {

constexpr std::size_t kHashThreshold = 10000;

struct Neighbor {
  double d2;
  std::uint32_t index;
  bool operator<(const Neighbor& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

inline double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

ClassId vote(const std::vector<Neighbor>& nbrs, const std::vector<ClassId>& labels) {
  std::array<int, 256> counts{};
  for (const Neighbor& n : nbrs) ++counts[labels[n.index]];
  ClassId best = 0;
  for (int c = 1; c < 256; ++c) {
    if (counts[c] > counts[best]) best = static_cast<ClassId>(c);
  }
  return best;
}

// Keeps the k best neighbors under (distance, index) order.
class BoundedHeap {
 public:
  explicit BoundedHeap(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void offer(const Neighbor& n) {
    if (heap_.size() < k_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (n < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = n;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }
  bool full() const { return heap_.size() == k_; }
  double worst_d2() const { return heap_.front().d2; }
  const std::vector<Neighbor>& items() const { return heap_; }
  void clear() { heap_.clear(); }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

void brute_force_neighbors(const Vec3& q, const std::vector<Vec3>& ref, BoundedHeap& heap) {
  for (std::size_t j = 0; j < ref.size(); ++j) {
    heap.offer({dist2(q, ref[j]), static_cast<std::uint32_t>(j)});
  }
}

/// Uniform hash of reference points. Exact: a query expands Chebyshev shells
/// of cells until no unvisited cell can hold a closer point.
class SpatialHash {
 public:
  explicit SpatialHash(const std::vector<Vec3>& ref) : ref_(ref) {
    cell_ = 2.0 * median_nn_distance();
    lo_ = ref.front();
    Vec3 hi = ref.front();
    for (const Vec3& p : ref) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    if (!(cell_ > 0.0)) {
      const double extent = std::max((hi - lo_).maxCoeff(), 1e-3);
      cell_ = extent / std::cbrt(static_cast<double>(ref.size()));
    }
    for (int a = 0; a < 3; ++a) {
      max_cell_[a] = static_cast<int>(std::floor((hi[a] - lo_[a]) / cell_));
    }
    std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      keyed[i] = {key(cell_of(ref[i])), static_cast<std::uint32_t>(i)};
    }
    std::sort(keyed.begin(), keyed.end());
    sorted_.resize(ref.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      sorted_[i] = keyed[i].second;
      auto& range = cells_[keyed[i].first];
      if (range.second == 0) range.first = static_cast<std::uint32_t>(i);
      range.second = static_cast<std::uint32_t>(i + 1);
    }
  }

  void query(const Vec3& q, BoundedHeap& heap) const {
    const std::array<int, 3> c = cell_of(q);
    // Shell radius beyond which every reference cell has been visited.
    int r_max = 0;
    for (int a = 0; a < 3; ++a) {
      r_max = std::max({r_max, std::abs(c[a]), std::abs(c[a] - max_cell_[a])});
    }
    std::size_t visited_cells = 0;
    for (int r = 0; r <= r_max; ++r) {
      for_shell(c, r, [&](const std::array<int, 3>& cell) {
        ++visited_cells;
        if (!in_range(cell)) return;
        const auto it = cells_.find(key(cell));
        if (it == cells_.end()) return;
        for (std::uint32_t s = it->second.first; s < it->second.second; ++s) {
          const std::uint32_t j = sorted_[s];
          heap.offer({dist2(q, ref_[j]), j});
        }
      });
      // Unvisited points are farther than r cells (strictly); a small
      // relative guard keeps the comparison safe under rounding.
      const double covered = r * cell_;
      if (heap.full() && heap.worst_d2() < covered * covered * (1.0 - 1e-9)) return;
      if (visited_cells > ref_.size()) {
        heap.clear();
        brute_force_neighbors(q, ref_, heap);
        return;
      }
    }
  }

 private:
  double median_nn_distance() const {
    const std::size_t n = ref_.size();
    const std::size_t samples = std::min<std::size_t>(256, n);
    std::vector<double> nn;
    nn.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = s * n / samples;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) best = std::min(best, dist2(ref_[i], ref_[j]));
      }
      nn.push_back(std::sqrt(best));
    }
    std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
    return nn[nn.size() / 2];
  }

  std::array<int, 3> cell_of(const Vec3& p) const {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) {
      const double f = std::floor((p[a] - lo_[a]) / cell_);
      c[a] = static_cast<int>(std::clamp(f, -1e9, 1e9));
    }
    return c;
  }

  bool in_range(const std::array<int, 3>& c) const {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < 0 || c[a] > max_cell_[a]) return false;
    }
    return true;
  }

  static std::uint64_t key(const std::array<int, 3>& c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[0]) & 0x1FFFFF) << 42) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[1]) & 0x1FFFFF) << 21) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[2]) & 0x1FFFFF));
  }

  template <typename Fn>
  static void for_shell(const std::array<int, 3>& c, int r, Fn&& fn) {
    if (r == 0) {
      fn(c);
      return;
    }
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        const bool face = std::abs(dx) == r || std::abs(dy) == r;
        const int step = face ? 1 : 2 * r;
        for (int dz = -r; dz <= r; dz += step) fn({c[0] + dx, c[1] + dy, c[2] + dz});
      }
    }
  }

  const std::vector<Vec3>& ref_;
  double cell_ = 0.0;
  Vec3 lo_ = Vec3::Zero();
  std::array<int, 3> max_cell_{};
  std::vector<std::uint32_t> sorted_;
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> cells_;
};

}  // namespace

std::vector<ClassId> knn_label_vote(const PointCloud& unlabeled, const PointCloud& labeled, int k,
                                    unsigned threads) {
  if (labeled.empty() || !labeled.labels) {
    throw Error(ErrorKind::kInsufficientReference, "KNN voting needs a non-empty labeled reference cloud");
  }
  if (k < 1) throw Error(ErrorKind::kSpecValidation, "KNN k must be at least 1");
  const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), labeled.size());
  const auto& labels = *labeled.labels;

  std::vector<ClassId> out(unlabeled.size(), 0);
  std::unique_ptr<SpatialHash> hash;
  if (labeled.size() >= kHashThreshold) hash = std::make_unique<SpatialHash>(labeled.points);

  parallel_shards(unlabeled.size(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
    BoundedHeap heap(k_eff);
    for (std::size_t i = begin; i < end; ++i) {
      heap.clear();
      if (hash) {
        hash->query(unlabeled.points[i], heap);
      } else {
        brute_force_neighbors(unlabeled.points[i], labeled.points, heap);
      }
      out[i] = vote(heap.items(), labels);
    }
  });
  return out;
}

}  // namespace occgen
