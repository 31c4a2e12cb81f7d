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

#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "occgen/aggregation.hpp"
#include "occgen/error.hpp"
#include "oracles.hpp"

namespace occgen {
namespace {

constexpr double kPi = std::numbers::pi;

Box3D box_at(const Vec3& center, const Vec3& size, double yaw, TrackId track, Timestamp ts, ClassId cls = 3) {
  Box3D b;
  b.center = center;
  b.size = size;
  b.yaw = yaw;
  b.track_id = track;
  b.timestamp = ts;
  b.class_id = cls;
  return b;
}

FrameBundle frame_with(const std::vector<Vec3>& sensor_points, Timestamp ts = 0) {
  FrameBundle f;
  f.timestamp = ts;
  f.lidar_cloud.points = sensor_points;
  return f;
}

TEST(Split, NoBoxesMeansAllStatic) {
  const SplitResult r = split_dynamic_static(frame_with({{1, 2, 3}, {4, 5, 6}}));
  EXPECT_EQ(r.static_world.size(), 2u);
  EXPECT_TRUE(r.per_object.empty());
  EXPECT_EQ(r.static_world.frame, Frame::kWorld);
}

TEST(Split, CanonicalCoordinates) {
  FrameBundle f = frame_with({{10.5, 0, 0}});
  f.boxes = {box_at({10, 0, 0}, {4, 2, 2}, 0, 7, 0)};
  const SplitResult r = split_dynamic_static(f);
  ASSERT_EQ(r.per_object.count(7), 1u);
  const Vec3 c = r.per_object.at(7).points.at(0);
  EXPECT_NEAR(c.x(), 0.5, 1e-12);
  EXPECT_NEAR(c.y(), 0.0, 1e-12);
  EXPECT_EQ(r.static_world.size(), 0u);
}

TEST(Split, UsesEgoPoseAndExtrinsic) {
  FrameBundle f = frame_with({{0.5, 0, 0}});
  f.lidar_extrinsic = Pose::from_translation({0, 0, 2});
  f.ego_pose = Pose::from_yaw(kPi / 2, {10, 0, 0});
  f.boxes = {box_at({10, 0.5, 2}, {1, 1, 1}, 0, 1, 0)};
  const SplitResult r = split_dynamic_static(f);
  ASSERT_EQ(r.per_object.count(1), 1u);
  EXPECT_NEAR(r.per_object.at(1).points[0].norm(), 0.0, 1e-12);
}

TEST(Split, SharedFaceGoesToSmallerTrack) {
  // Boxes overlap over x in [1, 1.5); the point at x = 1.2 lies in both.
  FrameBundle f = frame_with({{1.2, 0, 0}});
  f.boxes = {box_at({2.25, 0, 0}, {2.5, 2, 2}, 0, 9, 0), box_at({0, 0, 0}, {3, 2, 2}, 0, 4, 0)};
  const SplitResult r = split_dynamic_static(f);
  EXPECT_EQ(r.per_object.count(4), 1u);
  EXPECT_EQ(r.per_object.count(9), 0u);
  EXPECT_EQ(r.owner.at(0), 1);
}

TEST(Split, StaticClassOverride) {
  FrameBundle f = frame_with({{0, 0, 0}});
  f.boxes = {box_at({0, 0, 0}, {1, 1, 1}, 0, 1, 0, 5)};
  SplitOptions opt;
  opt.static_classes = {5};
  EXPECT_EQ(split_dynamic_static(f, opt).static_world.size(), 1u);
}

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double span) {
  std::uniform_real_distribution<double> u(-span, span);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng) * 0.2);
  return pts;
}

std::vector<Box3D> random_boxes(std::mt19937_64& rng, int n, Timestamp ts) {
  std::uniform_real_distribution<double> u(-8, 8), sz(1, 5), ang(-kPi, kPi);
  std::vector<Box3D> boxes;
  for (int i = 0; i < n; ++i) {
    boxes.push_back(box_at({u(rng), u(rng), 0}, {sz(rng), sz(rng), 3}, ang(rng), static_cast<TrackId>(100 - i), ts));
  }
  return boxes;
}

TEST(Split, PartitionAndRoundTrip) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    FrameBundle f = frame_with(random_points(rng, 2000, 10), 1000);
    f.ego_pose = Pose::from_yaw(0.3 * trial, {trial * 1.0, 0, 0});
    f.lidar_extrinsic = Pose::from_translation({0.5, 0, 1.8});
    f.boxes = random_boxes(rng, 4, 1000);
    const SplitResult r = split_dynamic_static(f);
    std::size_t total = r.static_world.size();
    std::map<TrackId, ObjectCanonicalCloud> canon;
    for (const auto& [track, pc] : r.per_object) {
      total += pc.size();
      canon[track].track_id = track;
      canon[track].points = pc;
    }
    ASSERT_EQ(total, f.lidar_cloud.size());

    for (const Box3D& b : f.boxes) canon[b.track_id].track_id = b.track_id;
    const PointCloud placed = place_objects(canon, f.boxes);
    std::vector<Vec3> expected;
    const PointCloud world = transform(f.sensor_to_world(), f.lidar_cloud, Frame::kWorld);
    // place_objects emits boxes in the given order, points in input order.
    for (std::size_t bi = 0; bi < f.boxes.size(); ++bi) {
      for (std::size_t i = 0; i < world.size(); ++i) {
        if (r.owner[i] == static_cast<int>(bi)) expected.push_back(world.points[i]);
      }
    }
    ASSERT_EQ(placed.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) ASSERT_LE((placed.points[i] - expected[i]).norm(), 1e-9);
  }
}

FrameBundle keyframe(Timestamp ts, std::vector<Box3D> boxes) {
  FrameBundle f;
  f.timestamp = ts;
  f.is_keyframe = true;
  f.boxes = std::move(boxes);
  return f;
}

TEST(InterpolateTracks, MidpointAndNoExtrapolation) {
  const auto a = box_at({0, 0, 0}, {2, 2, 2}, 0, 1, 0);
  const auto b = box_at({10, 0, 0}, {2, 2, 2}, kPi / 2, 1, 500000);
  const auto late = box_at({5, 5, 0}, {1, 1, 1}, 0, 2, 500000);
  const auto out = interpolate_tracks({keyframe(0, {a}), keyframe(500000, {b, late})}, {0, 250000, 500000});
  ASSERT_EQ(out.at(250000).size(), 1u);
  const Box3D& mid = out.at(250000)[0];
  EXPECT_NEAR(mid.center.x(), 5.0, 1e-12);
  EXPECT_NEAR(mid.yaw, kPi / 4, 1e-12);
  EXPECT_EQ(mid.timestamp, 250000);
  EXPECT_EQ(out.at(0).size(), 1u);
  EXPECT_EQ(out.at(500000).size(), 2u);
}

TEST(InterpolateTracks, StationaryTrackIsConstant) {
  const auto a = box_at({3, 4, 0.5}, {4, 2, 1.5}, 0.7, 5, 0);
  auto b = a;
  b.timestamp = 1000000;
  const auto out = interpolate_tracks({keyframe(0, {a}), keyframe(1000000, {b})}, {0, 100000, 400000, 1000000});
  for (Timestamp t : {100000, 400000}) {
    ASSERT_EQ(out.at(t).size(), 1u);
    EXPECT_EQ(out.at(t)[0].center, a.center);
    EXPECT_EQ(out.at(t)[0].yaw, a.yaw);
    EXPECT_EQ(out.at(t)[0].size, a.size);
  }
}

TEST(InterpolateTracks, EmptyKeyframesFail) {
  try {
    interpolate_tracks({}, {0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoAnnotation);
  }
}

TEST(AggregateStatic, CountsAndOverlay) {
  FrameBundle f0 = frame_with({{5, 0, 0}, {5, 1, 0}}, 0);
  FrameBundle f1 = frame_with({{4, 0, 0}, {4, 1, 0}}, 100);
  f1.ego_pose = Pose::from_translation({1, 0, 0});
  const PointCloud one = aggregate_static({f0});
  EXPECT_EQ(one.size(), 2u);
  const PointCloud both = aggregate_static({f0, f1});
  ASSERT_EQ(both.size(), 4u);
  EXPECT_EQ(both.points[0], both.points[2]);
  EXPECT_EQ(both.points[1], both.points[3]);
}

TEST(AggregateStatic, CarriesLabels) {
  FrameBundle f = frame_with({{1, 1, 1}});
  f.lidar_cloud.labels = std::vector<ClassId>{3};
  const PointCloud out = aggregate_static({f, f});
  ASSERT_TRUE(out.labels);
  EXPECT_EQ(*out.labels, (std::vector<ClassId>{3, 3}));
}

TEST(AggregateObject, SingleFrameEmptyAndUnknown) {
  FrameBundle f = frame_with({{10.5, 0, 0}, {30, 0, 0}});
  f.boxes = {box_at({10, 0, 0}, {4, 2, 2}, 0, 7, 0), box_at({-10, 0, 0}, {1, 1, 1}, 0, 8, 0)};
  const ObjectCanonicalCloud obj = aggregate_object({f}, 7);
  EXPECT_EQ(obj.track_id, 7u);
  EXPECT_EQ(obj.class_id, 3);
  ASSERT_EQ(obj.points.size(), 1u);
  EXPECT_NEAR(obj.points.points[0].x(), 0.5, 1e-12);
  EXPECT_EQ(aggregate_object({f}, 8).points.size(), 0u);
  try {
    aggregate_object({f}, 99);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownTrack);
  }
}

TEST(AggregateObject, NoBlurForRigidTranslation) {
  // Object surface points fixed in the box frame, box moving 10 m over 5 frames.
  const std::vector<Vec3> local{{1.9, 0.5, 0.2}, {-1.9, -0.8, 0.7}, {0.3, 0.9, -0.7}, {1.0, -0.9, 0.0}};
  std::vector<FrameBundle> frames;
  for (int i = 0; i < 5; ++i) {
    const Box3D b = box_at({2.5 * i, 1, 0}, {4, 2, 2}, 0.2, 3, i * 100000);
    FrameBundle f;
    f.timestamp = b.timestamp;
    f.ego_pose = Pose::from_yaw(0.1 * i, {i * 1.3, -2, 0});
    const Pose sensor_from_world = invert(f.sensor_to_world());
    for (const Vec3& p : local) f.lidar_cloud.points.push_back(sensor_from_world.apply(b.to_world().apply(p)));
    f.boxes = {b};
    frames.push_back(f);
  }
  const auto extent = [](const PointCloud& c) {
    Vec3 lo = c.points[0], hi = c.points[0];
    for (const Vec3& p : c.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return Vec3(hi - lo);
  };
  const Vec3 single = extent(aggregate_object({frames[0]}, 3).points);
  const Vec3 all = extent(aggregate_object(frames, 3).points);
  EXPECT_LT((all - single).maxCoeff(), 1e-6);
}

TEST(PlaceObjects, Examples) {
  std::map<TrackId, ObjectCanonicalCloud> canon;
  canon[1].track_id = 1;
  canon[1].points.points = {{0.5, 0, 0}};
  canon[2].track_id = 2;
  canon[2].points.points = {{1, 0, 0}};
  const PointCloud a = place_objects(canon, {box_at({10, 0, 0}, {4, 2, 2}, 0, 1, 0, 6)});
  EXPECT_NEAR((a.points.at(0) - Vec3(10.5, 0, 0)).norm(), 0.0, 1e-12);
  ASSERT_TRUE(a.labels);
  EXPECT_EQ(a.labels->at(0), 6);
  const PointCloud b = place_objects(canon, {box_at({0, 0, 0}, {4, 2, 2}, kPi / 2, 2, 0)});
  EXPECT_NEAR((b.points.at(0) - Vec3(0, 1, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(place_objects(canon, {}).size(), 0u);
  try {
    place_objects(canon, {box_at({0, 0, 0}, {1, 1, 1}, 0, 42, 0)});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingTrack);
  }
}

PointCloud labeled_cloud(const std::vector<Vec3>& pts, const std::vector<ClassId>& labels) {
  PointCloud c(Frame::kWorld);
  c.points = pts;
  c.labels = labels;
  return c;
}

TEST(KnnVote, SmallExamples) {
  const PointCloud ref = labeled_cloud({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {10, 0, 0}}, {1, 1, 4, 4});
  PointCloud q(Frame::kWorld);
  q.points = {{0.1, 0, 0}, {9, 0, 0}};
  EXPECT_EQ(knn_label_vote(q, ref, 1), (std::vector<ClassId>{1, 4}));
  EXPECT_EQ(knn_label_vote(q, ref, 3)[0], 1);
  // Two-two split among four neighbours resolves to the smaller id.
  EXPECT_EQ(knn_label_vote(q, ref, 4)[0], 1);
}

TEST(KnnVote, Errors) {
  PointCloud q(Frame::kWorld);
  q.points = {{0, 0, 0}};
  try {
    knn_label_vote(q, labeled_cloud({}, {}), 3);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientReference);
  }
  EXPECT_THROW(knn_label_vote(q, labeled_cloud({{0, 0, 0}}, {1}), 0), Error);
}

void check_against_oracle(std::mt19937_64& rng, std::size_t n_ref, std::size_t n_query, int k, bool lattice) {
  std::uniform_real_distribution<double> u(-20, 20);
  std::uniform_int_distribution<int> cls(0, 5), grid(-20, 20);
  std::vector<Vec3> ref, queries;
  std::vector<ClassId> labels;
  for (std::size_t i = 0; i < n_ref; ++i) {
    // Integer lattice points create many exact distance ties.
    ref.push_back(lattice ? Vec3(grid(rng), grid(rng), grid(rng) % 3) : Vec3(u(rng), u(rng), u(rng) * 0.1));
    labels.push_back(static_cast<ClassId>(cls(rng)));
  }
  for (std::size_t i = 0; i < n_query; ++i) {
    queries.push_back(lattice ? Vec3(grid(rng) + 0.5, grid(rng), 0) : Vec3(u(rng) * 1.2, u(rng) * 1.2, u(rng)));
  }
  PointCloud q(Frame::kWorld);
  q.points = queries;
  const auto want = oracle::knn_vote(queries, ref, labels, k);
  for (unsigned threads : {1u, 3u}) EXPECT_EQ(knn_label_vote(q, labeled_cloud(ref, labels), k, threads), want);
}

TEST(KnnVote, MatchesBruteForceSmall) {
  std::mt19937_64 rng(1);
  check_against_oracle(rng, 200, 200, 5, false);
  check_against_oracle(rng, 200, 200, 5, true);
  check_against_oracle(rng, 50, 100, 60, false);
}

TEST(KnnVote, MatchesBruteForceWithSpatialHash) {
  std::mt19937_64 rng(2);
  check_against_oracle(rng, 20000, 300, 5, false);
  check_against_oracle(rng, 20000, 300, 7, true);
}

}  // namespace
}  // namespace occgen
