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

#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "occgen/error.hpp"
#include "occgen/io.hpp"
#include "occgen/pipeline.hpp"
#include "occgen/synth.hpp"

namespace occgen {
namespace {

namespace fs = std::filesystem;

synth::Primitive box(const Vec3& center, const Vec3& size, ClassId cls) {
  synth::Primitive p;
  p.center = center;
  p.size = size;
  p.class_id = cls;
  return p;
}

// A 16 m square grid with a wall ahead of the sensor. Keyframes are 0.4 m
// apart so surfaces stay mid-voxel in every ego-centred grid.
synth::SceneScript wall_script() {
  synth::SceneScript s;
  s.grid = GridSpec::make({-8, -8, -2.2}, {8, 8, 4.2}, 0.4);
  // Ground stops at the wall, so all of it is visible. Faces sit mid-voxel.
  s.primitives = {box({-1.4, 0, -0.1}, {12.4, 15.2, 0.4}, 1), box({5.1, 0, 1.3}, {0.4, 15.2, 3.2}, 2)};
  s.lidar.extrinsic = Pose::from_translation({0, 0, 1.8});
  s.lidar.azimuth_count = 720;
  s.lidar.elevations_deg = synth::linspace_deg(-80, 10, 91);
  s.lidar.max_range = 30;
  s.cameras = {synth::mounted_camera("front", 300, 300, 300, 150, 600, 300, {0, 0, 1.6}, 0.0, 0.1)};
  s.frame_count = 4;
  s.keyframe_interval = 2;
  s.labels_on_keyframes_only = false;
  s.ego.velocity = {2, 0, 0};
  s.ego.start = {-2.8, 0, 0};
  return s;
}

PipelineConfig config_for(const synth::SceneScript& s, unsigned threads = 1) {
  PipelineConfig c;
  c.grid = s.grid;
  c.threads = threads;
  return c;
}

double occupied_iou(const OccGrid& a, const OccGrid& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.state.size(); ++i) {
    const bool x = a.state[i] == VoxelState::kOccupied, y = b.state[i] == VoxelState::kOccupied;
    inter += x && y;
    uni += x || y;
  }
  return uni ? static_cast<double>(inter) / uni : 1.0;
}

TEST(Pipeline, EmptySceneGivesUnobservedGrids) {
  SceneBundle scene;
  scene.class_names = {"general_object"};
  for (int f = 0; f < 3; ++f) {
    FrameBundle fr;
    fr.timestamp = f * 100000;
    fr.is_keyframe = f != 1;
    scene.frames.push_back(fr);
  }
  PipelineConfig config;
  config.grid = GridSpec::nuscenes();
  const auto results = run_pipeline(scene, config);
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) {
    EXPECT_EQ(r.occupancy.count(VoxelState::kUnobserved), config.grid.voxel_count());
    EXPECT_EQ(r.joint.count(1), 0u);
  }
}

TEST(Pipeline, StaticWallMatchesAnalyticTruth) {
  const synth::SceneScript s = wall_script();
  const SceneBundle scene = synth::generate_scene(s);
  const auto results = run_pipeline(scene, config_for(s));
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) {
    const synth::AnalyticTruth gt = synth::analytic_gt(s, static_cast<int>(r.frame_index));
    EXPECT_GE(occupied_iou(r.occupancy, gt.occupancy), 0.9) << "keyframe " << r.frame_index;
    // Nothing behind the wall is observed.
    for (std::size_t l = 0; l < r.lidar.values.size(); ++l) {
      const Vec3 world = scene.frames[r.frame_index].ego_pose.apply(voxel_center(s.grid, s.grid.unlinear(l)));
      if (world.x() > 5.4 && world.z() > 0.2 && world.z() < 2.6) ASSERT_EQ(r.lidar.values[l], kLidarUnobserved);
    }
    EXPECT_GT(r.joint.count(1), 0u);
  }
}

TEST(Pipeline, ThreadCountDoesNotChangeResults) {
  synth::SceneScript s = synth::demo_script("moving");
  s.grid = GridSpec::make({-16, -16, -2}, {16, 16, 4.4}, 0.4);
  s.frame_count = 6;
  s.keyframe_interval = 5;
  s.lidar.azimuth_count = 256;
  const SceneBundle scene = synth::generate_scene(s);
  const auto a = run_pipeline(scene, config_for(s, 1));
  const auto b = run_pipeline(scene, config_for(s, 3));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].occupancy, b[k].occupancy);
    EXPECT_EQ(a[k].lidar, b[k].lidar);
    EXPECT_EQ(a[k].camera, b[k].camera);
    EXPECT_EQ(a[k].joint, b[k].joint);
  }
}

TEST(Pipeline, MovingObjectLandsInItsKeyframeBox) {
  synth::SceneScript s = synth::demo_script("moving");
  s.grid = GridSpec::make({-16, -16, -2}, {16, 16, 4.4}, 0.4);
  s.frame_count = 11;
  s.lidar.azimuth_count = 256;
  const SceneBundle scene = synth::generate_scene(s);
  const auto results = run_pipeline(scene, config_for(s));
  ASSERT_EQ(results.size(), 3u);
  const synth::Primitive& car = s.primitives.back();
  for (const auto& r : results) {
    Box3D grown = car.box_at(r.timestamp);
    grown.size += Vec3::Constant(2 * s.box_margin + 2 * s.grid.voxel_size);
    std::size_t car_voxels = 0;
    for (std::size_t l = 0; l < r.occupancy.state.size(); ++l) {
      if (r.occupancy.state[l] != VoxelState::kOccupied || r.occupancy.semantics[l] != car.class_id) continue;
      ++car_voxels;
      const Vec3 world = scene.frames[r.frame_index].ego_pose.apply(voxel_center(s.grid, s.grid.unlinear(l)));
      ASSERT_TRUE(box_contains(grown, world)) << "keyframe " << r.frame_index;
    }
    EXPECT_GT(car_voxels, 10u);
  }
}

TEST(Pipeline, EgoFootprintIsMasked) {
  const synth::SceneScript s = wall_script();
  const SceneBundle scene = synth::generate_scene(s);
  PipelineConfig config = config_for(s);
  Box3D footprint;
  footprint.size = {8, 8, 4};
  config.ego_footprint = footprint;
  const auto masked = run_pipeline(scene, config);
  const auto plain = run_pipeline(scene, config_for(s));
  for (std::size_t k = 0; k < masked.size(); ++k) {
    std::size_t inside_plain = 0;
    for (std::size_t l = 0; l < masked[k].joint.values.size(); ++l) {
      const bool inside = box_contains(footprint, voxel_center(s.grid, s.grid.unlinear(l)));
      if (inside) {
        ASSERT_EQ(masked[k].joint.values[l], 0);
        inside_plain += plain[k].joint.values[l];
      } else {
        ASSERT_EQ(masked[k].joint.values[l], plain[k].joint.values[l]);
      }
    }
    EXPECT_GT(inside_plain, 0u);
  }
}

TEST(Pipeline, InvalidGridFailsBeforeReadingScene) {
  PipelineConfig config;
  config.grid.min_corner = {-40, -40, -5};
  config.grid.max_corner = {40, 40, 7.8};
  config.grid.voxel_size = 0.3;
  config.grid.dims = {267, 267, 43};
  try {
    run_pipeline(fs::path("/nonexistent/scene"), config, fs::path("/nonexistent/out"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSpecValidation);
    EXPECT_EQ(e.category(), ErrorCategory::kValidation);
  }
}

TEST(Pipeline, ErrorsCarryStageName) {
  SceneBundle scene;
  scene.class_names = {"general_object"};
  FrameBundle fr;
  scene.frames.push_back(fr);
  try {
    run_pipeline(scene, PipelineConfig{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoAnnotation);
    EXPECT_EQ(std::string(e.what()).rfind("interpolate_tracks", 0), 0u) << e.what();
  }
}

TEST(Pipeline, UnlabeledFramesAreVoted) {
  synth::SceneScript s = wall_script();
  s.labels_on_keyframes_only = true;
  const SceneBundle scene = synth::generate_scene(s);
  const AggregatedScene agg = aggregate_scene(scene, config_for(s));
  EXPECT_GT(agg.voted_points, 0u);
  ASSERT_TRUE(agg.static_world.labels);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < agg.static_world.size(); ++i) {
    const ClassId want = agg.static_world.points[i].z() > 0.1 + 1e-9 ? 2 : 1;
    wrong += (*agg.static_world.labels)[i] != want;
  }
  // Voting can only err near the wall foot, where ground and wall meet.
  EXPECT_LT(static_cast<double>(wrong) / agg.static_world.size(), 0.01);
}

TEST(Pipeline, WritesArtifactsAndProvenance) {
  const fs::path root = fs::temp_directory_path() / ("occgen_pipeline_test_" + std::to_string(std::random_device{}()));
  synth::SceneScript s = wall_script();
  s.frame_count = 2;
  io::write_scene(synth::generate_scene(s), root / "scene");
  const auto results = run_pipeline(root / "scene", config_for(s), root / "out");
  ASSERT_EQ(results.size(), 1u);
  for (const char* f : {"occupancy.oc3g", "lidar_mask.oc3m", "camera_mask.oc3m", "joint_mask.oc3m"}) {
    EXPECT_TRUE(fs::exists(root / "out" / "keyframe_000000" / f)) << f;
  }
  EXPECT_EQ(io::read_grid(root / "out" / "keyframe_000000" / "occupancy.oc3g"), results[0].occupancy);
  EXPECT_EQ(io::read_mask(root / "out" / "keyframe_000000" / "joint_mask.oc3m"), results[0].joint);
  const io::Bytes prov = io::read_file(root / "out" / "provenance.json");
  const auto j = nlohmann::json::parse(prov.begin(), prov.end());
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_EQ(j["keyframes"].size(), 1u);
  fs::remove_all(root);
}

}  // namespace
}  // namespace occgen
