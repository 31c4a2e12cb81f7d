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

#include "occgen/pipeline.hpp"

#include <iomanip>
#include <sstream>

#include "json_detail.hpp"
#include "occgen/error.hpp"
#include "occgen/io.hpp"
#include "occgen/parallel.hpp"
#include "occgen/voxelizer.hpp"

namespace occgen {

using detail::json;

namespace {

// Runs one stage, prefixing failures with the stage name.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const io::CorruptPayloadError& e) {
    throw io::CorruptPayloadError(std::string(name) + ": " + e.what(), e.offset());
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  const GridSpec check = GridSpec::make(grid.min_corner, grid.max_corner, grid.voxel_size);
  if (!(check == grid)) throw Error(ErrorKind::kSpecValidation, "grid dims disagree with its range");
  if (knn_k < 1) throw Error(ErrorKind::kSpecValidation, "knn k must be at least 1");
  if (min_points < 1) throw Error(ErrorKind::kSpecValidation, "min points must be at least 1");
}

json PipelineConfig::to_json() const {
  json j{{"grid", detail::to_json(grid)},
         {"knn_k", knn_k},
         {"min_points", min_points},
         {"seed", seed},
         {"static_classes", std::vector<int>(static_classes.begin(), static_classes.end())}};
  if (ego_footprint) {
    j["ego_footprint"] = {{"center", detail::to_json(ego_footprint->center)},
                          {"size", detail::to_json(ego_footprint->size)},
                          {"yaw", ego_footprint->yaw}};
  } else {
    j["ego_footprint"] = nullptr;
  }
  return j;
}

AggregatedScene aggregate_scene(const SceneBundle& scene, const PipelineConfig& config) {
  AggregatedScene agg;
  const std::size_t n_frames = scene.frames.size();
  agg.boxes.resize(n_frames);
  agg.sensor_origins.resize(n_frames);
  if (n_frames == 0) {
    agg.static_world.labels.emplace();
    return agg;
  }

  stage("interpolate_tracks", [&] {
    std::vector<FrameBundle> keyframes;
    std::vector<Timestamp> stamps;
    for (const FrameBundle& f : scene.frames) {
      stamps.push_back(f.timestamp);
      if (f.is_keyframe) keyframes.push_back(f);
    }
    const auto boxes = interpolate_tracks(keyframes, stamps);
    for (std::size_t f = 0; f < n_frames; ++f) agg.boxes[f] = boxes.at(scene.frames[f].timestamp);
  });

  SplitOptions split_options{.static_classes = config.static_classes};
  std::vector<SplitResult> splits(n_frames);
  stage("split_dynamic_static", [&] {
    parallel_shards(n_frames, config.threads, [&](std::size_t begin, std::size_t end, unsigned) {
      for (std::size_t f = begin; f < end; ++f) {
        FrameBundle frame = scene.frames[f];
        frame.boxes = agg.boxes[f];
        splits[f] = split_dynamic_static(frame, split_options);
        agg.sensor_origins[f] = frame.sensor_to_world().translation;
      }
    });
  });

  // Merge in frame order so the result does not depend on scheduling.
  PointCloud reference;
  reference.labels.emplace();
  PointCloud unlabeled;
  std::vector<std::size_t> unlabeled_slots;
  agg.static_world.frame = Frame::kWorld;
  agg.static_world.labels.emplace();
  for (std::size_t f = 0; f < n_frames; ++f) {
    const SplitResult& s = splits[f];
    const auto& pts = s.static_world.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::size_t slot = agg.static_world.points.size();
      agg.static_world.points.push_back(pts[i]);
      agg.static_source.push_back(static_cast<std::uint32_t>(f));
      if (s.static_world.labels) {
        const ClassId c = (*s.static_world.labels)[i];
        agg.static_world.labels->push_back(c);
        reference.points.push_back(pts[i]);
        reference.labels->push_back(c);
      } else {
        agg.static_world.labels->push_back(scene.go_class);
        unlabeled.points.push_back(pts[i]);
        unlabeled_slots.push_back(slot);
      }
    }
    const Pose origin_world = Pose::from_translation(agg.sensor_origins[f]);
    for (const auto& [track, cloud] : s.per_object) {
      const auto box = std::find_if(agg.boxes[f].begin(), agg.boxes[f].end(),
                                    [&, track = track](const Box3D& b) { return b.track_id == track; });
      auto& obj = agg.objects[track];
      obj.track_id = track;
      obj.class_id = box->class_id;
      obj.points.points.insert(obj.points.points.end(), cloud.points.begin(), cloud.points.end());
      const Vec3 origin_canonical = box->to_canonical().apply(origin_world.translation);
      agg.object_ray_origins[track].insert(agg.object_ray_origins[track].end(), cloud.size(), origin_canonical);
    }
  }
  // Tracks with boxes but no interior points still get (empty) clouds.
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (const Box3D& b : agg.boxes[f]) {
      if (config.static_classes.contains(b.class_id)) continue;
      auto& obj = agg.objects[b.track_id];
      obj.track_id = b.track_id;
      obj.class_id = b.class_id;
      agg.object_ray_origins[b.track_id];
    }
  }

  if (!unlabeled.empty() && !reference.empty()) {
    const auto votes = stage("knn_label_vote", [&] {
      return knn_label_vote(unlabeled, reference, config.knn_k, config.threads);
    });
    for (std::size_t i = 0; i < votes.size(); ++i) (*agg.static_world.labels)[unlabeled_slots[i]] = votes[i];
    agg.voted_points = votes.size();
  }
  return agg;
}

KeyframeInputs keyframe_inputs(const SceneBundle& scene, const AggregatedScene& agg, std::size_t frame) {
  const Pose world_to_ego = invert(scene.frames[frame].ego_pose);
  const std::vector<Box3D>& boxes = agg.boxes[frame];
  // Boxes of static classes never got canonical clouds.
  std::vector<Box3D> placed;
  for (const Box3D& b : boxes) {
    if (agg.objects.contains(b.track_id)) placed.push_back(b);
  }
  PointCloud world = stage("place_objects", [&] { return place_objects(agg.objects, placed); });

  KeyframeInputs in;
  in.cloud.frame = Frame::kEgo;
  in.cloud.labels.emplace();
  const std::size_t total = agg.static_world.size() + world.size();
  in.cloud.points.reserve(total);
  in.cloud.labels->reserve(total);
  in.rays.reserve(total);
  for (std::size_t i = 0; i < agg.static_world.size(); ++i) {
    const Vec3 p = world_to_ego.apply(agg.static_world.points[i]);
    in.cloud.points.push_back(p);
    in.cloud.labels->push_back((*agg.static_world.labels)[i]);
    in.rays.push_back(Ray{world_to_ego.apply(agg.sensor_origins[agg.static_source[i]]), p, Ray::Kind::kLidarReturn});
  }
  std::size_t next = 0;
  for (const Box3D& b : placed) {
    const Pose to_world = b.to_world();
    const auto& origins = agg.object_ray_origins.at(b.track_id);
    for (const Vec3& o : origins) {
      const Vec3 p = world_to_ego.apply(world.points[next]);
      in.cloud.points.push_back(p);
      in.cloud.labels->push_back((*world.labels)[next]);
      in.rays.push_back(Ray{world_to_ego.apply(to_world.apply(o)), p, Ray::Kind::kLidarReturn});
      ++next;
    }
  }
  return in;
}

namespace {

KeyframeResult process_keyframe(const SceneBundle& scene, const AggregatedScene& agg, const PipelineConfig& config,
                                std::size_t frame, unsigned threads) {
  KeyframeResult r;
  r.frame_index = frame;
  r.timestamp = scene.frames[frame].timestamp;
  const GridSpec& spec = config.grid;
  KeyframeInputs in = keyframe_inputs(scene, agg, frame);

  const OccGrid voxels = stage("voxelize", [&] {
    return voxelize(in.cloud, spec,
                    VoxelizeOptions{.min_points = config.min_points, .unlabeled_class = scene.go_class, .threads = threads});
  });
  const VisibilityOptions vis{.threads = threads};
  r.lidar = stage("lidar_visibility", [&] { return lidar_visibility(spec, voxels, in.rays, vis); });
  r.occupancy = apply_lidar_mask(voxels, r.lidar);
  // The grid lives in the ego frame, where camera calibration already is.
  r.camera = stage("camera_visibility", [&] { return camera_visibility(spec, r.occupancy, scene.cameras, vis); });
  r.joint = stage("finalize_masks", [&] { return finalize_masks(r.lidar, r.camera); });
  if (config.ego_footprint) {
    for (std::size_t l = 0; l < r.joint.values.size(); ++l) {
      if (r.joint.values[l] && box_contains(*config.ego_footprint, voxel_center(spec, spec.unlinear(l)))) {
        r.joint.values[l] = 0;
      }
    }
  }
  return r;
}

}  // namespace

std::vector<KeyframeResult> run_pipeline(const SceneBundle& scene, const PipelineConfig& config) {
  stage("config", [&] { config.validate(); });
  const AggregatedScene agg = aggregate_scene(scene, config);

  std::vector<std::size_t> keyframes;
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    if (scene.frames[f].is_keyframe) keyframes.push_back(f);
  }
  std::vector<KeyframeResult> results(keyframes.size());
  const unsigned threads = std::max(1u, config.threads);
  // Keyframes in parallel when there are enough of them, otherwise the
  // stages themselves get the threads.
  const bool outer = keyframes.size() >= threads && threads > 1;
  parallel_shards(keyframes.size(), outer ? threads : 1u, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t k = begin; k < end; ++k) {
      results[k] = process_keyframe(scene, agg, config, keyframes[k], outer ? 1u : threads);
    }
  });
  return results;
}

void write_results(const std::filesystem::path& out_dir, const SceneBundle& scene, const PipelineConfig& config,
                   const std::vector<KeyframeResult>& results) {
  json entries = json::array();
  for (const KeyframeResult& r : results) {
    std::ostringstream name;
    name << "keyframe_" << std::setw(6) << std::setfill('0') << r.frame_index;
    const std::filesystem::path dir = out_dir / name.str();
    json files = json::object();
    auto save = [&](const char* file, const io::Bytes& bytes) {
      io::write_file(dir / file, bytes);
      std::ostringstream hex;
      hex << std::hex << std::setw(16) << std::setfill('0') << io::checksum(bytes);
      files[file] = hex.str();
    };
    save("occupancy.oc3g", io::encode_grid(r.occupancy));
    save("lidar_mask.oc3m", io::encode_mask(r.lidar));
    save("camera_mask.oc3m", io::encode_mask(r.camera));
    save("joint_mask.oc3m", io::encode_mask(r.joint));
    entries.push_back({{"frame", r.frame_index},
                       {"timestamp_us", r.timestamp},
                       {"directory", name.str()},
                       {"files", files},
                       {"occupied", r.occupancy.count(VoxelState::kOccupied)},
                       {"free", r.occupancy.count(VoxelState::kFree)}});
  }
  const json cfg = config.to_json();
  const std::string cfg_text = cfg.dump();
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0')
       << io::checksum(std::span(reinterpret_cast<const std::uint8_t*>(cfg_text.data()), cfg_text.size()));
  const json provenance{{"tool", "occgen"},
                        {"version", kVersion},
                        {"scene_id", scene.scene_id},
                        {"config", cfg},
                        {"config_hash", hash.str()},
                        {"stages",
                         {"interpolate_tracks", "split_dynamic_static", "aggregate", "knn_label_vote", "place_objects",
                          "voxelize", "lidar_visibility", "camera_visibility", "finalize_masks"}},
                        {"keyframes", entries}};
  const std::string text = provenance.dump(2) + "\n";
  io::write_file(out_dir / "provenance.json",
                 std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<KeyframeResult> run_pipeline(const std::filesystem::path& scene_dir, const PipelineConfig& config,
                                         const std::filesystem::path& out_dir) {
  stage("config", [&] { config.validate(); });
  const SceneBundle scene = stage("read_scene", [&] { return io::read_scene(scene_dir); });
  auto results = run_pipeline(scene, config);
  stage("write_results", [&] { write_results(out_dir, scene, config, results); });
  return results;
}

}  // namespace occgen
