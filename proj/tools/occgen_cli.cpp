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

// Command-line front end for occupancy label generation and evaluation.
//
// Exit codes: 0 success, 2 validation error, 3 data error, 4 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "occgen/error.hpp"
#include "occgen/eval.hpp"
#include "occgen/io.hpp"
#include "occgen/parallel.hpp"
#include "occgen/pipeline.hpp"
#include "occgen/synth.hpp"
#include "occgen/voxelizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace occgen;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct GridFlags {
  std::string preset = "waymo";
  std::optional<double> voxel_size;

  void add(CLI::App* app) {
    app->add_option("--grid-preset", preset, "Scene range preset")
        ->check(CLI::IsMember({"waymo", "nuscenes"}))
        ->capture_default_str();
    app->add_option("--voxel-size", voxel_size, "Voxel edge length in meters (default 0.4)");
  }

  GridSpec spec() const {
    const double size = voxel_size.value_or(0.4);
    return preset == "nuscenes" ? GridSpec::nuscenes(size) : GridSpec::waymo(size);
  }
};

struct PipelineFlags {
  GridFlags grid;
  int knn_k = 5;
  int min_points = 1;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::vector<int> static_classes;
  std::vector<double> ego_footprint;

  void add(CLI::App* app) {
    grid.add(app);
    app->add_option("--knn-k", knn_k, "Neighbors used for label voting")->capture_default_str();
    app->add_option("--min-points", min_points, "Points needed to mark a voxel occupied")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    app->add_option("--seed", seed, "Seed recorded in provenance")->capture_default_str();
    app->add_option("--static-class", static_classes, "Annotated class aggregated as static (repeatable)");
    app->add_option("--ego-footprint", ego_footprint, "Ego box L W H (centered at ego origin) left out of the joint mask")
        ->expected(3);
  }

  PipelineConfig config() const {
    PipelineConfig c;
    c.grid = grid.spec();
    c.knn_k = knn_k;
    c.min_points = min_points;
    c.threads = resolve_threads(threads);
    c.seed = seed;
    for (int s : static_classes) c.static_classes.insert(static_cast<ClassId>(s));
    if (!ego_footprint.empty()) {
      Box3D fp;
      fp.size = Vec3(ego_footprint[0], ego_footprint[1], ego_footprint[2]);
      c.ego_footprint = fp;
    }
    c.validate();
    return c;
  }
};

std::size_t pick_keyframe(const SceneBundle& scene, std::optional<std::size_t> requested) {
  if (requested) {
    if (*requested >= scene.frames.size()) {
      throw Error(ErrorKind::kIndexOutOfRange, "frame " + std::to_string(*requested) + " not in scene");
    }
    return *requested;
  }
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    if (scene.frames[f].is_keyframe) return f;
  }
  throw Error(ErrorKind::kNoAnnotation, "scene has no keyframe");
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void print_histogram(const std::map<std::string, std::size_t>& counts, std::size_t total) {
  for (const auto& [name, n] : counts) {
    const double pct = total ? 100.0 * static_cast<double>(n) / static_cast<double>(total) : 0.0;
    std::printf("  %-20s %12zu  %6.2f%%\n", name.c_str(), n, pct);
  }
}

void print_spec(const GridSpec& s) {
  std::printf("grid: min (%g, %g, %g) max (%g, %g, %g) voxel %g m dims (%d, %d, %d)\n", s.min_corner.x(),
              s.min_corner.y(), s.min_corner.z(), s.max_corner.x(), s.max_corner.y(), s.max_corner.z(), s.voxel_size,
              s.dims[0], s.dims[1], s.dims[2]);
}

void inspect(const fs::path& path) {
  const io::AnyFile file = io::read_any(path);
  if (const auto* cloud = std::get_if<PointCloud>(&file)) {
    std::printf("point payload: %zu points, frame %s, %s\n", cloud->size(), to_string(cloud->frame),
                cloud->has_labels() ? "labeled" : "unlabeled");
    if (!cloud->empty()) {
      Vec3 lo = cloud->points.front(), hi = lo;
      for (const Vec3& p : cloud->points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      std::printf("bounds: (%g, %g, %g) .. (%g, %g, %g)\n", lo.x(), lo.y(), lo.z(), hi.x(), hi.y(), hi.z());
    }
    if (cloud->labels) {
      std::map<std::string, std::size_t> hist;
      for (ClassId c : *cloud->labels) ++hist["class " + std::to_string(c)];
      print_histogram(hist, cloud->size());
    }
  } else if (const auto* grid = std::get_if<OccGrid>(&file)) {
    std::printf("occupancy grid\n");
    print_spec(grid->spec);
    const std::size_t total = grid->spec.voxel_count();
    print_histogram({{"occupied", grid->count(VoxelState::kOccupied)},
                     {"free", grid->count(VoxelState::kFree)},
                     {"unobserved", grid->count(VoxelState::kUnobserved)}},
                    total);
    std::map<std::string, std::size_t> classes;
    for (std::size_t i = 0; i < total; ++i) {
      if (grid->state[i] == VoxelState::kOccupied) ++classes["class " + std::to_string(grid->semantics[i])];
    }
    std::printf("occupied voxels by class:\n");
    print_histogram(classes, grid->count(VoxelState::kOccupied));
  } else if (const auto* mask = std::get_if<VisibilityMask>(&file)) {
    const char* kinds[] = {"lidar", "camera", "joint"};
    std::printf("%s visibility mask\n", kinds[static_cast<int>(mask->kind)]);
    print_spec(mask->spec);
    if (mask->kind == MaskKind::kLidar) {
      print_histogram({{"observed-occupied", mask->count(kLidarOccupied)},
                       {"observed-free", mask->count(kLidarFree)},
                       {"unobserved", mask->count(kLidarUnobserved)}},
                      mask->values.size());
    } else {
      print_histogram({{"observed", mask->count(1)}, {"unobserved", mask->count(0)}}, mask->values.size());
    }
  }
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::kValidation: return kExitValidation;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occgen: semantic occupancy labels with LiDAR and camera visibility masks"};
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Simulate a synthetic scene into a scene bundle");
  std::string gen_script, gen_demo = "static-room", gen_out, gen_gt_out;
  std::optional<std::uint64_t> gen_seed;
  std::optional<std::string> gen_preset;
  std::optional<double> gen_voxel;
  gen->add_option("--script", gen_script, "Scene script (JSON)");
  gen->add_option("--demo", gen_demo, "Built-in scene when no script is given")
      ->check(CLI::IsMember({"static-room", "occluder", "moving"}))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output scene directory")->required();
  gen->add_option("--gt-out", gen_gt_out, "Also write analytic ground truth per keyframe here");
  gen->add_option("--seed", gen_seed, "Override the script seed");
  gen->add_option("--grid-preset", gen_preset, "Override the script grid")->check(CLI::IsMember({"waymo", "nuscenes"}));
  gen->add_option("--voxel-size", gen_voxel, "Override the voxel size");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Aggregate a scene into one labeled cloud in a keyframe's ego frame");
  PipelineFlags agg_flags;
  std::string agg_scene, agg_out;
  std::optional<std::size_t> agg_frame;
  agg_flags.add(agg);
  agg->add_option("--scene", agg_scene, "Scene directory")->required();
  agg->add_option("--frame", agg_frame, "Frame index (default: first keyframe)");
  agg->add_option("--out", agg_out, "Output point payload (.oc3s)")->required();

  // voxelize
  auto* vox = app.add_subcommand("voxelize", "Voxelize a labeled point payload");
  GridFlags vox_grid;
  int vox_min_points = 1, vox_unlabeled = 0;
  unsigned vox_threads = 1;
  std::string vox_cloud, vox_out;
  vox_grid.add(vox);
  vox->add_option("--cloud", vox_cloud, "Input point payload (.oc3s)")->required();
  vox->add_option("--out", vox_out, "Output grid (.oc3g)")->required();
  vox->add_option("--min-points", vox_min_points, "Points needed to mark a voxel occupied")->capture_default_str();
  vox->add_option("--unlabeled-class", vox_unlabeled, "Class for unlabeled points")->capture_default_str();
  vox->add_option("--threads", vox_threads, "Worker threads (0 = all cores)")->capture_default_str();

  // visibility
  auto* vis = app.add_subcommand("visibility", "LiDAR, camera and joint masks for one keyframe");
  PipelineFlags vis_flags;
  std::string vis_scene, vis_grid, vis_out;
  std::optional<std::size_t> vis_frame;
  vis_flags.add(vis);
  vis->add_option("--scene", vis_scene, "Scene directory")->required();
  vis->add_option("--frame", vis_frame, "Frame index (default: first keyframe)");
  vis->add_option("--grid", vis_grid, "Voxelized grid to cast against (default: voxelize the aggregate)");
  vis->add_option("--out-dir", vis_out, "Output directory")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Visibility-masked mIoU of a prediction against ground truth");
  std::string ev_pred, ev_gt, ev_mask, ev_scene, ev_out;
  std::optional<int> ev_classes, ev_go;
  bool ev_free = false;
  ev->add_option("--pred", ev_pred, "Predicted grid (.oc3g)")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth grid (.oc3g)")->required();
  ev->add_option("--mask", ev_mask, "Evaluation mask (.oc3m); nonzero voxels are scored")->required();
  ev->add_option("--scene", ev_scene, "Scene directory providing the ontology");
  ev->add_option("--num-classes", ev_classes, "Class count when no scene is given");
  ev->add_option("--go-class", ev_go, "General-object class id (default: from the scene)");
  ev->add_flag("--include-free", ev_free, "Score the free label as an extra class");
  ev->add_option("--out", ev_out, "Report path (default: stdout)");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Full label generation for every keyframe");
  PipelineFlags pipe_flags;
  std::string pipe_scene, pipe_out;
  pipe_flags.add(pipe);
  pipe->add_option("--scene", pipe_scene, "Scene directory")->required();
  pipe->add_option("--out", pipe_out, "Output directory")->required();

  // inspect
  auto* insp = app.add_subcommand("inspect", "Print statistics of a payload, grid or mask file");
  std::string insp_path;
  insp->add_option("file", insp_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      synth::SceneScript script;
      if (!gen_script.empty()) {
        std::ifstream in(gen_script);
        if (!in) throw Error(ErrorKind::kIo, "cannot open " + gen_script);
        json j;
        try {
          j = json::parse(in);
        } catch (const json::parse_error& e) {
          throw Error(ErrorKind::kSchemaViolation, std::string("script is not valid JSON: ") + e.what());
        }
        script = synth::script_from_json(j);
      } else {
        script = synth::demo_script(gen_demo, gen_seed.value_or(0));
      }
      if (gen_seed) script.seed = *gen_seed;
      if (gen_preset || gen_voxel) {
        const double size = gen_voxel.value_or(script.grid.voxel_size);
        script.grid = gen_preset.value_or("waymo") == "nuscenes" ? GridSpec::nuscenes(size) : GridSpec::waymo(size);
      }
      const SceneBundle scene = synth::generate_scene(script);
      io::write_scene(scene, gen_out);
      std::size_t points = 0;
      for (const auto& f : scene.frames) points += f.lidar_cloud.size();
      std::printf("wrote %zu frames (%zu points) to %s\n", scene.frames.size(), points, gen_out.c_str());
      if (!gen_gt_out.empty()) {
        for (int f = 0; f < script.frame_count; ++f) {
          if (!script.is_keyframe(f)) continue;
          const synth::AnalyticTruth gt = synth::analytic_gt(script, f);
          char name[32];
          std::snprintf(name, sizeof(name), "keyframe_%06d", f);
          io::write_grid(fs::path(gen_gt_out) / name / "occupancy.oc3g", gt.occupancy);
          io::write_mask(fs::path(gen_gt_out) / name / "camera_mask.oc3m", gt.camera);
        }
        std::printf("wrote analytic ground truth to %s\n", gen_gt_out.c_str());
      }
    } else if (*agg) {
      const PipelineConfig config = agg_flags.config();
      const SceneBundle scene = io::read_scene(agg_scene);
      const std::size_t frame = pick_keyframe(scene, agg_frame);
      const AggregatedScene aggregated = aggregate_scene(scene, config);
      const KeyframeInputs in = keyframe_inputs(scene, aggregated, frame);
      io::write_cloud(agg_out, in.cloud);
      std::printf("frame %zu: %zu points (%zu static, %zu labels voted, %zu tracks)\n", frame, in.cloud.size(),
                  aggregated.static_world.size(), aggregated.voted_points, aggregated.objects.size());
    } else if (*vox) {
      const GridSpec spec = vox_grid.spec();
      const PointCloud cloud = io::read_cloud(vox_cloud);
      const OccGrid grid =
          voxelize(cloud, spec,
                   VoxelizeOptions{.min_points = vox_min_points,
                                   .unlabeled_class = static_cast<ClassId>(vox_unlabeled),
                                   .threads = resolve_threads(vox_threads)});
      io::write_grid(vox_out, grid);
      std::printf("%zu occupied voxels\n", grid.count(VoxelState::kOccupied));
    } else if (*vis) {
      const PipelineConfig config = vis_flags.config();
      const SceneBundle scene = io::read_scene(vis_scene);
      const std::size_t frame = pick_keyframe(scene, vis_frame);
      const AggregatedScene aggregated = aggregate_scene(scene, config);
      const KeyframeInputs in = keyframe_inputs(scene, aggregated, frame);
      const OccGrid voxels =
          vis_grid.empty()
              ? voxelize(in.cloud, config.grid,
                         VoxelizeOptions{.min_points = config.min_points, .unlabeled_class = scene.go_class,
                                         .threads = config.threads})
              : io::read_grid(vis_grid);
      const VisibilityOptions options{.threads = config.threads};
      const VisibilityMask lidar = lidar_visibility(config.grid, voxels, in.rays, options);
      const OccGrid labels = apply_lidar_mask(voxels, lidar);
      const VisibilityMask camera = camera_visibility(config.grid, labels, scene.cameras, options);
      const VisibilityMask joint = finalize_masks(lidar, camera);
      const fs::path out(vis_out);
      io::write_grid(out / "occupancy.oc3g", labels);
      io::write_mask(out / "lidar_mask.oc3m", lidar);
      io::write_mask(out / "camera_mask.oc3m", camera);
      io::write_mask(out / "joint_mask.oc3m", joint);
      std::printf("frame %zu: %zu rays, %zu lidar-observed, %zu camera-observed, %zu jointly observed voxels\n", frame,
                  in.rays.size(), lidar.values.size() - lidar.count(kLidarUnobserved), camera.count(kCameraObserved),
                  joint.count(1));
    } else if (*ev) {
      const OccGrid pred = io::read_grid(ev_pred);
      const OccGrid gt = io::read_grid(ev_gt);
      const VisibilityMask mask = io::read_mask(ev_mask);
      std::vector<std::string> names;
      std::optional<int> go = ev_go;
      if (!ev_scene.empty()) {
        const SceneBundle scene = io::read_scene(ev_scene);
        names = scene.class_names;
        if (!go) go = scene.go_class;
      } else if (ev_classes) {
        for (int c = 0; c < *ev_classes; ++c) names.push_back("class_" + std::to_string(c));
      } else {
        throw Error(ErrorKind::kSpecValidation, "evaluate needs --scene or --num-classes");
      }
      const ConfusionTable table = confusion(pred, gt, mask, static_cast<int>(names.size()));
      write_json(evaluation_report(table, names, go, ev_free), ev_out);
    } else if (*pipe) {
      const PipelineConfig config = pipe_flags.config();
      const auto results = run_pipeline(fs::path(pipe_scene), config, fs::path(pipe_out));
      for (const auto& r : results) {
        std::printf("keyframe %zu: %zu occupied, %zu free, %zu jointly observed\n", r.frame_index,
                    r.occupancy.count(VoxelState::kOccupied), r.occupancy.count(VoxelState::kFree), r.joint.count(1));
      }
    } else if (*insp) {
      inspect(insp_path);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return 0;
}
