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

#include "occgen/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json_detail.hpp"
#include "occgen/parallel.hpp"

namespace occgen::synth {

using detail::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Standard normal sample from a (seed, frame, beam) counter.
double beam_noise(std::uint64_t seed, int frame, std::size_t beam) {
  const std::uint64_t base =
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(frame) * 0x100000001B3ULL + beam));
  const double u1 = (static_cast<double>(base >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(splitmix64(base) >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double seconds(Timestamp t) { return static_cast<double>(t) * 1e-6; }

}  // namespace

Box3D Primitive::box_at(Timestamp t) const {
  Box3D b;
  b.center = center;
  b.size = size;
  b.yaw = yaw;
  b.class_id = class_id;
  b.track_id = track_id;
  b.timestamp = t;
  if (motion) {
    b.center = center + seconds(t) * motion->velocity;
    b.yaw = normalize_angle(yaw + seconds(t) * motion->yaw_rate);
  }
  return b;
}

Camera mounted_camera(const std::string& id, double fx, double fy, double cx, double cy, int width, int height,
                      const Vec3& position, double yaw, double pitch) {
  const Vec3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), -std::sin(pitch));
  const Vec3 right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.id = id;
  cam.intrinsics << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  cam.extrinsics.rotation.col(0) = right;
  cam.extrinsics.rotation.col(1) = down;
  cam.extrinsics.rotation.col(2) = forward;
  cam.extrinsics.translation = position;
  cam.width = width;
  cam.height = height;
  return cam;
}

std::vector<double> linspace_deg(double lo, double hi, int count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

Pose ego_pose_at(const SceneScript& script, int frame) {
  const Timestamp t = script.timestamp(frame);
  const double s = seconds(t);
  return Pose::from_yaw(normalize_angle(script.ego.start_yaw + s * script.ego.yaw_rate),
                        script.ego.start + s * script.ego.velocity, t);
}

std::optional<std::pair<double, double>> intersect_box(const Box3D& box, const Vec3& origin, const Vec3& dir) {
  const Pose to_box = box.to_canonical();
  const Vec3 o = to_box.apply(origin);
  const Vec3 d = to_box.rotation * dir;
  double t_in = -std::numeric_limits<double>::infinity();
  double t_out = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double half = 0.5 * box.size[a];
    if (d[a] == 0.0) {
      if (o[a] < -half || o[a] > half) return std::nullopt;
      continue;
    }
    double ta = (-half - o[a]) / d[a];
    double tb = (half - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t_in = std::max(t_in, ta);
    t_out = std::min(t_out, tb);
  }
  if (t_in > t_out) return std::nullopt;
  return std::make_pair(t_in, t_out);
}

FrameBundle simulate_lidar(const SceneScript& script, int frame) {
  FrameBundle out;
  out.timestamp = script.timestamp(frame);
  out.is_keyframe = script.is_keyframe(frame);
  out.ego_pose = ego_pose_at(script, frame);
  out.lidar_extrinsic = script.lidar.extrinsic;
  out.lidar_extrinsic.timestamp = out.timestamp;
  out.lidar_cloud.frame = Frame::kSensor;

  const Pose sensor_to_world = out.sensor_to_world();
  const Vec3 origin = sensor_to_world.translation;
  std::vector<Box3D> boxes;
  for (const Primitive& p : script.primitives) boxes.push_back(p.box_at(out.timestamp));

  const bool labeled = out.is_keyframe || !script.labels_on_keyframes_only;
  std::vector<ClassId> labels;
  const int az_count = script.lidar.azimuth_count;
  std::size_t beam = 0;
  for (double elev_deg : script.lidar.elevations_deg) {
    const double elev = elev_deg * std::numbers::pi / 180.0;
    for (int a = 0; a < az_count; ++a, ++beam) {
      const double az = 2.0 * std::numbers::pi * a / az_count;
      const Vec3 dir_sensor(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az), std::sin(elev));
      const Vec3 dir_world = sensor_to_world.rotation * dir_sensor;
      double best = script.lidar.max_range;
      int hit = -1;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto span = intersect_box(boxes[i], origin, dir_world);
        if (!span || span->first <= 0.0 || span->first >= best) continue;
        best = span->first;
        hit = static_cast<int>(i);
      }
      if (hit < 0) continue;
      double range = best;
      if (script.lidar.range_noise_std > 0.0) {
        range += script.lidar.range_noise_std * beam_noise(script.seed, frame, beam);
      }
      out.lidar_cloud.points.push_back(range * dir_sensor);
      labels.push_back(boxes[hit].class_id);
    }
  }
  if (labeled) out.lidar_cloud.labels = std::move(labels);

  if (out.is_keyframe) {
    for (const Primitive& p : script.primitives) {
      if (!p.motion) continue;
      Box3D b = p.box_at(out.timestamp);
      b.size += Vec3::Constant(2.0 * script.box_margin);
      out.boxes.push_back(b);
    }
  }
  return out;
}

AnalyticTruth analytic_gt(const SceneScript& script, int frame, unsigned threads) {
  const GridSpec& spec = script.grid;
  const Timestamp t = script.timestamp(frame);
  const Pose ego = ego_pose_at(script, frame);
  std::vector<Box3D> boxes;
  for (const Primitive& p : script.primitives) boxes.push_back(p.box_at(t));
  std::vector<Camera> cameras = script.cameras;
  for (Camera& c : cameras) c.extrinsics = compose(ego, c.extrinsics);

  AnalyticTruth out{OccGrid(spec, VoxelState::kFree), VisibilityMask(spec, MaskKind::kCamera)};
  // Voxel cube expressed as a world-frame box, for line-of-sight entry.
  const double ego_yaw = std::atan2(ego.rotation(1, 0), ego.rotation(0, 0));

  parallel_shards(spec.voxel_count(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t l = begin; l < end; ++l) {
      const VoxelIndex idx = spec.unlinear(l);
      const Vec3 center = ego.apply(voxel_center(spec, idx));
      for (const Box3D& b : boxes) {
        if (box_contains(b, center)) {
          out.occupancy.set_occupied(l, b.class_id);
          break;
        }
      }
      for (const Camera& cam : cameras) {
        if (project_to_image(cam, center).outcome != Projection::Outcome::kInImage) continue;
        const Vec3 origin = cam.center();
        const Vec3 dir = center - origin;
        Box3D cube;
        cube.center = center;
        cube.size = Vec3::Constant(spec.voxel_size);
        cube.yaw = ego_yaw;
        const auto cube_span = intersect_box(cube, origin, dir);
        // Faces shared with the cube do not block it.
        const double reach = (cube_span ? std::max(0.0, cube_span->first) : 1.0) - 1e-9;
        bool blocked = false;
        for (const Box3D& b : boxes) {
          const auto span = intersect_box(b, origin, dir);
          if (span && span->second > 0.0 && span->first < reach) {
            blocked = true;
            break;
          }
        }
        if (!blocked) {
          out.camera.values[l] = kCameraObserved;
          break;
        }
      }
    }
  });
  return out;
}

SceneBundle generate_scene(const SceneScript& script) {
  SceneBundle bundle;
  bundle.scene_id = script.scene_id;
  bundle.class_names = script.class_names;
  bundle.go_class = script.go_class;
  bundle.lidar_extrinsic = script.lidar.extrinsic;
  bundle.cameras = script.cameras;
  for (int f = 0; f < script.frame_count; ++f) bundle.frames.push_back(simulate_lidar(script, f));
  return bundle;
}

// ---------------------------------------------------------------------------
// Built-in scenes

namespace {

constexpr ClassId kGround = 1;
constexpr ClassId kWall = 2;
constexpr ClassId kVehicle = 3;

Primitive box_primitive(const Vec3& center, const Vec3& size, ClassId cls, double yaw = 0.0) {
  Primitive p;
  p.center = center;
  p.size = size;
  p.yaw = yaw;
  p.class_id = cls;
  return p;
}

Primitive slab_primitive(double x0, double x1, double y0, double y1, double z0, double z1, ClassId cls) {
  Primitive p = box_primitive(Vec3(0.5 * (x0 + x1), 0.5 * (y0 + y1), 0.5 * (z0 + z1)),
                              Vec3(x1 - x0, y1 - y0, z1 - z0), cls);
  p.shape = Primitive::Shape::kSlab;
  return p;
}

// Beams whose ground hits are evenly spaced in range, plus a fan for walls.
std::vector<double> ground_dense_elevations(double height, double r_min, double r_max, int ground_beams,
                                            double up_lo, double up_hi, int up_beams) {
  std::vector<double> out;
  for (int i = 0; i < ground_beams; ++i) {
    const double r = r_min + (r_max - r_min) * i / (ground_beams - 1);
    out.push_back(-std::atan2(height, r) * 180.0 / std::numbers::pi);
  }
  const auto fan = linspace_deg(up_lo, up_hi, up_beams);
  out.insert(out.end(), fan.begin(), fan.end());
  return out;
}

std::vector<Camera> surround_cameras() {
  std::vector<Camera> cams;
  const char* names[] = {"front", "front_left", "back_left", "back", "back_right", "front_right"};
  for (int i = 0; i < 6; ++i) {
    const double yaw = i * std::numbers::pi / 3.0;
    cams.push_back(mounted_camera(names[i], 400.0, 400.0, 400.0, 225.0, 800, 450, Vec3(0.0, 0.0, 1.6), yaw, 0.1));
  }
  return cams;
}

void add_room(SceneScript& s, double half) {
  // Walls are one voxel thick and straddle lattice centers of the 0.4 m grid.
  const double inner = half - 0.1;
  const double outer = half + 0.3;
  const double mid = 0.5 * (inner + outer);
  const double span = 2.0 * outer;
  s.primitives.push_back(slab_primitive(-inner, inner, -inner, inner, -0.3, 0.1, kGround));
  s.primitives.push_back(box_primitive(Vec3(mid, 0.0, 1.3), Vec3(0.4, span, 3.2), kWall));
  s.primitives.push_back(box_primitive(Vec3(-mid, 0.0, 1.3), Vec3(0.4, span, 3.2), kWall));
  s.primitives.push_back(box_primitive(Vec3(0.0, mid, 1.3), Vec3(span, 0.4, 3.2), kWall));
  s.primitives.push_back(box_primitive(Vec3(0.0, -mid, 1.3), Vec3(span, 0.4, 3.2), kWall));
}

}  // namespace

SceneScript demo_script(const std::string& name, std::uint64_t seed) {
  SceneScript s;
  s.scene_id = name;
  s.seed = seed;
  s.lidar.extrinsic = Pose::from_translation(Vec3(0.0, 0.0, 1.8));
  s.lidar.azimuth_count = 1024;
  if (name == "static-room" || name == "moving") {
    add_room(s, 15.0);
    s.lidar.elevations_deg = ground_dense_elevations(1.8, 1.5, 21.0, 66, -4.0, 12.0, 17);
    s.lidar.max_range = 40.0;
    s.cameras = surround_cameras();
    s.ego.start = Vec3(-4.0, 0.0, 0.0);
    s.ego.velocity = Vec3(4.0, 0.0, 0.0);
    s.frame_count = 20;
    s.keyframe_interval = 5;
    if (name == "moving") {
      Primitive car = box_primitive(Vec3(-8.0, 4.0, 0.9), Vec3(4.4, 1.8, 1.6), kVehicle);
      car.motion = Motion{Vec3(10.0, 0.0, 0.0), 0.0};
      car.track_id = 1;
      s.primitives.push_back(car);
    }
    return s;
  }
  if (name == "occluder") {
    std::uint64_t state = splitmix64(seed + 1);
    auto uniform = [&](double lo, double hi) {
      state = splitmix64(state);
      return lo + (hi - lo) * static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    s.primitives.push_back(slab_primitive(-30.0, 30.0, -30.0, 30.0, -0.3, 0.1, kGround));
    s.primitives.push_back(box_primitive(Vec3(25.1, 0.0, 2.3), Vec3(0.4, 40.0, 5.2), kWall));
    const Vec3 size(uniform(0.8, 3.0), uniform(1.0, 5.0), uniform(1.0, 3.0));
    const Vec3 center(uniform(6.0, 18.0), uniform(-6.0, 6.0), 0.1 + 0.5 * size.z());
    s.primitives.push_back(box_primitive(center, size, kVehicle, uniform(-0.6, 0.6)));
    s.lidar.elevations_deg = linspace_deg(-25.0, 15.0, 64);
    s.lidar.max_range = 60.0;
    s.cameras.push_back(mounted_camera("front", 400.0, 400.0, 400.0, 225.0, 800, 450, Vec3(0.0, 0.0, 1.6), 0.0, 0.05));
    s.frame_count = 1;
    return s;
  }
  throw Error(ErrorKind::kSpecValidation, "unknown demo scene '" + name + "'");
}

// ---------------------------------------------------------------------------
// Script files

namespace {

Camera camera_from(const json& j) {
  const auto id = detail::get_or<std::string>(j, "id", "camera");
  const int width = detail::get_as<int>(j, "width");
  const int height = detail::get_as<int>(j, "height");
  Camera cam;
  if (j.contains("intrinsics")) {
    cam.id = id;
    cam.width = width;
    cam.height = height;
    cam.intrinsics = detail::mat3_from(j.at("intrinsics"), "intrinsics");
    cam.extrinsics = detail::pose_from(detail::require(j, "extrinsic"), "camera extrinsic");
  } else {
    cam = mounted_camera(id, detail::get_as<double>(j, "fx"), detail::get_as<double>(j, "fy"),
                         detail::get_as<double>(j, "cx"), detail::get_as<double>(j, "cy"), width, height,
                         detail::vec3_from(detail::require(j, "position"), "position"),
                         detail::get_or<double>(j, "yaw", 0.0), detail::get_or<double>(j, "pitch", 0.0));
  }
  if (!cam.is_valid()) detail::schema_error("camera '" + id + "' has invalid intrinsics or size");
  return cam;
}

Primitive primitive_from(const json& j, const GridSpec& grid, std::size_t index) {
  Primitive p;
  const auto shape = detail::get_or<std::string>(j, "shape", "box");
  p.class_id = detail::get_as<ClassId>(j, "class");
  if (shape == "slab") {
    p.shape = Primitive::Shape::kSlab;
    const double z_min = detail::get_as<double>(j, "z_min");
    const double z_max = detail::get_as<double>(j, "z_max");
    const auto xr = detail::get_or<std::vector<double>>(j, "x_range", {grid.min_corner.x(), grid.max_corner.x()});
    const auto yr = detail::get_or<std::vector<double>>(j, "y_range", {grid.min_corner.y(), grid.max_corner.y()});
    if (xr.size() != 2 || yr.size() != 2 || !(z_max > z_min)) detail::schema_error("slab ranges are malformed");
    p.center = Vec3(0.5 * (xr[0] + xr[1]), 0.5 * (yr[0] + yr[1]), 0.5 * (z_min + z_max));
    p.size = Vec3(xr[1] - xr[0], yr[1] - yr[0], z_max - z_min);
  } else if (shape == "box") {
    p.center = detail::vec3_from(detail::require(j, "center"), "center");
    p.size = detail::vec3_from(detail::require(j, "size"), "size");
    p.yaw = detail::get_or<double>(j, "yaw", 0.0);
  } else {
    detail::schema_error("unknown primitive shape '" + shape + "'");
  }
  if ((p.size.array() <= 0.0).any()) detail::schema_error("primitive sizes must be positive");
  if (j.contains("motion")) {
    const json& m = j.at("motion");
    p.motion = Motion{detail::vec3_from(detail::require(m, "velocity"), "velocity"),
                      detail::get_or<double>(m, "yaw_rate", 0.0)};
  }
  p.track_id = detail::get_or<TrackId>(j, "track_id", static_cast<TrackId>(index + 1));
  return p;
}

}  // namespace

SceneScript script_from_json(const json& j) {
  SceneScript s;
  s.scene_id = detail::get_or<std::string>(j, "scene_id", s.scene_id);
  if (j.contains("grid")) s.grid = detail::grid_from(j.at("grid"));
  s.class_names = detail::get_or<std::vector<std::string>>(j, "classes", s.class_names);
  s.go_class = detail::get_or<ClassId>(j, "go_class", s.go_class);
  if (s.go_class >= s.class_names.size()) detail::schema_error("go_class outside the class list");
  if (j.contains("primitives")) {
    const json& prims = j.at("primitives");
    for (std::size_t i = 0; i < prims.size(); ++i) {
      s.primitives.push_back(primitive_from(prims[i], s.grid, i));
      if (s.primitives.back().class_id >= s.class_names.size()) {
        detail::schema_error("primitive class outside the class list");
      }
    }
  }
  if (j.contains("lidar")) {
    const json& l = j.at("lidar");
    s.lidar.azimuth_count = detail::get_or<int>(l, "azimuth_count", s.lidar.azimuth_count);
    if (l.contains("elevation_linspace")) {
      const auto ls = detail::get_as<std::vector<double>>(l, "elevation_linspace");
      if (ls.size() != 3) detail::schema_error("elevation_linspace is [lo, hi, count]");
      s.lidar.elevations_deg = linspace_deg(ls[0], ls[1], static_cast<int>(ls[2]));
    } else {
      s.lidar.elevations_deg = detail::get_or<std::vector<double>>(l, "elevations_deg", {});
    }
    s.lidar.max_range = detail::get_or<double>(l, "max_range", s.lidar.max_range);
    s.lidar.range_noise_std = detail::get_or<double>(l, "range_noise_std", 0.0);
    if (l.contains("extrinsic")) {
      s.lidar.extrinsic = detail::pose_from(l.at("extrinsic"), "lidar extrinsic");
    } else if (l.contains("mount")) {
      s.lidar.extrinsic = Pose::from_translation(detail::vec3_from(l.at("mount"), "mount"));
    }
  }
  if (j.contains("cameras")) {
    for (const json& c : j.at("cameras")) s.cameras.push_back(camera_from(c));
  }
  if (j.contains("ego")) {
    const json& e = j.at("ego");
    if (e.contains("start")) s.ego.start = detail::vec3_from(e.at("start"), "ego.start");
    s.ego.start_yaw = detail::get_or<double>(e, "yaw", 0.0);
    if (e.contains("velocity")) s.ego.velocity = detail::vec3_from(e.at("velocity"), "ego.velocity");
    s.ego.yaw_rate = detail::get_or<double>(e, "yaw_rate", 0.0);
  }
  s.frame_count = detail::get_or<int>(j, "frames", s.frame_count);
  s.period_us = detail::get_or<Timestamp>(j, "period_us", s.period_us);
  s.keyframe_interval = detail::get_or<int>(j, "keyframe_interval", s.keyframe_interval);
  s.labels_on_keyframes_only = detail::get_or<bool>(j, "labels_on_keyframes_only", s.labels_on_keyframes_only);
  s.box_margin = detail::get_or<double>(j, "box_margin", s.box_margin);
  s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
  if (s.frame_count < 0 || s.period_us <= 0 || s.keyframe_interval < 1 || s.lidar.azimuth_count < 1) {
    detail::schema_error("frames, period_us, keyframe_interval and azimuth_count must be positive");
  }
  return s;
}

json script_to_json(const SceneScript& s) {
  json prims = json::array();
  for (const Primitive& p : s.primitives) {
    json jp{{"shape", "box"},
            {"center", detail::to_json(p.center)},
            {"size", detail::to_json(p.size)},
            {"yaw", p.yaw},
            {"class", p.class_id},
            {"track_id", p.track_id}};
    if (p.motion) jp["motion"] = {{"velocity", detail::to_json(p.motion->velocity)}, {"yaw_rate", p.motion->yaw_rate}};
    prims.push_back(jp);
  }
  json cams = json::array();
  for (const Camera& c : s.cameras) {
    cams.push_back({{"id", c.id},
                    {"width", c.width},
                    {"height", c.height},
                    {"intrinsics", detail::to_json(c.intrinsics)},
                    {"extrinsic", detail::to_json(c.extrinsics)}});
  }
  return json{{"scene_id", s.scene_id},
              {"grid", detail::to_json(s.grid)},
              {"classes", s.class_names},
              {"go_class", s.go_class},
              {"primitives", prims},
              {"lidar",
               {{"azimuth_count", s.lidar.azimuth_count},
                {"elevations_deg", s.lidar.elevations_deg},
                {"max_range", s.lidar.max_range},
                {"range_noise_std", s.lidar.range_noise_std},
                {"extrinsic", detail::to_json(s.lidar.extrinsic)}}},
              {"cameras", cams},
              {"ego",
               {{"start", detail::to_json(s.ego.start)},
                {"yaw", s.ego.start_yaw},
                {"velocity", detail::to_json(s.ego.velocity)},
                {"yaw_rate", s.ego.yaw_rate}}},
              {"frames", s.frame_count},
              {"period_us", s.period_us},
              {"keyframe_interval", s.keyframe_interval},
              {"labels_on_keyframes_only", s.labels_on_keyframes_only},
              {"box_margin", s.box_margin},
              {"seed", s.seed}};
}

}  // namespace occgen::synth
