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

#include "occgen/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json_detail.hpp"

namespace occgen::io {

namespace fs = std::filesystem;
using detail::json;

namespace {

constexpr char kCloudMagic[4] = {'O', 'C', '3', 'S'};
constexpr char kGridMagic[4] = {'O', 'C', '3', 'G'};
constexpr char kMaskMagic[4] = {'O', 'C', '3', 'M'};
constexpr std::uint8_t kLabelsFlag = 0x01;
// Largest grid a header may describe.
constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 32;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void magic(const char (&m)[4]) {
    for (char c : m) out_.push_back(static_cast<std::uint8_t>(c));
  }
  void reserve(std::size_t n) { out_.reserve(n); }
  Bytes finish() {
    u64(checksum(out_));
    return std::move(out_);
  }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return b_[pos_++]; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

bool has_magic(std::span<const std::uint8_t> b, const char (&m)[4]) {
  return b.size() >= 4 && std::memcmp(b.data(), m, 4) == 0;
}

void check_magic(std::span<const std::uint8_t> b, const char (&m)[4], const char* what) {
  if (!has_magic(b, m)) {
    throw Error(ErrorKind::kMagicMismatch,
                std::string("not a ") + what + " file (expected magic " + std::string(m, 4) + ")");
  }
}

void check_trailer(std::span<const std::uint8_t> b, const char* what) {
  const std::size_t body = b.size() - kChecksumSize;
  Reader r(b.subspan(body));
  if (r.u64() != checksum(b.first(body))) {
    throw Error(ErrorKind::kChecksumMismatch, std::string(what) + " checksum mismatch");
  }
}

void write_grid_header(Writer& w, const char (&magic)[4], std::uint8_t kind, const GridSpec& spec) {
  w.magic(magic);
  w.u8(kFormatVersion);
  w.u8(kind);
  w.u8(0);
  w.u8(0);
  for (int i = 0; i < 3; ++i) w.f64(spec.min_corner[i]);
  for (int i = 0; i < 3; ++i) w.f64(spec.max_corner[i]);
  w.f64(spec.voxel_size);
  for (int i = 0; i < 3; ++i) w.u32(static_cast<std::uint32_t>(spec.dims[i]));
}

struct GridHeader {
  std::uint8_t kind = 0;
  GridSpec spec;
};

GridHeader read_grid_header(std::span<const std::uint8_t> b, const char (&magic)[4], const char* what,
                            std::size_t bytes_per_voxel) {
  check_magic(b, magic, what);
  if (b.size() < kGridHeaderSize) {
    std::ostringstream msg;
    msg << what << " file has " << b.size() << " bytes, shorter than the " << kGridHeaderSize << "-byte header";
    throw Error(ErrorKind::kSizeMismatch, msg.str());
  }
  Reader r(b);
  r.u32();
  if (const auto v = r.u8(); v != kFormatVersion) {
    throw CorruptPayloadError(std::string(what) + " has unsupported version " + std::to_string(v), 4);
  }
  GridHeader h;
  h.kind = r.u8();
  r.u8();
  r.u8();
  Vec3 lo, hi;
  for (int i = 0; i < 3; ++i) lo[i] = r.f64();
  for (int i = 0; i < 3; ++i) hi[i] = r.f64();
  const double size = r.f64();
  std::uint64_t voxels = 1;
  std::array<std::uint32_t, 3> dims;
  for (int i = 0; i < 3; ++i) {
    dims[i] = r.u32();
    if (dims[i] == 0 || dims[i] > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      throw Error(ErrorKind::kDimensionOverflow, std::string(what) + " header has an invalid dimension");
    }
    voxels *= dims[i];
    if (voxels > kMaxVoxels) {
      throw Error(ErrorKind::kDimensionOverflow, std::string(what) + " header describes too many voxels");
    }
  }
  const std::uint64_t expected = kGridHeaderSize + voxels * bytes_per_voxel + kChecksumSize;
  if (b.size() != expected) {
    std::ostringstream msg;
    msg << what << " size mismatch: header dims (" << dims[0] << ", " << dims[1] << ", " << dims[2]
        << ") need " << expected << " bytes, file has " << b.size();
    throw Error(ErrorKind::kSizeMismatch, msg.str());
  }
  check_trailer(b, what);
  try {
    h.spec = GridSpec::make(lo, hi, size);
  } catch (const Error& e) {
    throw CorruptPayloadError(std::string(what) + " header range is invalid: " + e.what(), 8);
  }
  for (int i = 0; i < 3; ++i) {
    if (h.spec.dims[i] != static_cast<int>(dims[i])) {
      throw CorruptPayloadError(std::string(what) + " header dims disagree with its range", 64 + 4 * i);
    }
  }
  return h;
}

}  // namespace

std::uint64_t checksum(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Point payloads

Bytes encode_cloud(const PointCloud& cloud) {
  Writer w;
  const bool labeled = cloud.has_labels();
  w.reserve(kCloudHeaderSize + cloud.size() * (labeled ? 13 : 12) + kChecksumSize);
  w.magic(kCloudMagic);
  w.u8(kFormatVersion);
  w.u8(labeled ? kLabelsFlag : 0);
  w.u8(static_cast<std::uint8_t>(cloud.frame));
  w.u8(0);
  w.u64(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(cloud.points[i][a]));
    if (labeled) w.u8((*cloud.labels)[i]);
  }
  return w.finish();
}

PointCloud decode_cloud(std::span<const std::uint8_t> b) {
  check_magic(b, kCloudMagic, "point payload");
  if (b.size() < kCloudHeaderSize) {
    throw CorruptPayloadError("point payload header truncated", b.size());
  }
  Reader r(b);
  r.u32();
  if (const auto v = r.u8(); v != kFormatVersion) {
    throw CorruptPayloadError("point payload has unsupported version " + std::to_string(v), 4);
  }
  const std::uint8_t flags = r.u8();
  const std::uint8_t frame = r.u8();
  r.u8();
  const std::uint64_t count = r.u64();
  if (frame > static_cast<std::uint8_t>(Frame::kObjectCanonical)) {
    throw CorruptPayloadError("point payload has unknown frame tag", 6);
  }
  const bool labeled = (flags & kLabelsFlag) != 0;
  const std::uint64_t record = labeled ? 13 : 12;
  const std::uint64_t available = b.size() - kCloudHeaderSize;
  if (count > available / record || available - count * record < kChecksumSize) {
    // Offset of the first record (or the checksum) that is cut short.
    const std::uint64_t whole = std::min<std::uint64_t>(available / record, count);
    std::ostringstream msg;
    const std::uint64_t offset = kCloudHeaderSize + whole * record;
    if (whole < count) {
      msg << "truncated point record " << whole << " at byte offset " << offset;
    } else {
      msg << "truncated checksum at byte offset " << offset;
    }
    throw CorruptPayloadError(msg.str(), offset);
  }
  if (available - count * record != kChecksumSize) {
    const std::uint64_t offset = kCloudHeaderSize + count * record + kChecksumSize;
    throw CorruptPayloadError("unexpected trailing bytes at byte offset " + std::to_string(offset), offset);
  }
  check_trailer(b, "point payload");

  PointCloud cloud;
  cloud.frame = static_cast<Frame>(frame);
  cloud.points.resize(count);
  if (labeled) cloud.labels.emplace(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float x = r.f32();
    const float y = r.f32();
    const float z = r.f32();
    cloud.points[i] = Vec3(x, y, z);
    if (labeled) (*cloud.labels)[i] = r.u8();
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Grids and masks

Bytes encode_grid(const OccGrid& grid) {
  Writer w;
  w.reserve(kGridHeaderSize + 2 * grid.state.size() + kChecksumSize);
  write_grid_header(w, kGridMagic, 0, grid.spec);
  for (std::size_t i = 0; i < grid.state.size(); ++i) {
    w.u8(static_cast<std::uint8_t>(grid.state[i]));
    w.u8(grid.semantics[i]);
  }
  return w.finish();
}

OccGrid decode_grid(std::span<const std::uint8_t> b) {
  const GridHeader h = read_grid_header(b, kGridMagic, "grid", 2);
  OccGrid grid(h.spec);
  Reader r(b.subspan(kGridHeaderSize));
  for (std::size_t i = 0; i < grid.state.size(); ++i) {
    const std::uint8_t state = r.u8();
    const std::uint8_t cls = r.u8();
    const bool occupied = state == static_cast<std::uint8_t>(VoxelState::kOccupied);
    if (state > 2 || occupied == (cls == kNoClass)) {
      throw CorruptPayloadError("invalid voxel record " + std::to_string(i), kGridHeaderSize + 2 * i);
    }
    grid.state[i] = static_cast<VoxelState>(state);
    grid.semantics[i] = cls;
  }
  return grid;
}

Bytes encode_mask(const VisibilityMask& mask) {
  Writer w;
  w.reserve(kGridHeaderSize + mask.values.size() + kChecksumSize);
  write_grid_header(w, kMaskMagic, static_cast<std::uint8_t>(mask.kind), mask.spec);
  for (std::uint8_t v : mask.values) w.u8(v);
  return w.finish();
}

VisibilityMask decode_mask(std::span<const std::uint8_t> b) {
  const GridHeader h = read_grid_header(b, kMaskMagic, "mask", 1);
  if (h.kind > static_cast<std::uint8_t>(MaskKind::kJoint)) {
    throw CorruptPayloadError("mask has unknown kind " + std::to_string(h.kind), 5);
  }
  VisibilityMask mask(h.spec, static_cast<MaskKind>(h.kind));
  const std::uint8_t max_value = mask.kind == MaskKind::kLidar ? kLidarOccupied : 1;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    const std::uint8_t v = b[kGridHeaderSize + i];
    if (v > max_value) {
      throw CorruptPayloadError("invalid mask value at voxel " + std::to_string(i), kGridHeaderSize + i);
    }
    mask.values[i] = v;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Files

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

void write_cloud(const fs::path& path, const PointCloud& cloud) { write_file(path, encode_cloud(cloud)); }
PointCloud read_cloud(const fs::path& path) { return decode_cloud(read_file(path)); }
void write_grid(const fs::path& path, const OccGrid& grid) { write_file(path, encode_grid(grid)); }
OccGrid read_grid(const fs::path& path) { return decode_grid(read_file(path)); }
void write_mask(const fs::path& path, const VisibilityMask& mask) { write_file(path, encode_mask(mask)); }
VisibilityMask read_mask(const fs::path& path) { return decode_mask(read_file(path)); }

AnyFile read_any(const fs::path& path) {
  const Bytes b = read_file(path);
  if (has_magic(b, kCloudMagic)) return decode_cloud(b);
  if (has_magic(b, kGridMagic)) return decode_grid(b);
  if (has_magic(b, kMaskMagic)) return decode_mask(b);
  throw Error(ErrorKind::kMagicMismatch, path.string() + " has no recognised magic prefix");
}

// ---------------------------------------------------------------------------
// Scene bundles

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kSceneFormat = "occgen-scene";

std::string payload_name(std::size_t frame) {
  std::ostringstream name;
  name << "frames/" << std::setw(6) << std::setfill('0') << frame << ".oc3s";
  return name.str();
}

json box_to_json(const Box3D& b) {
  return json{{"track_id", b.track_id},
              {"class_id", b.class_id},
              {"center", detail::to_json(b.center)},
              {"size", detail::to_json(b.size)},
              {"yaw", b.yaw}};
}

Box3D box_from_json(const json& j, Timestamp ts, std::size_t num_classes) {
  Box3D b;
  b.track_id = detail::get_as<TrackId>(j, "track_id");
  b.class_id = detail::get_as<ClassId>(j, "class_id");
  b.center = detail::vec3_from(detail::require(j, "center"), "box center");
  b.size = detail::vec3_from(detail::require(j, "size"), "box size");
  b.yaw = detail::get_as<double>(j, "yaw");
  b.timestamp = ts;
  if ((b.size.array() <= 0.0).any()) detail::schema_error("box sizes must be positive");
  if (b.yaw != normalize_angle(b.yaw)) detail::schema_error("box yaw must lie in (-pi, pi]");
  if (b.class_id >= num_classes) detail::schema_error("box class outside the ontology");
  return b;
}

json camera_to_json(const Camera& c) {
  return json{{"id", c.id},
              {"width", c.width},
              {"height", c.height},
              {"intrinsics", detail::to_json(c.intrinsics)},
              {"extrinsic", detail::to_json(c.extrinsics)}};
}

Camera camera_from_json(const json& j) {
  Camera c;
  c.id = detail::get_as<std::string>(j, "id");
  c.width = detail::get_as<int>(j, "width");
  c.height = detail::get_as<int>(j, "height");
  c.intrinsics = detail::mat3_from(detail::require(j, "intrinsics"), "intrinsics");
  c.extrinsics = detail::pose_from(detail::require(j, "extrinsic"), "camera extrinsic");
  if (!c.is_valid()) detail::schema_error("camera '" + c.id + "' has invalid intrinsics or size");
  return c;
}

}  // namespace

void write_scene(const SceneBundle& scene, const fs::path& dir) {
  fs::create_directories(dir / "frames");
  json ontology = json::array();
  for (std::size_t i = 0; i < scene.class_names.size(); ++i) {
    ontology.push_back({{"id", i}, {"name", scene.class_names[i]}});
  }
  json cameras = json::array();
  for (const Camera& c : scene.cameras) cameras.push_back(camera_to_json(c));
  json frames = json::array();
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    const FrameBundle& fr = scene.frames[f];
    json boxes = json::array();
    for (const Box3D& b : fr.boxes) boxes.push_back(box_to_json(b));
    const std::string payload = payload_name(f);
    write_cloud(dir / payload, fr.lidar_cloud);
    frames.push_back({{"timestamp_us", fr.timestamp},
                      {"keyframe", fr.is_keyframe},
                      {"ego_pose", detail::to_json(fr.ego_pose)},
                      {"payload", payload},
                      {"boxes", boxes}});
  }
  json manifest{{"format", kSceneFormat},
                {"version", kFormatVersion},
                {"scene_id", scene.scene_id},
                {"ontology", ontology},
                {"go_class", scene.go_class},
                {"calibration", {{"lidar_extrinsic", detail::to_json(scene.lidar_extrinsic)}, {"cameras", cameras}}},
                {"frames", frames}};
  const std::string text = manifest.dump(2) + "\n";
  write_file(dir / kManifestName, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SceneBundle read_scene(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    throw Error(ErrorKind::kMissingPayload, "scene manifest missing: " + manifest_path.string());
  }
  json m;
  try {
    const Bytes raw = read_file(manifest_path);
    m = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (detail::get_as<std::string>(m, "format") != kSceneFormat) detail::schema_error("unexpected manifest format");
  if (detail::get_as<int>(m, "version") != kFormatVersion) detail::schema_error("unsupported manifest version");

  SceneBundle scene;
  scene.scene_id = detail::get_as<std::string>(m, "scene_id");
  const json& ontology = detail::require(m, "ontology");
  if (!ontology.is_array() || ontology.empty() || ontology.size() > kNoClass) {
    detail::schema_error("ontology must list between 1 and 255 classes");
  }
  for (std::size_t i = 0; i < ontology.size(); ++i) {
    if (detail::get_as<std::size_t>(ontology[i], "id") != i) detail::schema_error("ontology ids must be dense from 0");
    scene.class_names.push_back(detail::get_as<std::string>(ontology[i], "name"));
  }
  const auto go = detail::get_as<int>(m, "go_class");
  if (go < 0 || go >= static_cast<int>(scene.class_names.size())) detail::schema_error("go_class outside the ontology");
  scene.go_class = static_cast<ClassId>(go);

  const json& calib = detail::require(m, "calibration");
  scene.lidar_extrinsic = detail::pose_from(detail::require(calib, "lidar_extrinsic"), "lidar extrinsic");
  for (const json& c : detail::require(calib, "cameras")) scene.cameras.push_back(camera_from_json(c));

  const json& frames = detail::require(m, "frames");
  if (!frames.is_array()) detail::schema_error("frames must be an array");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const json& jf = frames[f];
    FrameBundle fr;
    fr.timestamp = detail::get_as<Timestamp>(jf, "timestamp_us");
    if (f > 0 && fr.timestamp <= scene.frames.back().timestamp) {
      detail::schema_error("frame timestamps must be strictly increasing (frame " + std::to_string(f) + ")");
    }
    fr.is_keyframe = detail::get_as<bool>(jf, "keyframe");
    fr.ego_pose = detail::pose_from(detail::require(jf, "ego_pose"), "ego pose");
    fr.ego_pose.timestamp = fr.timestamp;
    fr.lidar_extrinsic = scene.lidar_extrinsic;
    fr.lidar_extrinsic.timestamp = fr.timestamp;
    for (const json& b : detail::require(jf, "boxes")) {
      fr.boxes.push_back(box_from_json(b, fr.timestamp, scene.class_names.size()));
    }
    const fs::path payload = dir / detail::get_as<std::string>(jf, "payload");
    if (!fs::exists(payload)) {
      throw Error(ErrorKind::kMissingPayload,
                  "frame " + std::to_string(f) + " payload missing: " + payload.string());
    }
    try {
      fr.lidar_cloud = read_cloud(payload);
    } catch (const CorruptPayloadError& e) {
      throw CorruptPayloadError("frame " + std::to_string(f) + " (" + payload.string() + "): " + e.what(),
                                e.offset());
    }
    fr.lidar_cloud.frame = Frame::kSensor;
    if (fr.lidar_cloud.labels) {
      for (ClassId c : *fr.lidar_cloud.labels) {
        if (c >= scene.class_names.size()) {
          detail::schema_error("frame " + std::to_string(f) + " has point labels outside the ontology");
        }
      }
    }
    scene.frames.push_back(std::move(fr));
  }
  return scene;
}

}  // namespace occgen::io
