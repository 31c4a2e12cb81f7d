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

// JSON helpers shared by the scene manifest and synthetic scene scripts.
#pragma once

#include <string>

#include <json.hpp>

#include "occgen/error.hpp"
#include "occgen/geom.hpp"
#include "occgen/grid.hpp"

namespace occgen::detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& what) {
  throw Error(ErrorKind::kSchemaViolation, what);
}

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    schema_error(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_as<T>(j, key);
}

inline Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) schema_error(std::string(what) + " must be a 3-element array");
  try {
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  } catch (const nlohmann::json::exception&) {
    schema_error(std::string(what) + " must hold numbers");
  }
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Mat3 mat3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 9) schema_error(std::string(what) + " must be a 9-element row-major array");
  Mat3 m;
  try {
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = j[i].get<double>();
  } catch (const nlohmann::json::exception&) {
    schema_error(std::string(what) + " must hold numbers");
  }
  return m;
}

inline json to_json(const Mat3& m) {
  json out = json::array();
  for (int i = 0; i < 9; ++i) out.push_back(m(i / 3, i % 3));
  return out;
}

inline Pose pose_from(const json& j, const char* what) {
  Pose p;
  p.rotation = mat3_from(require(j, "rotation"), "rotation");
  p.translation = vec3_from(require(j, "translation"), "translation");
  p.timestamp = get_or<Timestamp>(j, "timestamp_us", 0);
  if (!p.is_valid(1e-6)) schema_error(std::string(what) + ": rotation is not a proper rotation matrix");
  return p;
}

inline json to_json(const Pose& p) {
  return json{{"rotation", to_json(p.rotation)},
              {"translation", to_json(p.translation)},
              {"timestamp_us", p.timestamp}};
}

inline GridSpec grid_from(const json& j) {
  if (j.contains("preset")) {
    const auto preset = get_as<std::string>(j, "preset");
    const double size = get_or<double>(j, "voxel_size", 0.4);
    if (preset == "waymo") return GridSpec::waymo(size);
    if (preset == "nuscenes") return GridSpec::nuscenes(size);
    schema_error("unknown grid preset '" + preset + "'");
  }
  return GridSpec::make(vec3_from(require(j, "min"), "grid.min"), vec3_from(require(j, "max"), "grid.max"),
                        get_as<double>(j, "voxel_size"));
}

inline json to_json(const GridSpec& g) {
  return json{{"min", to_json(g.min_corner)}, {"max", to_json(g.max_corner)}, {"voxel_size", g.voxel_size}};
}

}  // namespace occgen::detail
