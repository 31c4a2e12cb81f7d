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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "occgen/error.hpp"
#include "occgen/grid.hpp"
#include "occgen/scene.hpp"
#include "occgen/visibility.hpp"

namespace occgen::io {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kFormatVersion = 1;
/// magic(4) version(1) kind(1) reserved(2) min(3xf64) max(3xf64) size(f64) dims(3xu32)
inline constexpr std::size_t kGridHeaderSize = 76;
/// magic(4) version(1) flags(1) frame(1) reserved(1) count(u64)
inline constexpr std::size_t kCloudHeaderSize = 16;
inline constexpr std::size_t kChecksumSize = 8;

/// FNV-1a, 64 bit.
std::uint64_t checksum(std::span<const std::uint8_t> bytes);

/// Corrupt payload with the byte offset where decoding failed.
class CorruptPayloadError : public Error {
 public:
  CorruptPayloadError(const std::string& message, std::uint64_t offset)
      : Error(ErrorKind::kCorruptPayload, message), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

Bytes encode_cloud(const PointCloud& cloud);
PointCloud decode_cloud(std::span<const std::uint8_t> bytes);

Bytes encode_grid(const OccGrid& grid);
OccGrid decode_grid(std::span<const std::uint8_t> bytes);

Bytes encode_mask(const VisibilityMask& mask);
VisibilityMask decode_mask(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const OccGrid& grid);
OccGrid read_grid(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const VisibilityMask& mask);
VisibilityMask read_mask(const std::filesystem::path& path);

using AnyFile = std::variant<PointCloud, OccGrid, VisibilityMask>;
/// Dispatches on the magic prefix.
AnyFile read_any(const std::filesystem::path& path);

/// Scene directory: manifest.json plus frames/NNNNNN.oc3s payloads.
void write_scene(const SceneBundle& scene, const std::filesystem::path& dir);
SceneBundle read_scene(const std::filesystem::path& dir);

}  // namespace occgen::io
