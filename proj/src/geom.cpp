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

#include "occgen/geom.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "occgen/error.hpp"

namespace occgen {

Pose Pose::identity(Timestamp ts) {
  Pose p;
  p.timestamp = ts;
  return p;
}

Pose Pose::from_translation(const Vec3& t, Timestamp ts) {
  Pose p;
  p.translation = t;
  p.timestamp = ts;
  return p;
}

Pose Pose::from_yaw(double yaw, const Vec3& t, Timestamp ts) {
  Pose p;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  p.rotation << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  p.translation = t;
  p.timestamp = ts;
  return p;
}

bool Pose::is_valid(double tol) const {
  const Mat3 gram = rotation.transpose() * rotation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol && translation.allFinite();
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.timestamp = b.timestamp;
  return out;
}

Pose invert(const Pose& a) {
  Pose out;
  out.rotation = a.rotation.transpose();
  out.translation = -(out.rotation * a.translation);
  out.timestamp = a.timestamp;
  return out;
}

const char* to_string(Frame frame) {
  switch (frame) {
    case Frame::kSensor: return "sensor";
    case Frame::kEgo: return "ego";
    case Frame::kWorld: return "world";
    case Frame::kObjectCanonical: return "object-canonical";
  }
  return "unknown";
}

void PointCloud::append(const PointCloud& other, std::optional<ClassId> fill) {
  const bool lhs_labeled = has_labels() || empty() || fill.has_value();
  const bool rhs_labeled = other.has_labels() || fill.has_value();
  if (lhs_labeled && rhs_labeled) {
    if (!labels) labels.emplace(points.size(), fill.value_or(kNoClass));
    if (other.labels) {
      labels->insert(labels->end(), other.labels->begin(), other.labels->end());
    } else {
      labels->insert(labels->end(), other.size(), *fill);
    }
  } else {
    labels.reset();
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
}

PointCloud transform(const Pose& pose, const PointCloud& cloud, Frame target) {
  PointCloud out;
  out.frame = target;
  out.labels = cloud.labels;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(pose.apply(p));
  return out;
}

double normalize_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

bool box_contains(const Box3D& box, const Vec3& point) {
  const Vec3 d = point - box.center;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  // Rz(-yaw) * d
  const Vec3 local(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
  for (int i = 0; i < 3; ++i) {
    const double half = 0.5 * box.size[i];
    if (local[i] < -half || local[i] >= half) return false;
  }
  return true;
}

Box3D box_interpolate(const Box3D& a, const Box3D& b, double alpha) {
  if (a.track_id != b.track_id) {
    std::ostringstream msg;
    msg << "cannot interpolate track " << a.track_id << " with track " << b.track_id;
    throw Error(ErrorKind::kTrackMismatch, msg.str());
  }
  // Endpoints are returned verbatim so keyframes survive bit-exactly.
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;

  Box3D out = a;
  out.center = a.center + alpha * (b.center - a.center);
  out.size = a.size + alpha * (b.size - a.size);
  const double arc = normalize_angle(b.yaw - a.yaw);
  out.yaw = normalize_angle(a.yaw + alpha * arc);
  out.timestamp = a.timestamp + static_cast<Timestamp>(std::llround(
                                    alpha * static_cast<double>(b.timestamp - a.timestamp)));
  return out;
}

bool Camera::is_valid() const {
  const Mat3& k = intrinsics;
  return k(0, 0) > 0.0 && k(1, 1) > 0.0 && k(2, 0) == 0.0 && k(2, 1) == 0.0 &&
         k(2, 2) == 1.0 && width > 0 && height > 0 && extrinsics.is_valid(1e-6);
}

Projection project_to_image(const Camera& camera, const Vec3& point_world) {
  const Pose world_to_camera = invert(camera.extrinsics);
  const Vec3 pc = world_to_camera.apply(point_world);
  Projection out;
  out.depth = pc.z();
  if (pc.z() <= 0.0) {
    out.outcome = Projection::Outcome::kBehindCamera;
    return out;
  }
  const Vec3 uvw = camera.intrinsics * pc;
  out.pixel = Vec2(uvw.x() / uvw.z(), uvw.y() / uvw.z());
  const bool inside = out.pixel.x() >= 0.0 && out.pixel.x() < camera.width &&
                      out.pixel.y() >= 0.0 && out.pixel.y() < camera.height;
  out.outcome = inside ? Projection::Outcome::kInImage : Projection::Outcome::kOutOfImage;
  return out;
}

}  // namespace occgen
