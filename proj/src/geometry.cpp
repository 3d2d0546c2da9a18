#include "mirroreyes/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mirroreyes {

CameraIntrinsics CameraIntrinsics::from_sensor(double width_px, double height_px,
                                               double focal_length_mm,
                                               double sensor_width_mm) {
  if (!(sensor_width_mm > 0.0)) {
    throw std::invalid_argument("sensor width must be positive");
  }
  CameraIntrinsics c{width_px, height_px,
                     focal_length_mm * width_px / sensor_width_mm};
  c.validate();
  return c;
}

void CameraIntrinsics::validate() const {
  if (!(width_px > 0.0) || !(height_px > 0.0)) {
    throw std::invalid_argument("camera image size must be positive");
  }
  if (!(focal_length_px > 0.0)) {
    throw std::invalid_argument("focal length must be positive");
  }
}

void EyeViewport::validate(const CameraIntrinsics& camera) const {
  if (!(width_px > 0.0) || width_px > camera.width_px) {
    throw std::invalid_argument("eye width must be in (0, camera width]");
  }
  if (!(height_px > 0.0) || height_px > camera.height_px) {
    throw std::invalid_argument("eye height must be in (0, camera height]");
  }
  if (!(pupil_inner_ratio > 0.0) || !(pupil_inner_ratio < pupil_outer_ratio) ||
      pupil_outer_ratio > 1.0) {
    throw std::invalid_argument(
        "pupil ratios must satisfy 0 < inner < outer <= 1");
  }
}

TargetPoint TargetPoint::clamped(double x, double y,
                                 const CameraIntrinsics& camera) {
  if (std::isnan(x) || std::isnan(y)) {
    throw std::invalid_argument("target coordinates must be numbers");
  }
  return {std::clamp(x, 0.0, camera.width_px),
          std::clamp(y, 0.0, camera.height_px)};
}

NormalizedTarget normalize_target(const TargetPoint& target,
                                  const CameraIntrinsics& camera,
                                  const EyeViewport& viewport) {
  return {target.x() / camera.width_px + viewport.offset.x,
          target.y() / camera.height_px + viewport.offset.y};
}

MirrorPlacement mirror_placement(const NormalizedTarget& n,
                                 const CameraIntrinsics& camera,
                                 const EyeViewport& viewport) {
  const double ew = viewport.width_px;
  const double eh = viewport.height_px;
  // Horizontal flip through (1 - n_x); the vertical axis is not flipped.
  return {(1.0 - n.x) * (camera.width_px - ew) + ew / 2.0,
          n.y * (camera.height_px - eh) + eh / 2.0};
}

PupilPlacement pupil_placement(const TargetPoint& target,
                               const NormalizedTarget& n,
                               const MirrorPlacement& m,
                               const CameraIntrinsics& camera,
                               const EyeViewport& viewport) {
  const double ew = viewport.width_px;
  const double eh = viewport.height_px;
  const double raw_x = target.x() - n.x * (camera.width_px - ew);
  const double raw_y = target.y() - m.y + eh / 2.0;

  PupilPlacement p;
  p.x = std::clamp(raw_x, 0.0, ew);
  p.y = std::clamp(raw_y, 0.0, eh);
  p.clamped = p.x != raw_x || p.y != raw_y;
  return p;
}

DepthEstimate estimate_depth(double observed_size_px, double real_size_m,
                             const CameraIntrinsics& camera) {
  if (!(observed_size_px > 0.0) || !(real_size_m > 0.0)) {
    return {};
  }
  return {camera.focal_length_px * real_size_m / observed_size_px, true};
}

VergenceOffsets vergence_offsets(const DepthEstimate& depth, double gain_m) {
  if (!depth.valid || !(depth.distance_m > 0.0)) {
    return {};
  }
  const double o = gain_m / depth.distance_m;
  return {o, -o};
}

EyePlacement place_eye(const TargetPoint& target, const CameraIntrinsics& camera,
                       const EyeViewport& viewport) {
  EyePlacement out;
  out.normalized = normalize_target(target, camera, viewport);
  out.mirror = mirror_placement(out.normalized, camera, viewport);
  out.pupil =
      pupil_placement(target, out.normalized, out.mirror, camera, viewport);
  return out;
}

BinocularPlacement place_eyes(const TargetPoint& target,
                              const CameraIntrinsics& camera,
                              const EyeViewport& left, const EyeViewport& right,
                              const DepthEstimate& depth, double gain_m) {
  BinocularPlacement out;
  out.vergence = vergence_offsets(depth, gain_m);

  EyeViewport l = left;
  EyeViewport r = right;
  l.offset.x += out.vergence.left_x;
  r.offset.x += out.vergence.right_x;

  out.left = place_eye(target, camera, l);
  out.right = place_eye(target, camera, r);
  return out;
}

}  // namespace mirroreyes
