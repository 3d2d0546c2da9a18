#pragma once

// Camera-space to eye-space mapping for the mirror-eye model.
//
// A target point in the camera image drives two placements per eye: the
// pupil/iris position inside the eye viewport, and the point of the
// horizontally flipped camera feed that is aligned with the viewport center
// (the "mirror" window). The two move in opposite horizontal directions.
//
// All values are kept in double precision; rounding happens only when a
// raster is produced.

#include <algorithm>

namespace mirroreyes {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct CameraIntrinsics {
  double width_px = 1280.0;
  double height_px = 720.0;
  /// Focal length in pixel units (f_mm * width_px / sensor_width_mm).
  double focal_length_px = 640.0;

  static CameraIntrinsics from_sensor(double width_px, double height_px,
                                      double focal_length_mm,
                                      double sensor_width_mm);

  /// Throws std::invalid_argument when a field is non-positive.
  void validate() const;

  friend bool operator==(const CameraIntrinsics&,
                         const CameraIntrinsics&) = default;
};

enum class EyeSide { left, right };

struct EyeViewport {
  double width_px = 180.0;
  double height_px = 180.0;
  EyeSide side = EyeSide::left;
  Vec2 screen_anchor{};
  /// Normalized (o_x, o_y) offsets added to the normalized target.
  Vec2 offset{};
  /// Iris and pupil disc diameters as a fraction of width_px.
  double pupil_outer_ratio = 64.0 / 90.0;
  double pupil_inner_ratio = 35.0 / 90.0;

  void validate(const CameraIntrinsics& camera) const;

  friend bool operator==(const EyeViewport&, const EyeViewport&) = default;
};

/// Point in camera-image pixels, always inside [0, c_w] x [0, c_h].
class TargetPoint {
public:
  TargetPoint() = default;

  /// Clamps (x, y) into the camera bounds.
  static TargetPoint clamped(double x, double y, const CameraIntrinsics& camera);
  static TargetPoint clamped(Vec2 p, const CameraIntrinsics& camera) {
    return clamped(p.x, p.y, camera);
  }
  /// Midpoint of two in-bounds points is itself in bounds.
  static TargetPoint midpoint(const TargetPoint& a, const TargetPoint& b) {
    return {(a.x_ + b.x_) / 2.0, (a.y_ + b.y_) / 2.0};
  }
  /// Linear interpolation with t clamped to [0, 1].
  static TargetPoint lerp(const TargetPoint& a, const TargetPoint& b, double t) {
    t = std::clamp(t, 0.0, 1.0);
    return {a.x_ + t * (b.x_ - a.x_), a.y_ + t * (b.y_ - a.y_)};
  }

  double x() const { return x_; }
  double y() const { return y_; }
  Vec2 vec() const { return {x_, y_}; }

  friend bool operator==(const TargetPoint&, const TargetPoint&) = default;

private:
  TargetPoint(double x, double y) : x_(x), y_(y) {}
  double x_ = 0.0;
  double y_ = 0.0;
};

struct NormalizedTarget {
  double x = 0.0;
  double y = 0.0;
};

/// Point of the flipped camera image aligned with the eye-viewport center.
struct MirrorPlacement {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const MirrorPlacement&,
                         const MirrorPlacement&) = default;
};

/// Pupil center in eye-viewport pixels.
struct PupilPlacement {
  double x = 0.0;
  double y = 0.0;
  /// Set when the raw value fell outside the viewport and was clamped.
  bool clamped = false;

  friend bool operator==(const PupilPlacement&,
                         const PupilPlacement&) = default;
};

struct DepthEstimate {
  double distance_m = 0.0;
  bool valid = false;
};

struct VergenceOffsets {
  double left_x = 0.0;
  double right_x = 0.0;
};

struct EyePlacement {
  NormalizedTarget normalized;
  MirrorPlacement mirror;
  PupilPlacement pupil;
};

NormalizedTarget normalize_target(const TargetPoint& target,
                                  const CameraIntrinsics& camera,
                                  const EyeViewport& viewport);

MirrorPlacement mirror_placement(const NormalizedTarget& n,
                                 const CameraIntrinsics& camera,
                                 const EyeViewport& viewport);

PupilPlacement pupil_placement(const TargetPoint& target,
                               const NormalizedTarget& n,
                               const MirrorPlacement& m,
                               const CameraIntrinsics& camera,
                               const EyeViewport& viewport);

/// Pinhole distance from a known physical size. Invalid when the observed
/// size is not positive.
DepthEstimate estimate_depth(double observed_size_px, double real_size_m,
                             const CameraIntrinsics& camera);

inline constexpr double kDefaultVergenceGainM = 0.01;

/// Horizontal per-eye offsets that converge on near targets. Invalid depth
/// degrades to zero offsets.
VergenceOffsets vergence_offsets(const DepthEstimate& depth,
                                 double gain_m = kDefaultVergenceGainM);

/// normalize -> mirror -> pupil for one eye.
EyePlacement place_eye(const TargetPoint& target, const CameraIntrinsics& camera,
                       const EyeViewport& viewport);

struct BinocularPlacement {
  EyePlacement left;
  EyePlacement right;
  VergenceOffsets vergence;
};

/// Places both eyes, adding the vergence offsets for `depth` on top of each
/// viewport's own offset.
BinocularPlacement place_eyes(const TargetPoint& target,
                              const CameraIntrinsics& camera,
                              const EyeViewport& left, const EyeViewport& right,
                              const DepthEstimate& depth,
                              double gain_m = kDefaultVergenceGainM);

}  // namespace mirroreyes
