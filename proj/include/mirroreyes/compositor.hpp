#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirroreyes/geometry.hpp"

namespace mirroreyes {

enum class DisplayCondition { eye_only, mirror_only, mirror_eye };

inline constexpr std::array<DisplayCondition, 3> kAllConditions = {
    DisplayCondition::eye_only, DisplayCondition::mirror_only,
    DisplayCondition::mirror_eye};

std::string_view to_string(DisplayCondition c);
/// Throws std::invalid_argument for unknown names.
DisplayCondition parse_condition(std::string_view name);

enum class ClipMode { iris_disc, full_viewport };

std::string_view to_string(ClipMode m);
ClipMode parse_clip_mode(std::string_view name);

struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 255;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

class RasterImage {
public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgba fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgba& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgba& at(int x, int y) const { return pixels_[index(x, y)]; }

  const std::vector<Rgba>& pixels() const { return pixels_; }
  /// Raw row-major RGBA bytes.
  std::vector<std::uint8_t> bytes() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgba> pixels_;
};

struct StyleConfig {
  Rgba sclera{255, 255, 255, 255};
  Rgba iris{70, 110, 160, 255};
  Rgba pupil{20, 20, 20, 255};
  double mirror_eye_alpha = 0.5;
  ClipMode mirror_eye_clip = ClipMode::iris_disc;
  ClipMode mirror_only_clip = ClipMode::full_viewport;
};

/// Drawing instruction for one eye.
struct EyeRender {
  EyeViewport viewport;
  DisplayCondition condition = DisplayCondition::eye_only;
  std::optional<PupilPlacement> pupil;
  std::optional<MirrorPlacement> mirror;
  double alpha = 0.0;
  ClipMode clip = ClipMode::iris_disc;
  double iris_radius_px = 0.0;
  double pupil_radius_px = 0.0;
  Rgba sclera_color;
  Rgba iris_color;
  Rgba pupil_color;

  friend bool operator==(const EyeRender&, const EyeRender&) = default;
};

struct RenderSpec {
  std::string camera_image_id;
  DisplayCondition condition = DisplayCondition::eye_only;
  std::array<EyeRender, 2> eyes;

  friend bool operator==(const RenderSpec&, const RenderSpec&) = default;
};

struct EyeInput {
  EyeViewport viewport;
  EyePlacement placement;
};

RenderSpec build_render_spec(DisplayCondition condition, const EyeInput& left,
                             const EyeInput& right,
                             std::string camera_image_id,
                             const StyleConfig& style = {});

/// Pixel (x, y) moves to (width - 1 - x, y).
RasterImage flip_horizontal(const RasterImage& image);

/// The viewport-sized region of the horizontally flipped `image` centered at
/// `m`. A window reaching past an image edge is shifted back inside.
RasterImage sample_window(const RasterImage& image, const MirrorPlacement& m,
                          const EyeViewport& viewport);

/// Renders one eye: sclera, iris and pupil discs, then the mirror overlay
/// blended at the eye's alpha inside its clip region.
RasterImage composite_eye(const EyeRender& eye, const RasterImage& camera_image);

/// Deterministic stand-in camera frame: a smooth gradient with a colored
/// block behind each given face center.
RasterImage make_test_camera_image(int width, int height,
                                   const std::vector<Vec2>& face_centers = {},
                                   int face_size_px = 48);

/// 64-bit FNV-1a over the raster's size and bytes.
std::uint64_t raster_digest(const RasterImage& image);

void write_png(const RasterImage& image, const std::filesystem::path& path);
RasterImage read_png(const std::filesystem::path& path);

}  // namespace mirroreyes
