#include "mirroreyes/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mirroreyes {

std::string_view to_string(DisplayCondition c) {
  switch (c) {
    case DisplayCondition::eye_only:
      return "eye_only";
    case DisplayCondition::mirror_only:
      return "mirror_only";
    case DisplayCondition::mirror_eye:
      return "mirror_eye";
  }
  throw std::invalid_argument("unknown display condition");
}

DisplayCondition parse_condition(std::string_view name) {
  for (auto c : kAllConditions) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown display condition: " + std::string(name));
}

std::string_view to_string(ClipMode m) {
  switch (m) {
    case ClipMode::iris_disc:
      return "iris_disc";
    case ClipMode::full_viewport:
      return "full_viewport";
  }
  throw std::invalid_argument("unknown clip mode");
}

ClipMode parse_clip_mode(std::string_view name) {
  if (name == "iris_disc") return ClipMode::iris_disc;
  if (name == "full_viewport") return ClipMode::full_viewport;
  throw std::invalid_argument("unknown clip mode: " + std::string(name));
}

RasterImage::RasterImage(int width, int height, Rgba fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw std::invalid_argument("raster size must be non-negative");
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 fill);
}

std::vector<std::uint8_t> RasterImage::bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(pixels_.size() * 4);
  for (const auto& p : pixels_) {
    out.insert(out.end(), {p.r, p.g, p.b, p.a});
  }
  return out;
}

RenderSpec build_render_spec(DisplayCondition condition, const EyeInput& left,
                             const EyeInput& right,
                             std::string camera_image_id,
                             const StyleConfig& style) {
  RenderSpec spec;
  spec.camera_image_id = std::move(camera_image_id);
  spec.condition = condition;

  const EyeInput* inputs[2] = {&left, &right};
  for (int i = 0; i < 2; ++i) {
    const EyeInput& in = *inputs[i];
    EyeRender& eye = spec.eyes[static_cast<std::size_t>(i)];
    eye.viewport = in.viewport;
    eye.condition = condition;
    eye.iris_radius_px = in.viewport.pupil_outer_ratio * in.viewport.width_px / 2.0;
    eye.pupil_radius_px = in.viewport.pupil_inner_ratio * in.viewport.width_px / 2.0;
    eye.sclera_color = style.sclera;
    eye.iris_color = style.iris;
    eye.pupil_color = style.pupil;

    switch (condition) {
      case DisplayCondition::eye_only:
        eye.pupil = in.placement.pupil;
        eye.alpha = 0.0;
        eye.clip = style.mirror_eye_clip;
        break;
      case DisplayCondition::mirror_only:
        eye.mirror = in.placement.mirror;
        eye.alpha = 1.0;
        eye.clip = style.mirror_only_clip;
        break;
      case DisplayCondition::mirror_eye:
        eye.pupil = in.placement.pupil;
        eye.mirror = in.placement.mirror;
        eye.alpha = std::clamp(style.mirror_eye_alpha, 0.0, 1.0);
        eye.clip = style.mirror_eye_clip;
        break;
      default:
        throw std::invalid_argument("unknown display condition");
    }
  }
  return spec;
}

RasterImage flip_horizontal(const RasterImage& image) {
  RasterImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.at(image.width() - 1 - x, y) = image.at(x, y);
    }
  }
  return out;
}

namespace {

int raster_size(double px) { return static_cast<int>(std::lround(px)); }

/// Window origin along one axis, shifted so the window stays in the image.
int window_origin(double center, int window, int image) {
  const int origin = static_cast<int>(std::lround(center - window / 2.0));
  if (window >= image) return 0;
  return std::clamp(origin, 0, image - window);
}

std::uint8_t blend_channel(std::uint8_t over, std::uint8_t under, double alpha) {
  const double v = alpha * over + (1.0 - alpha) * under;
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

bool in_disc(int x, int y, double cx, double cy, double r) {
  const double dx = x + 0.5 - cx;
  const double dy = y + 0.5 - cy;
  return dx * dx + dy * dy <= r * r;
}

}  // namespace

RasterImage sample_window(const RasterImage& image, const MirrorPlacement& m,
                          const EyeViewport& viewport) {
  const int w = raster_size(viewport.width_px);
  const int h = raster_size(viewport.height_px);
  RasterImage out(w, h);
  if (image.empty()) return out;

  const int x0 = window_origin(m.x, w, image.width());
  const int y0 = window_origin(m.y, h, image.height());
  for (int y = 0; y < h; ++y) {
    const int sy = std::clamp(y0 + y, 0, image.height() - 1);
    for (int x = 0; x < w; ++x) {
      // Column of the flipped image, read straight from the source.
      const int fx = std::clamp(x0 + x, 0, image.width() - 1);
      out.at(x, y) = image.at(image.width() - 1 - fx, sy);
    }
  }
  return out;
}

RasterImage composite_eye(const EyeRender& eye, const RasterImage& camera_image) {
  if (!(eye.alpha >= 0.0 && eye.alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
  const int w = raster_size(eye.viewport.width_px);
  const int h = raster_size(eye.viewport.height_px);
  RasterImage out(w, h, eye.sclera_color);

  if (eye.pupil) {
    const double cx = eye.pupil->x;
    const double cy = eye.pupil->y;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (in_disc(x, y, cx, cy, eye.pupil_radius_px)) {
          out.at(x, y) = eye.pupil_color;
        } else if (in_disc(x, y, cx, cy, eye.iris_radius_px)) {
          out.at(x, y) = eye.iris_color;
        }
      }
    }
  }

  if (eye.mirror && !camera_image.empty()) {
    const RasterImage window = sample_window(camera_image, *eye.mirror, eye.viewport);
    // Without a pupil the iris clip falls back to the viewport center.
    const double cx = eye.pupil ? eye.pupil->x : eye.viewport.width_px / 2.0;
    const double cy = eye.pupil ? eye.pupil->y : eye.viewport.height_px / 2.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (eye.clip == ClipMode::iris_disc &&
            !in_disc(x, y, cx, cy, eye.iris_radius_px)) {
          continue;
        }
        const Rgba& over = window.at(x, y);
        Rgba& under = out.at(x, y);
        under = {blend_channel(over.r, under.r, eye.alpha),
                 blend_channel(over.g, under.g, eye.alpha),
                 blend_channel(over.b, under.b, eye.alpha),
                 blend_channel(over.a, under.a, eye.alpha)};
      }
    }
  }
  return out;
}

RasterImage make_test_camera_image(int width, int height,
                                   const std::vector<Vec2>& face_centers,
                                   int face_size_px) {
  RasterImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img.at(x, y) = {static_cast<std::uint8_t>(x * 255 / std::max(1, width - 1)),
                      static_cast<std::uint8_t>(y * 255 / std::max(1, height - 1)),
                      96, 255};
    }
  }
  static constexpr Rgba kPalette[] = {
      {230, 60, 60, 255}, {60, 200, 80, 255}, {240, 200, 40, 255},
      {200, 80, 220, 255}, {40, 200, 220, 255}, {250, 140, 30, 255}};
  const int half = face_size_px / 2;
  for (std::size_t i = 0; i < face_centers.size(); ++i) {
    const Rgba color = kPalette[i % std::size(kPalette)];
    const int cx = static_cast<int>(std::lround(face_centers[i].x));
    const int cy = static_cast<int>(std::lround(face_centers[i].y));
    for (int y = std::max(0, cy - half); y < std::min(height, cy + half); ++y) {
      for (int x = std::max(0, cx - half); x < std::min(width, cx + half); ++x) {
        img.at(x, y) = color;
      }
    }
  }
  return img;
}

std::uint64_t raster_digest(const RasterImage& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int shift = 0; shift < 32; shift += 8) {
    feed(static_cast<std::uint8_t>(static_cast<unsigned>(image.width()) >> shift));
    feed(static_cast<std::uint8_t>(static_cast<unsigned>(image.height()) >> shift));
  }
  for (const auto& p : image.pixels()) {
    feed(p.r);
    feed(p.g);
    feed(p.b);
    feed(p.a);
  }
  return h;
}

}  // namespace mirroreyes
