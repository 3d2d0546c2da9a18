#pragma once

// Offline rendering driven by a JSON job file:
//
//   {
//     "camera": {...}, "left_eye": {...}, "right_eye": {...}, "style": {...},
//     "camera_image": {"faces": [[320, 360], ...], "face_size_px": 48}
//                   | {"png": "frame.png"},
//     "frames": [
//       {"name": "center", "condition": "mirror_eye", "target": [640, 360],
//        "distance_m": 2.0},
//       {"name": "raw", "render_spec": {...}}
//     ]
//   }
//
// Every key is optional; without frames, all three conditions are rendered
// for a centered target.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mirroreyes/session_config.hpp"

namespace mirroreyes {

struct RenderFrame {
  std::string name;
  std::optional<RenderSpec> spec;
  DisplayCondition condition = DisplayCondition::mirror_eye;
  Vec2 target{640.0, 360.0};
  std::optional<double> distance_m;
};

struct RenderJob {
  SessionConfig config;
  RasterImage camera_image;
  std::vector<RenderFrame> frames;
};

/// Relative PNG paths resolve against `base_dir`.
RenderJob render_job_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RenderJob load_render_job(const std::filesystem::path& path);

/// Render spec for a frame: the given one, or one built from its target.
RenderSpec frame_spec(const RenderJob& job, const RenderFrame& frame);

struct RenderedFile {
  std::string frame;
  std::string eye;
  std::filesystem::path path;
  std::uint64_t digest = 0;
};

/// Writes <name>_left.png and <name>_right.png per frame plus manifest.json.
std::vector<RenderedFile> run_render_job(const RenderJob& job,
                                         const std::filesystem::path& out_dir);

}  // namespace mirroreyes
