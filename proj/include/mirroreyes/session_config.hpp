#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mirroreyes/attention.hpp"
#include "mirroreyes/compositor.hpp"
#include "mirroreyes/geometry.hpp"
#include "mirroreyes/json_io.hpp"
#include "mirroreyes/protocol.hpp"

namespace mirroreyes {

/// Everything a session needs. Defaults describe three participants standing
/// 2 m from the display, 1 m apart, watched by a 1280x720 camera and two
/// 180x180 px eyes.
struct SessionConfig {
  CameraIntrinsics camera;
  EyeViewport left_eye = default_eye(EyeSide::left);
  EyeViewport right_eye = default_eye(EyeSide::right);
  StyleConfig style;
  PlanConfig plan;
  EngineConfig engine;
  TrackerConfig tracker;
  std::vector<int> roster{1, 2, 3};
  std::uint64_t seed = 1;
  double participant_distance_m = 2.0;
  double participant_spacing_m = 1.0;
  double face_width_m = 0.15;
  double face_height_m = 0.20;
  std::int64_t gaze_shift_ms = 200;
  double vergence_gain_m = kDefaultVergenceGainM;
  double display_rate_hz = 30.0;

  static EyeViewport default_eye(EyeSide side);

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

void to_json(Json& j, const SessionConfig& c);
void from_json(const Json& j, SessionConfig& c);

/// Reads a JSON config file; absent keys keep their defaults.
SessionConfig load_session_config(const std::filesystem::path& path);

/// The standing group implied by the config, as a synthetic scene.
SyntheticSceneConfig default_scene(const SessionConfig& c);

}  // namespace mirroreyes
