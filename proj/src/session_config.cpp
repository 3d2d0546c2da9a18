#include "mirroreyes/session_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace mirroreyes {

namespace {

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it != j.end() && !it->is_null()) out = it->template get<T>();
}

/// Merge so that partial objects in a file override only what they name.
template <typename T>
void merge_if(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  from_json(*it, out);
}

}  // namespace

EyeViewport SessionConfig::default_eye(EyeSide side) {
  EyeViewport v;
  v.side = side;
  v.screen_anchor = side == EyeSide::left ? Vec2{0.0, 0.0} : Vec2{220.0, 0.0};
  return v;
}

void SessionConfig::validate() const {
  camera.validate();
  left_eye.validate(camera);
  right_eye.validate(camera);
  if (roster.size() < 2) throw std::invalid_argument("roster needs at least two participants");
  if (std::set<int>(roster.begin(), roster.end()).size() != roster.size()) {
    throw std::invalid_argument("roster ids must be unique");
  }
  for (double r : {plan.mistake_rate_practice, plan.mistake_rate_part1,
                   plan.mistake_rate_part2}) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("mistake rates must be in [0, 1]");
  }
  if (plan.practice_cap_ms <= 0 || plan.part1_cap_ms <= 0 || plan.part2_cap_ms <= 0) {
    throw std::invalid_argument("block caps must be positive");
  }
  if (engine.timing.press_window_ms <= 0 || engine.timing.word_window_ms <= 0) {
    throw std::invalid_argument("response windows must be positive");
  }
  if (!(participant_distance_m > 0.0) || !(face_width_m > 0.0) || !(face_height_m > 0.0)) {
    throw std::invalid_argument("participant geometry must be positive");
  }
  if (gaze_shift_ms < 0) throw std::invalid_argument("gaze_shift_ms must be non-negative");
  if (!(display_rate_hz > 0.0)) throw std::invalid_argument("display_rate_hz must be positive");
  if (!(style.mirror_eye_alpha >= 0.0 && style.mirror_eye_alpha <= 1.0)) {
    throw std::invalid_argument("mirror_eye_alpha must be in [0, 1]");
  }
}

void to_json(Json& j, const SessionConfig& c) {
  j = Json::object();
  j["camera"] = c.camera;
  j["left_eye"] = c.left_eye;
  j["right_eye"] = c.right_eye;
  j["style"] = c.style;
  j["plan"] = c.plan;
  j["engine"] = c.engine;
  j["tracker"] = Json{{"gate_fraction", c.tracker.gate_fraction},
                      {"retire_after_ms", c.tracker.retire_after_ms}};
  j["roster"] = c.roster;
  j["seed"] = c.seed;
  j["participant_distance_m"] = c.participant_distance_m;
  j["participant_spacing_m"] = c.participant_spacing_m;
  j["face_width_m"] = c.face_width_m;
  j["face_height_m"] = c.face_height_m;
  j["gaze_shift_ms"] = c.gaze_shift_ms;
  j["vergence_gain_m"] = c.vergence_gain_m;
  j["display_rate_hz"] = c.display_rate_hz;
}

void from_json(const Json& j, SessionConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  merge_if(j, "camera", c.camera);
  merge_if(j, "left_eye", c.left_eye);
  merge_if(j, "right_eye", c.right_eye);
  merge_if(j, "style", c.style);
  merge_if(j, "plan", c.plan);
  merge_if(j, "engine", c.engine);
  if (const auto it = j.find("tracker"); it != j.end() && it->is_object()) {
    read_if(*it, "gate_fraction", c.tracker.gate_fraction);
    read_if(*it, "retire_after_ms", c.tracker.retire_after_ms);
  }
  read_if(j, "roster", c.roster);
  read_if(j, "seed", c.seed);
  read_if(j, "participant_distance_m", c.participant_distance_m);
  read_if(j, "participant_spacing_m", c.participant_spacing_m);
  read_if(j, "face_width_m", c.face_width_m);
  read_if(j, "face_height_m", c.face_height_m);
  read_if(j, "gaze_shift_ms", c.gaze_shift_ms);
  read_if(j, "vergence_gain_m", c.vergence_gain_m);
  read_if(j, "display_rate_hz", c.display_rate_hz);
}

SessionConfig load_session_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  SessionConfig c = j.get<SessionConfig>();
  c.validate();
  return c;
}

SyntheticSceneConfig default_scene(const SessionConfig& c) {
  return SyntheticSceneConfig::standing_group(
      c.camera, static_cast<int>(c.roster.size()), c.participant_distance_m,
      c.participant_spacing_m, c.face_width_m, c.face_height_m);
}

}  // namespace mirroreyes
