#include "mirroreyes/json_io.hpp"

#include <stdexcept>

namespace mirroreyes {

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

std::string_view side_name(EyeSide s) { return s == EyeSide::left ? "left" : "right"; }

EyeSide parse_side(const std::string& s) {
  if (s == "left") return EyeSide::left;
  if (s == "right") return EyeSide::right;
  throw std::invalid_argument("unknown eye side: " + s);
}

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it != j.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::strict);
}

void to_json(Json& j, const Vec2& v) { j = Json::array({v.x, v.y}); }

void from_json(const Json& j, Vec2& v) {
  if (j.is_array()) {
    if (j.size() != 2) throw std::invalid_argument("point needs two coordinates");
    v = {j.at(0).get<double>(), j.at(1).get<double>()};
  } else {
    v = {j.at("x").get<double>(), j.at("y").get<double>()};
  }
}

void to_json(Json& j, const CameraIntrinsics& c) {
  j = Json{{"width_px", c.width_px},
           {"height_px", c.height_px},
           {"focal_length_px", c.focal_length_px}};
}

void from_json(const Json& j, CameraIntrinsics& c) {
  read_if(j, "width_px", c.width_px);
  read_if(j, "height_px", c.height_px);
  read_if(j, "focal_length_px", c.focal_length_px);
}

void to_json(Json& j, const EyeViewport& v) {
  j = Json{{"width_px", v.width_px},
           {"height_px", v.height_px},
           {"side", side_name(v.side)},
           {"screen_anchor", v.screen_anchor},
           {"offset", v.offset},
           {"pupil_outer_ratio", v.pupil_outer_ratio},
           {"pupil_inner_ratio", v.pupil_inner_ratio}};
}

void from_json(const Json& j, EyeViewport& v) {
  read_if(j, "width_px", v.width_px);
  read_if(j, "height_px", v.height_px);
  if (j.contains("side")) v.side = parse_side(j.at("side").get<std::string>());
  read_if(j, "screen_anchor", v.screen_anchor);
  read_if(j, "offset", v.offset);
  read_if(j, "pupil_outer_ratio", v.pupil_outer_ratio);
  read_if(j, "pupil_inner_ratio", v.pupil_inner_ratio);
}

void to_json(Json& j, const MirrorPlacement& m) { j = Json{{"x", m.x}, {"y", m.y}}; }

void from_json(const Json& j, MirrorPlacement& m) {
  m = {j.at("x").get<double>(), j.at("y").get<double>()};
}

void to_json(Json& j, const PupilPlacement& p) {
  j = Json{{"x", p.x}, {"y", p.y}, {"clamped", p.clamped}};
}

void from_json(const Json& j, PupilPlacement& p) {
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.clamped = j.value("clamped", false);
}

void to_json(Json& j, const Rgba& c) { j = Json::array({c.r, c.g, c.b, c.a}); }

void from_json(const Json& j, Rgba& c) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 4)) {
    throw std::invalid_argument("color must be [r, g, b] or [r, g, b, a]");
  }
  auto channel = [&](std::size_t i) {
    const int v = j.at(i).get<int>();
    if (v < 0 || v > 255) throw std::invalid_argument("color channel out of range");
    return static_cast<std::uint8_t>(v);
  };
  c = {channel(0), channel(1), channel(2), j.size() == 4 ? channel(3) : std::uint8_t{255}};
}

void to_json(Json& j, const EyeRender& e) {
  j = Json::object();
  j["viewport"] = e.viewport;
  j["condition"] = to_string(e.condition);
  put_optional(j, "pupil", e.pupil);
  put_optional(j, "mirror", e.mirror);
  j["alpha"] = e.alpha;
  j["clip"] = to_string(e.clip);
  j["iris_radius_px"] = e.iris_radius_px;
  j["pupil_radius_px"] = e.pupil_radius_px;
  j["sclera_color"] = e.sclera_color;
  j["iris_color"] = e.iris_color;
  j["pupil_color"] = e.pupil_color;
}

void from_json(const Json& j, EyeRender& e) {
  e.viewport = j.at("viewport").get<EyeViewport>();
  e.condition = parse_condition(j.at("condition").get<std::string>());
  e.pupil = get_optional<PupilPlacement>(j, "pupil");
  e.mirror = get_optional<MirrorPlacement>(j, "mirror");
  e.alpha = j.at("alpha").get<double>();
  e.clip = parse_clip_mode(j.at("clip").get<std::string>());
  e.iris_radius_px = j.at("iris_radius_px").get<double>();
  e.pupil_radius_px = j.at("pupil_radius_px").get<double>();
  e.sclera_color = j.at("sclera_color").get<Rgba>();
  e.iris_color = j.at("iris_color").get<Rgba>();
  e.pupil_color = j.at("pupil_color").get<Rgba>();
}

void to_json(Json& j, const RenderSpec& s) {
  j = Json{{"camera_image_id", s.camera_image_id},
           {"condition", to_string(s.condition)},
           {"eyes", Json::array({s.eyes[0], s.eyes[1]})}};
}

void from_json(const Json& j, RenderSpec& s) {
  s.camera_image_id = j.at("camera_image_id").get<std::string>();
  s.condition = parse_condition(j.at("condition").get<std::string>());
  const auto& eyes = j.at("eyes");
  if (!eyes.is_array() || eyes.size() != 2) {
    throw std::invalid_argument("render spec needs exactly two eyes");
  }
  s.eyes[0] = eyes.at(0).get<EyeRender>();
  s.eyes[1] = eyes.at(1).get<EyeRender>();
}

void to_json(Json& j, const StyleConfig& s) {
  j = Json{{"sclera", s.sclera},
           {"iris", s.iris},
           {"pupil", s.pupil},
           {"mirror_eye_alpha", s.mirror_eye_alpha},
           {"mirror_eye_clip", to_string(s.mirror_eye_clip)},
           {"mirror_only_clip", to_string(s.mirror_only_clip)}};
}

void from_json(const Json& j, StyleConfig& s) {
  read_if(j, "sclera", s.sclera);
  read_if(j, "iris", s.iris);
  read_if(j, "pupil", s.pupil);
  read_if(j, "mirror_eye_alpha", s.mirror_eye_alpha);
  if (j.contains("mirror_eye_clip")) {
    s.mirror_eye_clip = parse_clip_mode(j.at("mirror_eye_clip").get<std::string>());
  }
  if (j.contains("mirror_only_clip")) {
    s.mirror_only_clip = parse_clip_mode(j.at("mirror_only_clip").get<std::string>());
  }
}

void to_json(Json& j, const TargetSelection& s) {
  switch (s.kind) {
    case TargetSelection::Kind::none:
      j = Json{{"kind", "none"}, {"mistake", s.is_mistake}};
      return;
    case TargetSelection::Kind::participant:
      j = Json{{"kind", "participant"}, {"participant", s.participant},
               {"mistake", s.is_mistake}};
      return;
    case TargetSelection::Kind::between:
      j = Json{{"kind", "between"}, {"a", s.between_a}, {"b", s.between_b},
               {"mistake", s.is_mistake}};
      return;
  }
}

void from_json(const Json& j, TargetSelection& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    s = TargetSelection::none();
  } else if (kind == "participant") {
    s = TargetSelection::of(j.at("participant").get<int>());
  } else if (kind == "between") {
    s = TargetSelection::between(j.at("a").get<int>(), j.at("b").get<int>());
  } else {
    throw std::invalid_argument("unknown selection kind: " + kind);
  }
  s.is_mistake = j.value("mistake", s.is_mistake);
  if ((s.kind == TargetSelection::Kind::between) != s.is_mistake) {
    throw std::invalid_argument("mistake flag must match a between selection");
  }
}

void to_json(Json& j, const BalancingAction& b) {
  j = Json{{"kind", b.kind == BalancingAction::Kind::swap ? "swap" : "append"},
           {"trial_ids", b.trial_ids}};
}

void from_json(const Json& j, BalancingAction& b) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "swap") {
    b.kind = BalancingAction::Kind::swap;
  } else if (kind == "append") {
    b.kind = BalancingAction::Kind::append;
  } else {
    throw std::invalid_argument("unknown balancing kind: " + kind);
  }
  b.trial_ids = j.at("trial_ids").get<std::vector<int>>();
}

void to_json(Json& j, const PlanConfig& p) {
  j = Json{{"practice_trials_per_condition", p.practice_trials_per_condition},
           {"part1_trials_per_block", p.part1_trials_per_block},
           {"part2_trials_per_condition", p.part2_trials_per_condition},
           {"mistake_rate_practice", p.mistake_rate_practice},
           {"mistake_rate_part1", p.mistake_rate_part1},
           {"mistake_rate_part2", p.mistake_rate_part2},
           {"practice_cap_ms", p.practice_cap_ms},
           {"part1_cap_ms", p.part1_cap_ms},
           {"part2_cap_ms", p.part2_cap_ms},
           {"mistake_scheduling", to_string(p.mistake_scheduling)},
           {"include_practice", p.include_practice},
           {"include_part1", p.include_part1},
           {"include_part2", p.include_part2}};
}

void from_json(const Json& j, PlanConfig& p) {
  read_if(j, "practice_trials_per_condition", p.practice_trials_per_condition);
  read_if(j, "part1_trials_per_block", p.part1_trials_per_block);
  read_if(j, "part2_trials_per_condition", p.part2_trials_per_condition);
  read_if(j, "mistake_rate_practice", p.mistake_rate_practice);
  read_if(j, "mistake_rate_part1", p.mistake_rate_part1);
  read_if(j, "mistake_rate_part2", p.mistake_rate_part2);
  read_if(j, "practice_cap_ms", p.practice_cap_ms);
  read_if(j, "part1_cap_ms", p.part1_cap_ms);
  read_if(j, "part2_cap_ms", p.part2_cap_ms);
  if (j.contains("mistake_scheduling")) {
    p.mistake_scheduling =
        parse_mistake_scheduling(j.at("mistake_scheduling").get<std::string>());
  }
  read_if(j, "include_practice", p.include_practice);
  read_if(j, "include_part1", p.include_part1);
  read_if(j, "include_part2", p.include_part2);
}

void to_json(Json& j, const EngineConfig& e) {
  j = Json{{"press_window_ms", e.timing.press_window_ms},
           {"word_window_ms", e.timing.word_window_ms},
           {"involvement", to_string(e.involvement)},
           {"rebalancing", e.rebalancing}};
}

void from_json(const Json& j, EngineConfig& e) {
  read_if(j, "press_window_ms", e.timing.press_window_ms);
  read_if(j, "word_window_ms", e.timing.word_window_ms);
  if (j.contains("involvement")) {
    e.involvement = parse_involvement(j.at("involvement").get<std::string>());
  }
  read_if(j, "rebalancing", e.rebalancing);
}

void to_json(Json& j, const LogRecord& r) {
  j = Json::object();
  j["type"] = r.type;
  j["t_ms"] = r.t_ms;
  put_optional(j, "trial_id", r.trial_id);
  put_optional(j, "block_id", r.block_id);
  if (r.condition) {
    j["condition"] = to_string(*r.condition);
  } else {
    j["condition"] = nullptr;
  }
  put_optional(j, "selection", r.selection);
  put_optional(j, "participant", r.participant);
  if (const auto* s = std::get_if<std::string>(&r.label)) {
    j["label"] = *s;
  } else if (const auto* m = std::get_if<std::map<int, Label>>(&r.label)) {
    Json labels = Json::object();
    for (const auto& [id, label] : *m) labels[std::to_string(id)] = to_string(label);
    j["label"] = std::move(labels);
  } else {
    j["label"] = nullptr;
  }
  put_optional(j, "rt_ms", r.rt_ms);
  put_optional(j, "balancing", r.balancing);
}

void from_json(const Json& j, LogRecord& r) {
  if (!j.is_object()) throw std::invalid_argument("log record must be an object");
  r.type = j.at("type").get<std::string>();
  r.t_ms = j.at("t_ms").get<std::int64_t>();
  r.trial_id = get_optional<int>(j, "trial_id");
  r.block_id = get_optional<int>(j, "block_id");
  const auto cond = get_optional<std::string>(j, "condition");
  r.condition = cond ? std::optional(parse_condition(*cond)) : std::nullopt;
  r.selection = get_optional<TargetSelection>(j, "selection");
  r.participant = get_optional<int>(j, "participant");
  const auto it = j.find("label");
  if (it == j.end() || it->is_null()) {
    r.label = std::monostate{};
  } else if (it->is_string()) {
    r.label = it->get<std::string>();
  } else if (it->is_object()) {
    std::map<int, Label> labels;
    for (const auto& [key, value] : it->items()) {
      labels[std::stoi(key)] = parse_label(value.get<std::string>());
    }
    r.label = std::move(labels);
  } else {
    throw std::invalid_argument("label must be null, a string or an object");
  }
  r.rt_ms = get_optional<std::int64_t>(j, "rt_ms");
  r.balancing = get_optional<BalancingAction>(j, "balancing");
}

}  // namespace mirroreyes
