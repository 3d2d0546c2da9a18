#include "mirroreyes/messages.hpp"

#include <array>
#include <stdexcept>

namespace mirroreyes {

namespace {

constexpr std::array<std::string_view, 9> kTypeNames = {
    "hello",   "scene_update",         "gaze_target", "render_spec", "trial_event",
    "press",   "experimenter_control", "clock_sync",  "error"};

static_assert(std::variant_size_v<Payload> == kTypeNames.size());

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

Json payload_json(const Payload& p) {
  Json j = Json::object();
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HelloPayload>) {
          j["role"] = to_string(v.role);
          put_optional(j, "participant", v.participant);
          put_optional(j, "session_id", v.session_id);
        } else if constexpr (std::is_same_v<T, SceneUpdatePayload>) {
          j["frame_t_ms"] = v.frame_t_ms;
          Json faces = Json::array();
          for (const auto& f : v.faces) {
            faces.push_back(
                Json{{"center", f.center}, {"width_px", f.width_px}, {"height_px", f.height_px}});
          }
          j["faces"] = std::move(faces);
        } else if constexpr (std::is_same_v<T, GazeTargetPayload>) {
          j["point"] = v.point;
          j["goal"] = v.goal;
          j["selection"] = v.selection;
          j["lost_target"] = v.lost_target;
        } else if constexpr (std::is_same_v<T, RenderSpecPayload>) {
          j = v.spec;
        } else if constexpr (std::is_same_v<T, TrialEventPayload>) {
          j = v.record;
        } else if constexpr (std::is_same_v<T, PressPayload>) {
          j["participant"] = v.participant;
          put_optional(j, "client_t_ms", v.client_t_ms);
        } else if constexpr (std::is_same_v<T, ExperimenterControlPayload>) {
          j["action"] = to_string(v.action);
        } else if constexpr (std::is_same_v<T, ClockSyncPayload>) {
          put_optional(j, "client_t_ms", v.client_t_ms);
          put_optional(j, "server_t_ms", v.server_t_ms);
          put_optional(j, "rtt_ms", v.rtt_ms);
        } else if constexpr (std::is_same_v<T, ErrorPayload>) {
          j["code"] = v.code;
          j["message"] = v.message;
        }
      },
      p);
  return j;
}

Payload parse_payload(MessageType type, const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("payload must be an object");
  switch (type) {
    case MessageType::hello: {
      HelloPayload p;
      p.role = parse_client_role(j.at("role").get<std::string>());
      p.participant = get_optional<int>(j, "participant");
      p.session_id = get_optional<std::string>(j, "session_id");
      if (p.role == ClientRole::participant && !p.participant) {
        throw std::invalid_argument("participant role needs a participant id");
      }
      return p;
    }
    case MessageType::scene_update: {
      SceneUpdatePayload p;
      p.frame_t_ms = j.value("frame_t_ms", std::int64_t{0});
      for (const auto& f : j.at("faces")) {
        FaceWire w{f.at("center").get<Vec2>(), f.at("width_px").get<double>(),
                   f.at("height_px").get<double>()};
        if (!(w.width_px > 0.0) || !(w.height_px > 0.0)) {
          throw std::invalid_argument("face size must be positive");
        }
        p.faces.push_back(w);
      }
      return p;
    }
    case MessageType::gaze_target:
      return GazeTargetPayload{j.at("point").get<Vec2>(), j.at("goal").get<Vec2>(),
                               j.at("selection").get<TargetSelection>(),
                               j.value("lost_target", false)};
    case MessageType::render_spec:
      return RenderSpecPayload{j.get<RenderSpec>()};
    case MessageType::trial_event:
      return TrialEventPayload{j.get<LogRecord>()};
    case MessageType::press:
      return PressPayload{j.at("participant").get<int>(),
                          get_optional<std::int64_t>(j, "client_t_ms")};
    case MessageType::experimenter_control:
      return ExperimenterControlPayload{
          parse_control_action(j.at("action").get<std::string>())};
    case MessageType::clock_sync:
      return ClockSyncPayload{get_optional<std::int64_t>(j, "client_t_ms"),
                              get_optional<std::int64_t>(j, "server_t_ms"),
                              get_optional<std::int64_t>(j, "rtt_ms")};
    case MessageType::error:
      return ErrorPayload{j.at("code").get<std::string>(),
                          j.value("message", std::string{})};
  }
  throw std::invalid_argument("unknown message type");
}

}  // namespace

std::string_view to_string(MessageType t) {
  return kTypeNames.at(static_cast<std::size_t>(t));
}

std::optional<MessageType> parse_message_type(std::string_view s) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == s) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

std::string_view to_string(ClientRole r) {
  switch (r) {
    case ClientRole::display:
      return "display";
    case ClientRole::participant:
      return "participant";
    case ClientRole::experimenter:
      return "experimenter";
    case ClientRole::observer:
      return "observer";
  }
  throw std::invalid_argument("unknown role");
}

ClientRole parse_client_role(std::string_view s) {
  for (auto r : {ClientRole::display, ClientRole::participant, ClientRole::experimenter,
                 ClientRole::observer}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown role: " + std::string(s));
}

std::string_view to_string(ControlAction a) {
  switch (a) {
    case ControlAction::cue:
      return "cue";
    case ControlAction::word_ok:
      return "word_ok";
    case ControlAction::word_fail:
      return "word_fail";
    case ControlAction::tick:
      return "tick";
    case ControlAction::status:
      return "status";
  }
  throw std::invalid_argument("unknown control action");
}

ControlAction parse_control_action(std::string_view s) {
  for (auto a : {ControlAction::cue, ControlAction::word_ok, ControlAction::word_fail,
                 ControlAction::tick, ControlAction::status}) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown control action: " + std::string(s));
}

MessageType payload_type(const Payload& p) { return static_cast<MessageType>(p.index()); }

MessageType Message::type() const { return payload_type(payload); }

Json to_json_message(const Message& m) {
  return Json{{"type", to_string(m.type())}, {"t_ms", m.t_ms}, {"payload", payload_json(m.payload)}};
}

std::string encode_message(const Message& m) { return dump_line(to_json_message(m)); }

Message message_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("message must be a JSON object");
  const auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw std::invalid_argument("message needs a string type");
  }
  const auto type = parse_message_type(type_it->get<std::string>());
  if (!type) throw std::invalid_argument("unknown message type: " + type_it->get<std::string>());
  Message m;
  m.t_ms = j.value("t_ms", std::int64_t{0});
  const auto payload = j.find("payload");
  m.payload = parse_payload(*type, payload == j.end() ? Json::object() : *payload);
  return m;
}

Message decode_message(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
  try {
    return message_from_json(j);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed payload: ") + e.what());
  }
}

Message make_error(std::int64_t t_ms, std::string code, std::string message) {
  return Message{t_ms, ErrorPayload{std::move(code), std::move(message)}};
}

}  // namespace mirroreyes
