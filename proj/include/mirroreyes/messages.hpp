#pragma once

// Wire protocol: one JSON object per message,
//   {"type": "...", "t_ms": <int>, "payload": {...}}

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirroreyes/json_io.hpp"

namespace mirroreyes {

enum class MessageType {
  hello,
  scene_update,
  gaze_target,
  render_spec,
  trial_event,
  press,
  experimenter_control,
  clock_sync,
  error,
};

std::string_view to_string(MessageType t);
std::optional<MessageType> parse_message_type(std::string_view s);

enum class ClientRole { display, participant, experimenter, observer };
std::string_view to_string(ClientRole r);
ClientRole parse_client_role(std::string_view s);

struct HelloPayload {
  ClientRole role = ClientRole::display;
  std::optional<int> participant;
  /// Set on the server's acknowledgement.
  std::optional<std::string> session_id;
  friend bool operator==(const HelloPayload&, const HelloPayload&) = default;
};

struct FaceWire {
  Vec2 center;
  double width_px = 0.0;
  double height_px = 0.0;
  friend bool operator==(const FaceWire&, const FaceWire&) = default;
};

struct SceneUpdatePayload {
  std::int64_t frame_t_ms = 0;
  std::vector<FaceWire> faces;
  friend bool operator==(const SceneUpdatePayload&, const SceneUpdatePayload&) = default;
};

struct GazeTargetPayload {
  Vec2 point;
  Vec2 goal;
  TargetSelection selection;
  bool lost_target = false;
  friend bool operator==(const GazeTargetPayload&, const GazeTargetPayload&) = default;
};

struct RenderSpecPayload {
  RenderSpec spec;
  friend bool operator==(const RenderSpecPayload&, const RenderSpecPayload&) = default;
};

struct TrialEventPayload {
  LogRecord record;
  friend bool operator==(const TrialEventPayload&, const TrialEventPayload&) = default;
};

struct PressPayload {
  int participant = 0;
  /// Sender's clock; informational, the server stamps receipt time.
  std::optional<std::int64_t> client_t_ms;
  friend bool operator==(const PressPayload&, const PressPayload&) = default;
};

enum class ControlAction { cue, word_ok, word_fail, tick, status };
std::string_view to_string(ControlAction a);
ControlAction parse_control_action(std::string_view s);

struct ExperimenterControlPayload {
  ControlAction action = ControlAction::status;
  friend bool operator==(const ExperimenterControlPayload&,
                         const ExperimenterControlPayload&) = default;
};

/// A client sends client_t_ms; the server answers with both clocks. The
/// server may also ping with server_t_ms, which clients echo back unchanged
/// so the server can measure the round trip.
struct ClockSyncPayload {
  std::optional<std::int64_t> client_t_ms;
  std::optional<std::int64_t> server_t_ms;
  std::optional<std::int64_t> rtt_ms;
  friend bool operator==(const ClockSyncPayload&, const ClockSyncPayload&) = default;
};

struct ErrorPayload {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorPayload&, const ErrorPayload&) = default;
};

using Payload = std::variant<HelloPayload, SceneUpdatePayload, GazeTargetPayload,
                             RenderSpecPayload, TrialEventPayload, PressPayload,
                             ExperimenterControlPayload, ClockSyncPayload, ErrorPayload>;

struct Message {
  std::int64_t t_ms = 0;
  Payload payload;

  MessageType type() const;
  friend bool operator==(const Message&, const Message&) = default;
};

/// Message type of a payload alternative.
MessageType payload_type(const Payload& p);

Json to_json_message(const Message& m);
std::string encode_message(const Message& m);

/// Throws std::invalid_argument for unknown types or malformed payloads.
Message decode_message(std::string_view text);
Message message_from_json(const Json& j);

Message make_error(std::int64_t t_ms, std::string code, std::string message);

}  // namespace mirroreyes
