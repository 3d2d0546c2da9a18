#pragma once

// Live session: the single owner of tracker, engine and gaze state.
//
// The transport hands every decoded message and every display tick to one
// Session on one thread, and ships back whatever it returns. Time is passed
// in explicitly so tests can drive a session on a virtual clock.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mirroreyes/messages.hpp"
#include "mirroreyes/session_config.hpp"
#include "mirroreyes/trial_log.hpp"

namespace mirroreyes {

using ConnectionId = std::uint64_t;

struct Outbound {
  /// Unset means broadcast to every connection.
  std::optional<ConnectionId> to;
  Message message;
};

struct SessionOptions {
  /// Cue automatically this long after a trial is prepared; 0 leaves cueing
  /// to the experimenter.
  std::int64_t auto_cue_ms = 0;
  /// Feed the configured standing group as the scene on every tick.
  bool synthetic_scene = false;
  std::int64_t clock_ping_ms = 1000;
  std::string session_id = "session";
};

struct ClientState {
  std::optional<ClientRole> role;
  std::optional<int> participant;
  std::int64_t rtt_ms = 0;
  std::optional<std::int64_t> last_ping_ms;
};

class Session {
public:
  /// Writes the log header at `start_ms` when `log` is given.
  Session(SessionConfig config, SessionOptions options = {},
          std::ostream* log = nullptr, std::int64_t start_ms = 0);

  void connect(ConnectionId id);
  /// Frees the participant or display claim held by `id`.
  void disconnect(ConnectionId id);

  /// Decodes and handles one text frame. Malformed input yields an error
  /// reply to the sender only.
  std::vector<Outbound> on_text(ConnectionId from, std::string_view text,
                                std::int64_t now_ms);
  std::vector<Outbound> on_message(ConnectionId from, const Message& message,
                                   std::int64_t now_ms);

  /// One display tick: deadlines and caps, auto cue, gaze, then gaze_target
  /// and render_spec broadcasts.
  std::vector<Outbound> tick(std::int64_t now_ms);

  const SessionConfig& config() const { return config_; }
  const ProtocolEngine& engine() const { return engine_; }
  const FaceTracker& tracker() const { return tracker_; }
  const GazeState& gaze() const { return gaze_; }
  /// Selection in participant ids that the gaze currently serves.
  const TargetSelection& participant_selection() const { return selection_; }
  const RenderSpec& render_spec() const { return spec_; }
  const ClientState* client(ConnectionId id) const;

  /// Track currently standing in for `participant`: roster position i maps
  /// to the i-th live track from the left.
  std::optional<int> track_of(int participant) const;

  /// Render spec for a gaze point under the session's geometry.
  RenderSpec spec_for(const TargetPoint& point, DisplayCondition condition,
                      const DepthEstimate& depth) const;

private:
  std::int64_t stamp(std::int64_t now_ms);
  std::int64_t last_event_t() const;
  void apply(const ProtocolEvent& event, std::vector<Outbound>& out);
  void refresh_view(std::int64_t now, std::vector<Outbound>& out);
  std::optional<TargetSelection> to_tracks(const TargetSelection& s) const;
  DepthEstimate depth_for(const TargetSelection& tracks) const;
  DisplayCondition current_condition() const;
  Outbound error_to(ConnectionId id, std::int64_t t, std::string code,
                    std::string message) const;

  SessionConfig config_;
  SessionOptions options_;
  SyntheticSceneConfig scene_;
  FaceTracker tracker_;
  ProtocolEngine engine_;
  GazeState gaze_;
  TargetSelection selection_;
  bool lost_target_ = false;
  RenderSpec spec_;
  std::optional<TrialLogWriter> writer_;
  std::map<ConnectionId, ClientState> clients_;
  std::int64_t last_t_ = 0;
  std::int64_t engine_last_t_ = 0;
  std::optional<std::int64_t> prepared_since_;
};

}  // namespace mirroreyes
