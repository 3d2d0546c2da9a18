#include "mirroreyes/session.hpp"

#include <algorithm>
#include <stdexcept>

namespace mirroreyes {

namespace {

Message msg(std::int64_t t, Payload p) { return Message{t, std::move(p)}; }

}  // namespace

Session::Session(SessionConfig config, SessionOptions options, std::ostream* log,
                 std::int64_t start_ms)
    : config_((config.validate(), std::move(config))),
      options_(std::move(options)),
      scene_(default_scene(config_)),
      tracker_(config_.camera, config_.tracker),
      engine_(plan_experiment(config_.seed, config_.roster, config_.plan), config_.engine),
      gaze_(GazeState::at_rest(TargetPoint::clamped(config_.camera.width_px / 2,
                                                    config_.camera.height_px / 2,
                                                    config_.camera),
                               start_ms, config_.gaze_shift_ms)),
      last_t_(start_ms) {
  spec_ = spec_for(gaze_.current_point, current_condition(), {});
  if (log) {
    writer_.emplace(*log);
    writer_->write_header(Json{{"session", config_}}, start_ms);
  }
}

void Session::connect(ConnectionId id) { clients_.try_emplace(id); }

void Session::disconnect(ConnectionId id) { clients_.erase(id); }

const ClientState* Session::client(ConnectionId id) const {
  const auto it = clients_.find(id);
  return it == clients_.end() ? nullptr : &it->second;
}

std::int64_t Session::stamp(std::int64_t now_ms) {
  last_t_ = std::max(last_t_, now_ms);
  return last_t_;
}

Outbound Session::error_to(ConnectionId id, std::int64_t t, std::string code,
                           std::string message) const {
  return {id, make_error(t, std::move(code), std::move(message))};
}

std::vector<Outbound> Session::on_text(ConnectionId from, std::string_view text,
                                       std::int64_t now_ms) {
  const std::int64_t t = stamp(now_ms);
  Message m;
  try {
    m = decode_message(text);
  } catch (const std::exception& e) {
    return {error_to(from, t, "malformed", e.what())};
  }
  return on_message(from, m, t);
}

std::vector<Outbound> Session::on_message(ConnectionId from, const Message& message,
                                          std::int64_t now_ms) {
  const std::int64_t t = stamp(now_ms);
  connect(from);
  ClientState& client = clients_.at(from);
  std::vector<Outbound> out;

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, HelloPayload>) {
          if (client.role) {
            out.push_back(error_to(from, t, "already_registered", "hello sent twice"));
            return;
          }
          if (p.role == ClientRole::participant) {
            if (!p.participant || std::find(config_.roster.begin(), config_.roster.end(),
                                            *p.participant) == config_.roster.end()) {
              out.push_back(error_to(from, t, "unknown_participant",
                                     "participant is not on the roster"));
              return;
            }
            for (const auto& [id, other] : clients_) {
              if (id != from && other.participant == p.participant) {
                out.push_back(error_to(from, t, "participant_taken",
                                       "participant " + std::to_string(*p.participant) +
                                           " is already claimed"));
                return;
              }
            }
            client.participant = p.participant;
          } else if (p.role == ClientRole::display) {
            for (const auto& [id, other] : clients_) {
              if (id != from && other.role == ClientRole::display) {
                out.push_back(error_to(from, t, "display_taken",
                                       "a display is already connected"));
                return;
              }
            }
          }
          client.role = p.role;
          out.push_back({from, msg(t, HelloPayload{p.role, client.participant,
                                                   options_.session_id})});
          out.push_back({from, msg(t, RenderSpecPayload{spec_})});
        } else if constexpr (std::is_same_v<P, SceneUpdatePayload>) {
          SceneFrame frame;
          frame.timestamp_ms = p.frame_t_ms;
          frame.source = FrameSource::external;
          for (const auto& f : p.faces) {
            frame.observations.push_back(FaceObservation{
                0, TargetPoint::clamped(f.center, config_.camera), f.width_px, f.height_px,
                p.frame_t_ms});
          }
          if (tracker_.ingest_frame(frame).status == IngestStatus::stale_frame) {
            out.push_back(error_to(from, t, "stale_frame",
                                   "frame_t_ms is older than the last frame"));
          }
        } else if constexpr (std::is_same_v<P, PressPayload>) {
          if (client.role != ClientRole::participant || client.participant != p.participant) {
            out.push_back(error_to(from, t, "not_claimed",
                                   "press for a participant this connection does not hold"));
            return;
          }
          // Receipt time minus the one-way delay, never before the last event.
          const std::int64_t at = std::max(last_event_t(), t - client.rtt_ms / 2);
          apply({EventType::press, at, p.participant}, out);
        } else if constexpr (std::is_same_v<P, ExperimenterControlPayload>) {
          if (client.role != ClientRole::experimenter) {
            out.push_back(error_to(from, t, "forbidden", "experimenter role required"));
            return;
          }
          switch (p.action) {
            case ControlAction::cue:
              apply({EventType::cue_onset, t, 0}, out);
              break;
            case ControlAction::word_ok:
              apply({EventType::word_ok, t, 0}, out);
              break;
            case ControlAction::word_fail:
              apply({EventType::word_fail, t, 0}, out);
              break;
            case ControlAction::tick:
              apply({EventType::tick, t, 0}, out);
              break;
            case ControlAction::status:
              out.push_back({from, msg(t, GazeTargetPayload{gaze_.current_point.vec(),
                                                            gaze_.goal_point.vec(),
                                                            selection_, lost_target_})});
              out.push_back({from, msg(t, RenderSpecPayload{spec_})});
              break;
          }
        } else if constexpr (std::is_same_v<P, ClockSyncPayload>) {
          if (p.server_t_ms && !p.client_t_ms) {
            // Echo of our own ping.
            if (*p.server_t_ms <= t) client.rtt_ms = t - *p.server_t_ms;
          } else {
            out.push_back({from, msg(t, ClockSyncPayload{p.client_t_ms, t, client.rtt_ms})});
          }
        } else {
          out.push_back(error_to(from, t, "unsupported",
                                 std::string(to_string(payload_type(p))) +
                                     " is server-to-client only"));
        }
      },
      message.payload);
  return out;
}

std::int64_t Session::last_event_t() const { return engine_last_t_; }

void Session::apply(const ProtocolEvent& event, std::vector<Outbound>& out) {
  const auto records = engine_.on_event(event);
  if (records.empty()) return;
  engine_last_t_ = std::max(engine_last_t_, event.t_ms);
  if (writer_) writer_->write(records);
  for (const auto& r : records) {
    out.push_back({std::nullopt, msg(r.t_ms, TrialEventPayload{r})});
  }
}

std::vector<Outbound> Session::tick(std::int64_t now_ms) {
  const std::int64_t t = stamp(now_ms);
  std::vector<Outbound> out;
  if (options_.synthetic_scene) {
    tracker_.ingest_frame(synthetic_scene(scene_, config_.camera, t));
  }
  apply({EventType::tick, t, 0}, out);

  if (engine_.ready_for_cue()) {
    if (!prepared_since_) prepared_since_ = t;
    if (options_.auto_cue_ms > 0 && t - *prepared_since_ >= options_.auto_cue_ms) {
      apply({EventType::cue_onset, t, 0}, out);
    }
  }
  if (!engine_.ready_for_cue()) prepared_since_.reset();

  refresh_view(t, out);
  for (auto& [id, c] : clients_) {
    if (options_.clock_ping_ms > 0 &&
        (!c.last_ping_ms || t - *c.last_ping_ms >= options_.clock_ping_ms)) {
      c.last_ping_ms = t;
      out.push_back({id, msg(t, ClockSyncPayload{std::nullopt, t, c.rtt_ms})});
    }
  }
  return out;
}

std::optional<int> Session::track_of(int participant) const {
  const auto it = std::find(config_.roster.begin(), config_.roster.end(), participant);
  if (it == config_.roster.end()) return std::nullopt;
  const auto order = tracker_.left_to_right();
  const auto i = static_cast<std::size_t>(it - config_.roster.begin());
  if (i >= order.size()) return std::nullopt;
  return order[i];
}

std::optional<TargetSelection> Session::to_tracks(const TargetSelection& s) const {
  switch (s.kind) {
    case TargetSelection::Kind::none:
      return s;
    case TargetSelection::Kind::participant:
      if (const auto a = track_of(s.participant)) return TargetSelection::of(*a);
      return std::nullopt;
    case TargetSelection::Kind::between: {
      const auto a = track_of(s.between_a);
      const auto b = track_of(s.between_b);
      if (a && b) return TargetSelection::between(*a, *b);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

DepthEstimate Session::depth_for(const TargetSelection& tracks) const {
  std::vector<const Track*> faces;
  if (tracks.kind == TargetSelection::Kind::participant) {
    faces.push_back(tracker_.find(tracks.participant));
  } else if (tracks.kind == TargetSelection::Kind::between) {
    faces.push_back(tracker_.find(tracks.between_a));
    faces.push_back(tracker_.find(tracks.between_b));
  }
  if (faces.empty()) return {};
  double sum = 0.0;
  for (const Track* f : faces) {
    if (!f) return {};
    const DepthEstimate d = estimate_depth(f->height_px, config_.face_height_m, config_.camera);
    if (!d.valid) return {};
    sum += d.distance_m;
  }
  return {sum / static_cast<double>(faces.size()), true};
}

DisplayCondition Session::current_condition() const {
  const auto snap = engine_.snapshot();
  if (snap.active) return snap.active->trial.condition;
  if (snap.block_condition) return *snap.block_condition;
  return DisplayCondition::mirror_eye;
}

RenderSpec Session::spec_for(const TargetPoint& point, DisplayCondition condition,
                             const DepthEstimate& depth) const {
  const auto placed = place_eyes(point, config_.camera, config_.left_eye, config_.right_eye,
                                 depth, config_.vergence_gain_m);
  return build_render_spec(condition, {config_.left_eye, placed.left},
                           {config_.right_eye, placed.right}, "camera", config_.style);
}

void Session::refresh_view(std::int64_t now, std::vector<Outbound>& out) {
  const auto snap = engine_.snapshot();
  TargetSelection wanted;
  if (snap.active) {
    if (snap.active->phase == Phase::await_button) {
      wanted = snap.active->trial.selection;
    } else if (snap.active->phase == Phase::await_word && snap.active->scoring_press) {
      wanted = TargetSelection::of(snap.active->scoring_press->participant);
    }
  }
  selection_ = wanted;
  const auto tracks = to_tracks(wanted);
  // An unmapped participant keeps the gaze where it is and reports the loss.
  const TargetSelection sel = tracks.value_or(wanted);
  const GazeUpdate g = gaze_update(gaze_, tracks ? sel : TargetSelection::of(-1),
                                   tracker_.tracks(), now);
  gaze_ = g.state;
  lost_target_ = g.lost_target;
  spec_ = spec_for(gaze_.current_point, current_condition(),
                   tracks ? depth_for(*tracks) : DepthEstimate{});
  out.push_back({std::nullopt, msg(now, GazeTargetPayload{gaze_.current_point.vec(),
                                                          gaze_.goal_point.vec(),
                                                          selection_, lost_target_})});
  out.push_back({std::nullopt, msg(now, RenderSpecPayload{spec_})});
}

}  // namespace mirroreyes
