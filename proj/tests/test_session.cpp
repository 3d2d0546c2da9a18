#include <doctest.h>

#include <sstream>

#include "mirroreyes/session.hpp"
#include "mirroreyes/simulation.hpp"

using namespace mirroreyes;

namespace {

constexpr ConnectionId kDisplay = 1, kP1 = 2, kP2 = 3, kP3 = 4, kLab = 5;

Message hello(ClientRole role, std::optional<int> participant = std::nullopt) {
  return Message{0, HelloPayload{role, participant, std::nullopt}};
}

Message control(ControlAction a) { return Message{0, ExperimenterControlPayload{a}}; }

// Three faces 48x64 px, left to right, at a fixed row.
Message scene(std::int64_t frame_t, double y = 360.0) {
  SceneUpdatePayload p;
  p.frame_t_ms = frame_t;
  p.faces = {{{960, y}, 48, 64}, {{320, y}, 48, 64}, {{640, y}, 48, 64}};
  return Message{frame_t, p};
}

template <typename T>
std::vector<T> payloads(const std::vector<Outbound>& out, std::optional<ConnectionId> to = {}) {
  std::vector<T> v;
  for (const auto& o : out) {
    if (o.to != to) continue;
    if (const auto* p = std::get_if<T>(&o.message.payload)) v.push_back(*p);
  }
  return v;
}

std::string error_code(const std::vector<Outbound>& out, ConnectionId to) {
  const auto e = payloads<ErrorPayload>(out, to);
  return e.empty() ? "" : e.front().code;
}

struct Lab {
  std::ostringstream log;
  Session s{SessionConfig{}, {}, &log, 0};

  Lab() {
    s.on_message(kDisplay, hello(ClientRole::display), 0);
    s.on_message(kP1, hello(ClientRole::participant, 1), 0);
    s.on_message(kP2, hello(ClientRole::participant, 2), 0);
    s.on_message(kP3, hello(ClientRole::participant, 3), 0);
    s.on_message(kLab, hello(ClientRole::experimenter), 0);
  }

  int target() const { return s.engine().snapshot().active->trial.selection.participant; }
};

}  // namespace

TEST_CASE("hello is acknowledged with the assigned role and the current spec") {
  Session s(SessionConfig{});
  const auto out = s.on_message(kP1, hello(ClientRole::participant, 1), 5);
  const auto ack = payloads<HelloPayload>(out, kP1);
  REQUIRE(ack.size() == 1);
  CHECK(ack[0].role == ClientRole::participant);
  CHECK(ack[0].participant == 1);
  CHECK(ack[0].session_id == "session");
  REQUIRE(payloads<RenderSpecPayload>(out, kP1).size() == 1);
  CHECK(payloads<RenderSpecPayload>(out, kP1)[0].spec == s.render_spec());
  CHECK(s.client(kP1)->participant == 1);
}

TEST_CASE("claims are exclusive until the holder leaves") {
  Session s(SessionConfig{});
  s.on_message(kP1, hello(ClientRole::participant, 1), 0);
  CHECK(error_code(s.on_message(kP2, hello(ClientRole::participant, 1), 1), kP2) ==
        "participant_taken");
  CHECK(error_code(s.on_message(kP3, hello(ClientRole::participant, 9), 1), kP3) ==
        "unknown_participant");
  CHECK(error_code(s.on_message(kP1, hello(ClientRole::participant, 2), 1), kP1) ==
        "already_registered");
  s.on_message(kDisplay, hello(ClientRole::display), 1);
  CHECK(error_code(s.on_message(kLab, hello(ClientRole::display), 1), kLab) == "display_taken");

  s.disconnect(kP1);
  const auto out = s.on_message(kP2, hello(ClientRole::participant, 1), 2);
  CHECK(payloads<HelloPayload>(out, kP2).size() == 1);
}

TEST_CASE("malformed input gets an error and the connection keeps working") {
  Session s(SessionConfig{});
  auto out = s.on_text(kP1, "{\"type\":", 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0].to == kP1);
  CHECK(error_code(out, kP1) == "malformed");
  out = s.on_text(kP1, R"({"type":"warp","t_ms":1,"payload":{}})", 2);
  CHECK(error_code(out, kP1) == "malformed");
  out = s.on_text(kP1, R"({"type":"hello","t_ms":3,"payload":{"role":"participant","participant":1}})", 3);
  CHECK(payloads<HelloPayload>(out, kP1).size() == 1);
}

TEST_CASE("role checks") {
  Lab lab;
  CHECK(error_code(lab.s.on_message(kP1, control(ControlAction::cue), 10), kP1) == "forbidden");
  CHECK(error_code(lab.s.on_message(kP1, Message{0, PressPayload{2, {}}}, 10), kP1) ==
        "not_claimed");
  CHECK(error_code(lab.s.on_message(kDisplay, Message{0, PressPayload{1, {}}}, 10), kDisplay) ==
        "not_claimed");
  CHECK(error_code(lab.s.on_message(kP1, Message{0, GazeTargetPayload{}}, 10), kP1) ==
        "unsupported");
  lab.s.on_message(kDisplay, scene(100), 100);
  CHECK(error_code(lab.s.on_message(kDisplay, scene(50), 110), kDisplay) == "stale_frame");
}

TEST_CASE("render spec during an active trial equals the direct geometry") {
  Lab lab;
  lab.s.on_message(kDisplay, scene(0), 0);
  lab.s.on_message(kLab, control(ControlAction::cue), 10);
  const int target = lab.target();
  std::vector<Outbound> out;
  for (std::int64_t t = 40; t <= 400; t += 33) {
    lab.s.on_message(kDisplay, scene(t), t);
    out = lab.s.tick(t);
  }
  // Roster order is left-to-right order: P1 at x=320, P2 at 640, P3 at 960.
  const double x = 320.0 * target;
  const CameraIntrinsics cam = lab.s.config().camera;
  const TargetPoint point = TargetPoint::clamped(x, 360.0, cam);
  const DepthEstimate depth = estimate_depth(64.0, lab.s.config().face_height_m, cam);
  const auto placed = place_eyes(point, cam, lab.s.config().left_eye, lab.s.config().right_eye,
                                 depth, lab.s.config().vergence_gain_m);
  const auto cond = lab.s.engine().snapshot().active->trial.condition;
  const RenderSpec want = build_render_spec(cond, {lab.s.config().left_eye, placed.left},
                                            {lab.s.config().right_eye, placed.right}, "camera",
                                            lab.s.config().style);

  const auto specs = payloads<RenderSpecPayload>(out);
  REQUIRE(specs.size() == 1);
  CHECK(specs[0].spec == want);
  CHECK(lab.s.render_spec() == lab.s.spec_for(point, cond, depth));
  const auto gaze = payloads<GazeTargetPayload>(out);
  REQUIRE(gaze.size() == 1);
  CHECK(gaze[0].point.x == doctest::Approx(x));
  CHECK(gaze[0].selection == TargetSelection::of(target));
  CHECK_FALSE(gaze[0].lost_target);
}

TEST_CASE("a press during await_button broadcasts a classified trial event") {
  Lab lab;
  lab.s.on_message(kDisplay, scene(0), 0);
  lab.s.on_message(kLab, control(ControlAction::cue), 1000);
  const int target = lab.target();
  const ConnectionId conn = kP1 + static_cast<ConnectionId>(target - 1);

  auto out = lab.s.on_message(conn, Message{0, PressPayload{target, {}}}, 2200);
  auto events = payloads<TrialEventPayload>(out);
  REQUIRE(events.size() == 1);
  CHECK(events[0].record.type == "press");
  CHECK(std::get<std::string>(events[0].record.label) == "scoring");
  CHECK(events[0].record.rt_ms == 1200);

  out = lab.s.on_message(kLab, control(ControlAction::word_ok), 4000);
  events = payloads<TrialEventPayload>(out);
  const auto resolved = std::find_if(events.begin(), events.end(), [](const auto& e) {
    return e.record.type == "trial_resolved";
  });
  REQUIRE(resolved != events.end());
  CHECK(std::get<std::map<int, Label>>(resolved->record.label).at(target) == Label::tp);

  std::istringstream in(lab.log.str());
  const auto log = read_trial_log(in);
  CHECK(log.config);
  CHECK(log.lines.size() >= 5);
  const auto r = replay(log);
  CHECK(r.ok());
  CHECK_FALSE(r.finished);
}

TEST_CASE("press times are corrected by half the measured round trip") {
  Lab lab;
  const ConnectionId conn = kP1;
  auto out = lab.s.tick(0);
  const auto pings = payloads<ClockSyncPayload>(out, conn);
  REQUIRE(pings.size() == 1);
  REQUIRE(pings[0].server_t_ms == 0);
  lab.s.on_message(conn, Message{0, ClockSyncPayload{std::nullopt, 0, std::nullopt}}, 80);
  CHECK(lab.s.client(conn)->rtt_ms == 80);

  out = lab.s.on_message(conn, Message{0, ClockSyncPayload{12345, std::nullopt, std::nullopt}}, 90);
  const auto reply = payloads<ClockSyncPayload>(out, conn);
  REQUIRE(reply.size() == 1);
  CHECK(reply[0].client_t_ms == 12345);
  CHECK(reply[0].server_t_ms == 90);
  CHECK(reply[0].rtt_ms == 80);

  lab.s.on_message(kLab, control(ControlAction::cue), 1000);
  out = lab.s.on_message(conn, Message{0, PressPayload{1, {}}}, 1500);
  const auto events = payloads<TrialEventPayload>(out);
  REQUIRE_FALSE(events.empty());
  CHECK(events[0].record.t_ms == 1460);

  // Never earlier than the cue it answers.
  Lab early;
  early.s.on_message(kP2, Message{0, ClockSyncPayload{std::nullopt, 0, std::nullopt}}, 900);
  early.s.on_message(kLab, control(ControlAction::cue), 1000);
  out = early.s.on_message(kP2, Message{0, PressPayload{2, {}}}, 1100);
  CHECK(payloads<TrialEventPayload>(out)[0].record.t_ms == 1000);
}

TEST_CASE("session timestamps never go backwards") {
  Lab lab;
  std::int64_t last = 0;
  for (std::int64_t now : {100, 90, 200, 150, 300}) {
    for (const auto& o : lab.s.tick(now)) {
      CHECK(o.message.t_ms >= last);
      last = std::max(last, o.message.t_ms);
    }
  }
  CHECK(last == 300);
}

TEST_CASE("a missing target face keeps the gaze and reports the loss") {
  Lab lab;
  lab.s.on_message(kLab, control(ControlAction::cue), 10);
  const auto out = lab.s.tick(50);
  const auto gaze = payloads<GazeTargetPayload>(out);
  REQUIRE(gaze.size() == 1);
  CHECK(gaze[0].lost_target);
  CHECK(gaze[0].point.x == doctest::Approx(640));
}

TEST_CASE("auto cue and the synthetic scene run a session without clients") {
  SessionOptions options;
  options.auto_cue_ms = 500;
  options.synthetic_scene = true;
  Session s(SessionConfig{}, options);
  int cues = 0;
  for (std::int64_t t = 0; t < 20'000; t += 33) {
    for (const auto& o : s.tick(t)) {
      if (const auto* e = std::get_if<TrialEventPayload>(&o.message.payload)) {
        cues += e->record.type == "cue_onset";
      }
    }
  }
  CHECK(cues >= 2);
  CHECK(s.tracker().tracks().size() == 3);
}
