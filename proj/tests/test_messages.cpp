#include <doctest.h>

#include <set>

#include "mirroreyes/compositor.hpp"
#include "mirroreyes/messages.hpp"
#include "mirroreyes/rng.hpp"

using namespace mirroreyes;

namespace {

int small(Rng& rng) { return 1 + static_cast<int>(rng.index(9)); }

TargetSelection random_selection(Rng& rng) {
  switch (rng.index(3)) {
    case 0:
      return TargetSelection::of(small(rng));
    case 1:
      return TargetSelection::between(small(rng), small(rng) + 10);
    default:
      return TargetSelection::none();
  }
}

LogRecord random_record(Rng& rng) {
  LogRecord r;
  r.type = rng.index(2) ? "trial_resolved" : "press";
  r.t_ms = static_cast<std::int64_t>(rng.index(1'000'000));
  if (rng.index(2)) r.trial_id = small(rng);
  if (rng.index(2)) r.block_id = small(rng);
  if (rng.index(2)) r.condition = kAllConditions[rng.index(3)];
  if (rng.index(2)) r.selection = random_selection(rng);
  if (rng.index(2)) r.participant = small(rng);
  switch (rng.index(3)) {
    case 0:
      r.label = std::string("scoring");
      break;
    case 1:
      r.label = std::map<int, Label>{{1, Label::tp}, {2, Label::fn}, {3, Label::preempted}};
      break;
    default:
      break;
  }
  if (rng.index(2)) r.rt_ms = static_cast<std::int64_t>(rng.index(3000));
  if (rng.index(2)) r.balancing = BalancingAction{BalancingAction::Kind::swap, {small(rng), small(rng)}};
  return r;
}

RenderSpec random_spec(Rng& rng) {
  const CameraIntrinsics cam{1280.0, 720.0, 640.0};
  const auto t = TargetPoint::clamped({rng.uniform(-50, 1330), rng.uniform(-50, 770)}, cam);
  EyeViewport l, r;
  r.side = EyeSide::right;
  l.offset = {rng.uniform(-0.1, 0.1), 0.0};
  return build_render_spec(kAllConditions[rng.index(3)], {l, place_eye(t, cam, l)},
                           {r, place_eye(t, cam, r)}, "cam", {});
}

template <typename T>
std::optional<T> maybe(Rng& rng, T v) {
  return rng.index(2) ? std::optional<T>(v) : std::nullopt;
}

Payload random_payload(MessageType type, Rng& rng) {
  switch (type) {
    case MessageType::hello: {
      HelloPayload p;
      p.role = static_cast<ClientRole>(rng.index(4));
      if (p.role == ClientRole::participant || rng.index(2)) p.participant = small(rng);
      p.session_id = maybe<std::string>(rng, "s-" + std::to_string(rng.index(100)));
      return p;
    }
    case MessageType::scene_update: {
      SceneUpdatePayload p;
      p.frame_t_ms = static_cast<std::int64_t>(rng.index(100000));
      for (std::size_t i = rng.index(5); i > 0; --i) {
        p.faces.push_back({{rng.uniform(0, 1280), rng.uniform(0, 720)}, rng.uniform(1, 90),
                           rng.uniform(1, 120)});
      }
      return p;
    }
    case MessageType::gaze_target:
      return GazeTargetPayload{{rng.uniform(0, 1280), rng.uniform(0, 720)},
                               {rng.uniform(0, 1280), rng.uniform(0, 720)},
                               random_selection(rng), rng.index(2) == 1};
    case MessageType::render_spec:
      return RenderSpecPayload{random_spec(rng)};
    case MessageType::trial_event:
      return TrialEventPayload{random_record(rng)};
    case MessageType::press:
      return PressPayload{small(rng), maybe<std::int64_t>(rng, rng.index(99999))};
    case MessageType::experimenter_control:
      return ExperimenterControlPayload{static_cast<ControlAction>(rng.index(5))};
    case MessageType::clock_sync:
      return ClockSyncPayload{maybe<std::int64_t>(rng, rng.index(99999)),
                              maybe<std::int64_t>(rng, rng.index(99999)),
                              maybe<std::int64_t>(rng, rng.index(300))};
    case MessageType::error:
      return ErrorPayload{"code" + std::to_string(rng.index(9)), "detail \"quoted\"\n"};
  }
  throw std::logic_error("type");
}

}  // namespace

TEST_CASE("every message type round trips to an equal value") {
  Rng rng(2024);
  std::set<MessageType> seen;
  for (int i = 0; i < 200; ++i) {
    for (std::size_t k = 0; k < std::variant_size_v<Payload>; ++k) {
      const auto type = static_cast<MessageType>(k);
      const Message m{static_cast<std::int64_t>(rng.index(1'000'000)), random_payload(type, rng)};
      REQUIRE(m.type() == type);
      const auto text = encode_message(m);
      const Message back = decode_message(text);
      REQUIRE(back == m);
      REQUIRE(encode_message(back) == text);
      seen.insert(back.type());
    }
  }
  CHECK(seen.size() == 9);
}

TEST_CASE("envelope shape") {
  const Message m{42, PressPayload{2, std::nullopt}};
  CHECK(encode_message(m) == R"({"type":"press","t_ms":42,"payload":{"participant":2}})");
  const auto hello = decode_message(R"({"type":"hello","t_ms":1,"payload":{"role":"participant","participant":1}})");
  const auto& p = std::get<HelloPayload>(hello.payload);
  CHECK(p.role == ClientRole::participant);
  CHECK(p.participant == 1);
  CHECK_FALSE(p.session_id);
}

TEST_CASE("unknown and malformed messages are rejected") {
  CHECK_THROWS_WITH_AS(decode_message(R"({"type":"teleport","t_ms":1,"payload":{}})"),
                       doctest::Contains("unknown message type: teleport"), std::invalid_argument);
  CHECK_THROWS_AS(decode_message("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(decode_message("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(decode_message(R"({"t_ms":1})"), std::invalid_argument);
  CHECK_THROWS_AS(decode_message(R"({"type":"press","payload":{"participant":"two"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(decode_message(R"({"type":"hello","payload":{"role":"participant"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(decode_message(R"({"type":"hello","payload":{"role":"pilot"}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      decode_message(R"({"type":"scene_update","payload":{"faces":[{"center":[1,2],"width_px":0,"height_px":5}]}})"),
      std::invalid_argument);
  CHECK_THROWS_AS(decode_message(R"({"type":"experimenter_control","payload":{"action":"reboot"}})"),
                  std::invalid_argument);
}

TEST_CASE("type names are stable") {
  const std::vector<std::string> names{"hello",   "scene_update",         "gaze_target",
                                       "render_spec", "trial_event",      "press",
                                       "experimenter_control", "clock_sync", "error"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(to_string(static_cast<MessageType>(i)) == names[i]);
    CHECK(parse_message_type(names[i]) == static_cast<MessageType>(i));
  }
  CHECK_FALSE(parse_message_type("Hello"));
}
