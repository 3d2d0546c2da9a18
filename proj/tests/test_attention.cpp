#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mirroreyes/attention.hpp"

using namespace mirroreyes;

namespace {

const CameraIntrinsics kCam{1280.0, 720.0, 640.0};

SceneFrame frame_at(std::int64_t t, const std::vector<Vec2>& centers) {
  SceneFrame f;
  f.timestamp_ms = t;
  for (const auto& c : centers) {
    f.observations.push_back({0, TargetPoint::clamped(c, kCam), 40, 50, t});
  }
  return f;
}

// Assignment minimizing total displacement, by trying every permutation.
std::vector<int> optimal_assignment(const std::vector<Track>& tracks,
                                    const std::vector<Vec2>& obs) {
  std::vector<std::size_t> perm(tracks.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> result;
  do {
    double cost = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      cost += std::hypot(obs[i].x - tracks[perm[i]].center.x(),
                         obs[i].y - tracks[perm[i]].center.y());
    }
    if (cost < best) {
      best = cost;
      result.clear();
      for (std::size_t i = 0; i < obs.size(); ++i) result.push_back(tracks[perm[i]].id);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return result;
}

SelectionHistoryEntry spoke(int p) {
  return {TargetSelection::of(p), TrialResult::success, p};
}

SelectionHistoryEntry timed_out(int p) {
  return {TargetSelection::of(p), TrialResult::timeout, p};
}

}  // namespace

TEST_CASE("cold start opens one track per face") {
  FaceTracker tracker(kCam);
  const auto r = tracker.ingest_frame(frame_at(0, {{320, 360}, {640, 360}, {960, 360}}));
  CHECK(r.status == IngestStatus::accepted);
  CHECK(r.opened.size() == 3);
  CHECK(tracker.tracks().size() == 3);
  CHECK(tracker.left_to_right() == std::vector<int>{1, 2, 3});
}

TEST_CASE("small motion keeps ids and matches the optimal assignment") {
  Rng rng(3);
  for (int round = 0; round < 200; ++round) {
    FaceTracker tracker(kCam);
    std::vector<Vec2> pos{{320, 360}, {640, 360}, {960, 360}};
    tracker.ingest_frame(frame_at(0, pos));
    for (int step = 1; step <= 20; ++step) {
      for (auto& p : pos) {
        const double a = rng.uniform(0, 2 * 3.14159265358979);
        const double d = rng.uniform(0, 40);
        p.x += d * std::cos(a);
        p.y += d * std::sin(a);
      }
      std::vector<Vec2> shuffled = pos;
      rng.shuffle(shuffled);
      const auto before = tracker.tracks();
      const auto r = tracker.ingest_frame(frame_at(step * 33, shuffled));
      REQUIRE(r.opened.empty());
      REQUIRE(r.assigned == optimal_assignment(before, shuffled));
    }
    std::vector<int> ids;
    for (const auto& t : tracker.tracks()) ids.push_back(t.id);
    CHECK(ids == std::vector<int>{1, 2, 3});
  }
}

TEST_CASE("tracks unseen for more than a second retire") {
  FaceTracker tracker(kCam);
  tracker.ingest_frame(frame_at(0, {{320, 360}, {640, 360}, {960, 360}}));
  auto r = tracker.ingest_frame(frame_at(1000, {{320, 360}, {640, 360}}));
  CHECK(r.retired.empty());
  CHECK(tracker.tracks().size() == 3);
  r = tracker.ingest_frame(frame_at(1001, {{320, 360}, {640, 360}}));
  CHECK(r.retired == std::vector<int>{3});
  CHECK(tracker.tracks().size() == 2);
}

TEST_CASE("out-of-order frames are rejected without touching state") {
  FaceTracker tracker(kCam);
  tracker.ingest_frame(frame_at(100, {{320, 360}}));
  const auto r = tracker.ingest_frame(frame_at(99, {{900, 100}}));
  CHECK(r.status == IngestStatus::stale_frame);
  CHECK(tracker.tracks().size() == 1);
  CHECK(*tracker.last_timestamp() == 100);
}

TEST_CASE("a face jumping beyond the gate gets a fresh track") {
  FaceTracker tracker(kCam);
  tracker.ingest_frame(frame_at(0, {{320, 360}}));
  const auto r = tracker.ingest_frame(frame_at(33, {{320 + 129, 360}}));
  CHECK(r.opened == std::vector<int>{2});
}

TEST_CASE("the last speaker is never re-cued") {
  Rng rng(1);
  const std::vector<int> roster{1, 2, 3};
  std::vector<SelectionHistoryEntry> h{spoke(1)};
  int seen2 = 0, seen3 = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto s = select_next_target(h, roster, 0.0, rng);
    REQUIRE(s.kind == TargetSelection::Kind::participant);
    REQUIRE(s.participant != 1);
    (s.participant == 2 ? seen2 : seen3)++;
  }
  // Uniform over the two eligible participants: 1000 +- 4.5 sd.
  CHECK(std::abs(seen2 - 1000) < 100);
}

TEST_CASE("a timeout bars its participant only for the immediate re-cue") {
  const std::vector<SelectionHistoryEntry> fresh{spoke(2), timed_out(1)};
  CHECK(excluded_participant(fresh) == 1);
  const std::vector<SelectionHistoryEntry> later{spoke(2), timed_out(1), spoke(3)};
  CHECK(excluded_participant(later) == 3);
  const std::vector<SelectionHistoryEntry> after_recue{timed_out(1), timed_out(2)};
  CHECK(excluded_participant(after_recue) == 2);
  const std::vector<SelectionHistoryEntry> silent{
      spoke(2), {TargetSelection::between(1, 2), TrialResult::silent_mistake, std::nullopt}};
  CHECK(excluded_participant(silent) == 2);
  CHECK_FALSE(excluded_participant({}).has_value());
}

TEST_CASE("exhaustive rule table over short histories") {
  // Every history of up to three entries over a three-person roster.
  const std::vector<int> roster{1, 2, 3};
  std::vector<SelectionHistoryEntry> options;
  for (int p : roster) {
    options.push_back(spoke(p));
    options.push_back(timed_out(p));
  }
  options.push_back({TargetSelection::between(1, 2), TrialResult::silent_mistake, std::nullopt});
  std::vector<std::vector<SelectionHistoryEntry>> histories{{}};
  for (int len = 1; len <= 3; ++len) {
    const auto prev = histories;
    for (const auto& h : prev) {
      if (static_cast<int>(h.size()) != len - 1) continue;
      for (const auto& o : options) {
        auto n = h;
        n.push_back(o);
        histories.push_back(n);
      }
    }
  }
  Rng rng(9);
  for (const auto& h : histories) {
    // Reference: walk back over silent mistakes; a success bars its speaker,
    // a timeout bars only when it is the newest entry.
    std::optional<int> barred;
    for (std::size_t i = h.size(); i-- > 0;) {
      if (h[i].result == TrialResult::silent_mistake) continue;
      if (h[i].result == TrialResult::success || i + 1 == h.size()) barred = h[i].actor;
      break;
    }
    REQUIRE(excluded_participant(h) == barred);
    for (int k = 0; k < 20; ++k) {
      const auto s = select_next_target(h, roster, 0.0, rng);
      if (barred) REQUIRE(s.participant != *barred);
    }
  }
}

TEST_CASE("forced mistakes pick adjacent roster members") {
  Rng rng(4);
  const std::vector<int> roster{7, 8, 9};
  for (int i = 0; i < 200; ++i) {
    const auto s = select_next_target({}, roster, 1.0, rng);
    REQUIRE(s.kind == TargetSelection::Kind::between);
    REQUIRE(s.is_mistake);
    REQUIRE(s.between_b == s.between_a + 1);
  }
  CHECK(select_next_target({}, std::vector<int>{}, 0.5, rng).kind ==
        TargetSelection::Kind::none);
  CHECK_THROWS_AS(select_next_target({}, roster, 1.5, rng), std::invalid_argument);
}

TEST_CASE("mistake frequency stays inside the binomial band") {
  const std::vector<int> roster{1, 2, 3};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<SelectionHistoryEntry> h;
    int mistakes = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto s = select_next_target(h, roster, 0.1, rng);
      if (s.is_mistake) {
        ++mistakes;
        h.push_back({s, TrialResult::silent_mistake, std::nullopt});
      } else {
        REQUIRE(excluded_participant(h) != s.participant);
        h.push_back(spoke(s.participant));
      }
    }
    CHECK(mistakes >= 70);
    CHECK(mistakes <= 130);
  }
}

TEST_CASE("between target is the midpoint") {
  auto obs = [](double x, double y) {
    return FaceObservation{0, TargetPoint::clamped(x, y, kCam), 10, 10, 0};
  };
  CHECK(between_target(obs(320, 360), obs(640, 360)) == TargetPoint::clamped(480, 360, kCam));
  CHECK(between_target(obs(100, 300), obs(300, 500)) == TargetPoint::clamped(200, 400, kCam));
  CHECK(between_target(obs(640, 360), obs(640, 360)) == TargetPoint::clamped(640, 360, kCam));
}

TEST_CASE("gaze shifts linearly and then pursues") {
  FaceTracker tracker(kCam);
  tracker.ingest_frame(frame_at(0, {{320, 360}, {960, 360}}));
  auto s = GazeState::at_rest(TargetPoint::clamped(320, 360, kCam), 0, 200);
  s.selection = TargetSelection::of(1);

  auto u = gaze_update(s, TargetSelection::of(2), tracker.tracks(), 1000);
  CHECK(u.state.current_point == TargetPoint::clamped(320, 360, kCam));
  u = gaze_update(u.state, TargetSelection::of(2), tracker.tracks(), 1100);
  CHECK(u.state.current_point.x() == doctest::Approx(640));
  u = gaze_update(u.state, TargetSelection::of(2), tracker.tracks(), 1200);
  CHECK(u.state.current_point.x() == doctest::Approx(960));

  tracker.ingest_frame(frame_at(1233, {{320, 360}, {970, 360}}));
  const double before = u.state.goal_point.x();
  u = gaze_update(u.state, TargetSelection::of(2), tracker.tracks(), 1233);
  CHECK(u.state.goal_point.x() - before == doctest::Approx(10));
  CHECK(u.state.current_point.x() == doctest::Approx(970));
}

TEST_CASE("a retired target holds the gaze and reports the loss") {
  FaceTracker tracker(kCam);
  tracker.ingest_frame(frame_at(0, {{320, 360}}));
  auto s = GazeState::at_rest(TargetPoint::clamped(500, 200, kCam));
  const auto u = gaze_update(s, TargetSelection::of(42), tracker.tracks(), 50);
  CHECK(u.lost_target);
  CHECK(u.state.current_point == s.current_point);
}

TEST_CASE("gaze never teleports between frames") {
  SyntheticSceneConfig cfg = SyntheticSceneConfig::standing_group(kCam);
  for (auto& f : cfg.faces) f.jitter_amplitude_px = 15;
  FaceTracker tracker(kCam);
  auto s = GazeState::at_rest(TargetPoint::clamped(640, 360, kCam));
  Rng rng(8);
  TargetSelection sel = TargetSelection::of(1);
  double max_face_speed = 2 * 3.14159265358979 * 15 / 2000.0;  // px per ms
  for (std::int64_t t = 0; t < 20000; t += 33) {
    tracker.ingest_frame(synthetic_scene(cfg, kCam, t));
    if (t % 990 == 0) sel = TargetSelection::of(1 + static_cast<int>(rng.index(3)));
    const auto prev = s.current_point;
    s = gaze_update(s, sel, tracker.tracks(), t).state;
    const double step = std::hypot(s.current_point.x() - prev.x(), s.current_point.y() - prev.y());
    // Shift speed: at most the full face spacing per 200 ms.
    const double bound = max_face_speed * 33 + 700.0 / 200.0 * 33;
    REQUIRE(step <= bound);
  }
}

TEST_CASE("synthetic scenes are deterministic and jitter sinusoidally") {
  const auto cfg = SyntheticSceneConfig::standing_group(kCam);
  REQUIRE(cfg.faces.size() == 3);
  CHECK(cfg.faces[0].center.x == doctest::Approx(320));
  CHECK(cfg.faces[1].center.x == doctest::Approx(640));
  CHECK(cfg.faces[2].center.x == doctest::Approx(960));
  const auto a = synthetic_scene(cfg, kCam, 0);
  const auto b = synthetic_scene(cfg, kCam, 12345);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.observations[i].center == b.observations[i].center);

  SyntheticSceneConfig one;
  one.faces.push_back({1, {400, 300}, 40, 50, 20.0, 2000.0});
  CHECK(synthetic_scene(one, kCam, 500).observations[0].center.x() == doctest::Approx(420));
  one.faces[0].jitter_amplitude_px = 0;
  CHECK(synthetic_scene(one, kCam, 500).observations[0].center.x() == 400);
}
