#include "mirroreyes/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace mirroreyes {

FaceTracker::FaceTracker(CameraIntrinsics camera, TrackerConfig config)
    : camera_(camera), config_(config) {
  camera_.validate();
}

const Track* FaceTracker::find(int id) const {
  auto it = std::find_if(tracks_.begin(), tracks_.end(),
                         [id](const Track& t) { return t.id == id; });
  return it == tracks_.end() ? nullptr : &*it;
}

std::vector<int> FaceTracker::left_to_right() const {
  std::vector<const Track*> sorted;
  for (const auto& t : tracks_) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Track* a, const Track* b) {
                     return std::make_pair(a->center.x(), a->id) <
                            std::make_pair(b->center.x(), b->id);
                   });
  std::vector<int> ids;
  for (const auto* t : sorted) ids.push_back(t->id);
  return ids;
}

IngestResult FaceTracker::ingest_frame(const SceneFrame& frame) {
  IngestResult result;
  if (last_ts_ && frame.timestamp_ms < *last_ts_) {
    result.status = IngestStatus::stale_frame;
    return result;
  }
  last_ts_ = frame.timestamp_ms;

  const double gate = config_.gate_fraction * camera_.width_px;
  struct Candidate {
    double dist;
    std::size_t track;
    std::size_t obs;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    for (std::size_t oi = 0; oi < frame.observations.size(); ++oi) {
      const auto& c = frame.observations[oi].center;
      const double d = std::hypot(c.x() - tracks_[ti].center.x(),
                                  c.y() - tracks_[ti].center.y());
      if (d <= gate) candidates.push_back({d, ti, oi});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tie(a.dist, a.track, a.obs) <
                     std::tie(b.dist, b.track, b.obs);
            });

  result.assigned.assign(frame.observations.size(), 0);
  std::vector<bool> track_used(tracks_.size(), false);
  for (const auto& cand : candidates) {
    if (track_used[cand.track] || result.assigned[cand.obs] != 0) continue;
    track_used[cand.track] = true;
    auto& t = tracks_[cand.track];
    const auto& o = frame.observations[cand.obs];
    t.center = o.center;
    t.width_px = o.width_px;
    t.height_px = o.height_px;
    t.last_seen_ms = frame.timestamp_ms;
    result.assigned[cand.obs] = t.id;
  }

  for (std::size_t oi = 0; oi < frame.observations.size(); ++oi) {
    if (result.assigned[oi] != 0) continue;
    const auto& o = frame.observations[oi];
    Track t{next_id_++, o.center, o.width_px, o.height_px, frame.timestamp_ms,
            frame.timestamp_ms};
    result.assigned[oi] = t.id;
    result.opened.push_back(t.id);
    tracks_.push_back(t);
  }

  std::erase_if(tracks_, [&](const Track& t) {
    if (frame.timestamp_ms - t.last_seen_ms > config_.retire_after_ms) {
      result.retired.push_back(t.id);
      return true;
    }
    return false;
  });
  return result;
}

std::string to_string(const TargetSelection& s) {
  switch (s.kind) {
    case TargetSelection::Kind::none:
      return "none";
    case TargetSelection::Kind::participant:
      return "P" + std::to_string(s.participant);
    case TargetSelection::Kind::between:
      return "between(P" + std::to_string(s.between_a) + ",P" +
             std::to_string(s.between_b) + ")";
  }
  return "?";
}

std::optional<int> excluded_participant(
    std::span<const SelectionHistoryEntry> history) {
  for (std::size_t i = history.size(); i-- > 0;) {
    const auto& e = history[i];
    switch (e.result) {
      case TrialResult::silent_mistake:
        continue;
      case TrialResult::success:
        return e.actor;
      case TrialResult::timeout:
        // Only the immediate re-cue skips the person who missed the limit.
        if (i + 1 == history.size()) return e.actor;
        return std::nullopt;
    }
  }
  return std::nullopt;
}

TargetSelection select_next_target(
    std::span<const SelectionHistoryEntry> history, std::span<const int> roster,
    double mistake_rate, Rng& rng) {
  if (mistake_rate < 0.0 || mistake_rate > 1.0) {
    throw std::invalid_argument("mistake rate must be in [0, 1]");
  }
  if (roster.empty()) return TargetSelection::none();

  const bool mistake = rng.uniform() < mistake_rate;
  if (mistake && roster.size() >= 2) {
    const std::size_t pair = rng.index(roster.size() - 1);
    return TargetSelection::between(roster[pair], roster[pair + 1]);
  }

  const auto excluded = excluded_participant(history);
  std::vector<int> eligible;
  for (int id : roster) {
    if (!excluded || id != *excluded) eligible.push_back(id);
  }
  if (eligible.empty()) eligible.assign(roster.begin(), roster.end());
  return TargetSelection::of(eligible[rng.index(eligible.size())]);
}

TargetPoint between_target(const FaceObservation& a, const FaceObservation& b) {
  return TargetPoint::midpoint(a.center, b.center);
}

GazeState GazeState::at_rest(TargetPoint p, std::int64_t now_ms,
                             std::int64_t shift_duration_ms) {
  GazeState s;
  s.current_point = p;
  s.goal_point = p;
  s.shift_origin = p;
  s.shift_started_ms = now_ms;
  s.shift_duration_ms = shift_duration_ms;
  return s;
}

namespace {

const Track* find_track(std::span<const Track> tracks, int id) {
  for (const auto& t : tracks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

}  // namespace

GazeUpdate gaze_update(const GazeState& state, const TargetSelection& selection,
                       std::span<const Track> tracks, std::int64_t now_ms) {
  GazeUpdate out{state, false};
  GazeState& s = out.state;

  std::optional<TargetPoint> goal;
  switch (selection.kind) {
    case TargetSelection::Kind::none:
      break;
    case TargetSelection::Kind::participant:
      if (const auto* t = find_track(tracks, selection.participant)) {
        goal = t->center;
      }
      break;
    case TargetSelection::Kind::between: {
      const auto* a = find_track(tracks, selection.between_a);
      const auto* b = find_track(tracks, selection.between_b);
      if (a && b) goal = TargetPoint::midpoint(a->center, b->center);
      break;
    }
  }

  if (selection.kind != TargetSelection::Kind::none && !goal) {
    // Hold still; a later update with a resolvable target starts a fresh shift.
    out.lost_target = true;
    return out;
  }

  if (selection != state.selection) {
    s.selection = selection;
    s.shift_origin = state.current_point;
    s.shift_started_ms = now_ms;
  }
  if (!goal) {
    // No target: stay where we are.
    s.goal_point = s.current_point;
    s.shift_origin = s.current_point;
    return out;
  }

  s.goal_point = *goal;
  const double frac =
      s.shift_duration_ms <= 0
          ? 1.0
          : static_cast<double>(now_ms - s.shift_started_ms) /
                static_cast<double>(s.shift_duration_ms);
  s.current_point = TargetPoint::lerp(s.shift_origin, s.goal_point, frac);
  return out;
}

SyntheticSceneConfig SyntheticSceneConfig::standing_group(
    const CameraIntrinsics& camera, int count, double distance_m,
    double spacing_m, double face_width_m, double face_height_m) {
  if (count < 1) throw std::invalid_argument("scene needs at least one face");
  SyntheticSceneConfig cfg;
  const double f = camera.focal_length_px;
  for (int i = 0; i < count; ++i) {
    const double world_x = (i - (count - 1) / 2.0) * spacing_m;
    SyntheticFace face;
    face.id = i + 1;
    face.center = {camera.width_px / 2.0 + f * world_x / distance_m,
                   camera.height_px / 2.0};
    face.width_px = f * face_width_m / distance_m;
    face.height_px = f * face_height_m / distance_m;
    cfg.faces.push_back(face);
  }
  return cfg;
}

SceneFrame synthetic_scene(const SyntheticSceneConfig& config,
                           const CameraIntrinsics& camera, std::int64_t t_ms) {
  if (config.faces.empty()) {
    throw std::invalid_argument("scene needs at least one face");
  }
  SceneFrame frame;
  frame.timestamp_ms = t_ms;
  frame.source = FrameSource::synthetic;
  for (const auto& f : config.faces) {
    if (f.visible_from_ms && t_ms < *f.visible_from_ms) continue;
    if (f.visible_until_ms && t_ms > *f.visible_until_ms) continue;
    double x = f.center.x;
    if (f.jitter_amplitude_px != 0.0 && f.jitter_period_ms > 0.0) {
      x += f.jitter_amplitude_px *
           std::sin(2.0 * std::numbers::pi * static_cast<double>(t_ms) /
                    f.jitter_period_ms);
    }
    frame.observations.push_back({f.id, TargetPoint::clamped(x, f.center.y, camera),
                                  f.width_px, f.height_px, t_ms});
  }
  return frame;
}

}  // namespace mirroreyes
