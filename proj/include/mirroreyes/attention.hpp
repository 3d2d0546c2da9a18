#pragma once

// Face tracks, target selection and the animated gaze point.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mirroreyes/geometry.hpp"
#include "mirroreyes/rng.hpp"

namespace mirroreyes {

struct FaceObservation {
  /// Detector-side id. The tracker assigns its own ids and ignores this one.
  int track_id = 0;
  TargetPoint center;
  double width_px = 0.0;
  double height_px = 0.0;
  std::int64_t timestamp_ms = 0;
};

enum class FrameSource { synthetic, external };

struct SceneFrame {
  std::int64_t timestamp_ms = 0;
  std::vector<FaceObservation> observations;
  FrameSource source = FrameSource::synthetic;
};

struct Track {
  int id = 0;
  TargetPoint center;
  double width_px = 0.0;
  double height_px = 0.0;
  std::int64_t first_seen_ms = 0;
  std::int64_t last_seen_ms = 0;
};

struct TrackerConfig {
  /// Matching gate as a fraction of the camera width.
  double gate_fraction = 0.1;
  std::int64_t retire_after_ms = 1000;
};

enum class IngestStatus { accepted, stale_frame };

struct IngestResult {
  IngestStatus status = IngestStatus::accepted;
  /// Track id assigned to each observation, in observation order.
  std::vector<int> assigned;
  std::vector<int> opened;
  std::vector<int> retired;
};

/// Greedy nearest-centroid tracker.
class FaceTracker {
public:
  explicit FaceTracker(CameraIntrinsics camera, TrackerConfig config = {});

  IngestResult ingest_frame(const SceneFrame& frame);

  const std::vector<Track>& tracks() const { return tracks_; }
  const Track* find(int id) const;
  /// Live track ids ordered by horizontal image position.
  std::vector<int> left_to_right() const;
  std::optional<std::int64_t> last_timestamp() const { return last_ts_; }

private:
  CameraIntrinsics camera_;
  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<std::int64_t> last_ts_;
};

struct TargetSelection {
  enum class Kind { none, participant, between };

  Kind kind = Kind::none;
  int participant = 0;
  int between_a = 0;
  int between_b = 0;
  bool is_mistake = false;

  static TargetSelection none() { return {}; }
  static TargetSelection of(int id) { return {Kind::participant, id, 0, 0, false}; }
  static TargetSelection between(int a, int b) {
    return {Kind::between, 0, a, b, true};
  }

  friend bool operator==(const TargetSelection&,
                         const TargetSelection&) = default;
};

std::string to_string(const TargetSelection& s);

/// How a trial ended, as far as the succession rule is concerned.
enum class TrialResult {
  /// Somebody pressed and uttered a word in time; actor is the speaker.
  success,
  /// The responsible participant missed a time limit; actor is that person.
  timeout,
  /// Machine-mistake trial during which nobody pressed.
  silent_mistake,
};

struct SelectionHistoryEntry {
  TargetSelection selection;
  TrialResult result = TrialResult::success;
  std::optional<int> actor;
};

/// Participant barred from the next cue: the most recent speaker, or the
/// participant who just timed out (immediate re-cue only).
std::optional<int> excluded_participant(
    std::span<const SelectionHistoryEntry> history);

/// Picks the next cue. `roster` must be ordered left to right so that a
/// machine-mistake lands between two neighbours. An empty roster yields a
/// none selection.
TargetSelection select_next_target(
    std::span<const SelectionHistoryEntry> history, std::span<const int> roster,
    double mistake_rate, Rng& rng);

TargetPoint between_target(const FaceObservation& a, const FaceObservation& b);

struct GazeState {
  TargetPoint current_point;
  TargetPoint goal_point;
  TargetPoint shift_origin;
  std::int64_t shift_started_ms = 0;
  std::int64_t shift_duration_ms = 200;
  TargetSelection selection;

  static GazeState at_rest(TargetPoint p, std::int64_t now_ms = 0,
                           std::int64_t shift_duration_ms = 200);
};

struct GazeUpdate {
  GazeState state;
  bool lost_target = false;
};

/// Advances the gaze toward `selection`, whose ids refer to tracks in
/// `tracks`. A new selection starts a linear shift from the current point;
/// the goal re-binds to the face's current center on every update.
GazeUpdate gaze_update(const GazeState& state, const TargetSelection& selection,
                       std::span<const Track> tracks, std::int64_t now_ms);

struct SyntheticFace {
  int id = 0;
  Vec2 center;
  double width_px = 48.0;
  double height_px = 64.0;
  double jitter_amplitude_px = 0.0;
  double jitter_period_ms = 2000.0;
  std::optional<std::int64_t> visible_from_ms;
  std::optional<std::int64_t> visible_until_ms;
};

struct SyntheticSceneConfig {
  std::vector<SyntheticFace> faces;

  /// `count` participants spaced `spacing_m` apart at `distance_m` from the
  /// camera, projected through the pinhole model onto the image center row.
  static SyntheticSceneConfig standing_group(const CameraIntrinsics& camera,
                                             int count = 3,
                                             double distance_m = 2.0,
                                             double spacing_m = 1.0,
                                             double face_width_m = 0.15,
                                             double face_height_m = 0.20);
};

SceneFrame synthetic_scene(const SyntheticSceneConfig& config,
                           const CameraIntrinsics& camera, std::int64_t t_ms);

}  // namespace mirroreyes
