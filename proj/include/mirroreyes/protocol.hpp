#pragma once

// Event-sourced state machine for the gaze-cued word-chain game.
//
// A session is a sequence of blocks (practice, single-condition, mixed). Each
// trial runs cue -> button window (3 s) -> word window (5 s) -> resolved.
// Everything the engine decides is returned as LogRecords; feeding the same
// input events to an engine built from the same plan reproduces the same
// records, which is what replay relies on.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirroreyes/attention.hpp"
#include "mirroreyes/compositor.hpp"
#include "mirroreyes/rng.hpp"

namespace mirroreyes {

enum class BlockKind { practice, single, mixed };
std::string_view to_string(BlockKind k);
BlockKind parse_block_kind(std::string_view s);

enum class MistakeScheduling { iid, quota };
std::string_view to_string(MistakeScheduling m);
MistakeScheduling parse_mistake_scheduling(std::string_view s);

enum class Involvement { targeted_or_actor, all };
std::string_view to_string(Involvement i);
Involvement parse_involvement(std::string_view s);

struct PlanConfig {
  int practice_trials_per_condition = 10;
  int part1_trials_per_block = 30;
  int part2_trials_per_condition = 15;
  double mistake_rate_practice = 0.10;
  double mistake_rate_part1 = 0.10;
  double mistake_rate_part2 = 0.20;
  std::int64_t practice_cap_ms = 240'000;
  std::int64_t part1_cap_ms = 240'000;
  std::int64_t part2_cap_ms = 360'000;
  MistakeScheduling mistake_scheduling = MistakeScheduling::iid;
  bool include_practice = true;
  bool include_part1 = true;
  bool include_part2 = true;
};

struct PlannedTrial {
  int trial_id = 0;
  /// Position in the block's original schedule; appended trials continue it.
  int slot = 0;
  DisplayCondition condition = DisplayCondition::eye_only;
  TargetSelection selection;
  bool appended = false;
};

struct BlockPlan {
  int block_id = 0;
  BlockKind kind = BlockKind::single;
  /// Set for practice and single-condition blocks.
  std::optional<DisplayCondition> condition;
  double mistake_rate = 0.0;
  std::int64_t cap_ms = 0;
  std::vector<PlannedTrial> trials;
};

struct ExperimentPlan {
  std::uint64_t seed = 0;
  std::vector<int> roster;
  PlanConfig config;
  std::array<DisplayCondition, 3> part1_order{};
  std::vector<BlockPlan> blocks;
};

/// Deterministic for (seed, roster, config). Targets are drawn as if every
/// targeted trial succeeds; the engine repairs the schedule at run time.
/// Throws std::invalid_argument for rosters smaller than two.
ExperimentPlan plan_experiment(std::uint64_t seed, std::vector<int> roster,
                               const PlanConfig& config = {});

/// True when no targeted trial in `schedule` cues the participant who would
/// have spoken just before it, starting from `last_speaker`.
bool succession_valid(std::span<const PlannedTrial> schedule,
                      std::optional<int> last_speaker);

enum class Label { tp, fp, fn, tn, preempted, na };
std::string_view to_string(Label l);
Label parse_label(std::string_view s);

struct PressEvent {
  int participant = 0;
  std::int64_t t_ms = 0;
  int trial_id = 0;
};

struct Trial {
  int trial_id = 0;
  int block_id = 0;
  DisplayCondition condition = DisplayCondition::eye_only;
  TargetSelection selection;
  int scheduled_index = 0;
  bool appended = false;
};

struct TrialOutcome {
  std::map<int, Label> labels;
  std::optional<int> responder;
  std::optional<std::int64_t> reaction_time_ms;
};

/// Labels every roster member for a resolved trial. `first_press` is the
/// scoring press (first in-window press), if any; RT is measured from
/// `cue_onset_ms`.
TrialOutcome classify_outcome(const Trial& trial,
                              const std::optional<PressEvent>& first_press,
                              std::span<const int> roster,
                              std::int64_t cue_onset_ms,
                              Involvement involvement = Involvement::targeted_or_actor);

/// Word-chain rule: `next` starts with the last letter of `previous`,
/// ignoring ASCII case. Empty words are rejected.
bool validate_word(std::string_view previous, std::string_view next);

enum class Phase { cueing, await_button, await_word, resolved };
std::string_view to_string(Phase p);

struct ActiveTrial {
  Trial trial;
  Phase phase = Phase::cueing;
  std::int64_t cue_onset_ms = 0;
  std::int64_t deadline_ms = 0;
  std::optional<PressEvent> scoring_press;
  bool recue = false;
};

struct BalancingAction {
  enum class Kind { swap, append };
  Kind kind = Kind::swap;
  std::vector<int> trial_ids;

  friend bool operator==(const BalancingAction&, const BalancingAction&) = default;
};

/// Gives a stolen trial back to its victim. `pending` is the block's
/// remaining schedule and `stealer` now holds the floor. Prefers handing the
/// stealer's next targeted trial to the victim; when that breaks the
/// succession rule, `extra` (a trial cueing the victim) is appended. On
/// success `pending` is updated; nothing is returned when no valid schedule
/// was found.
std::optional<BalancingAction> rebalance(std::vector<PlannedTrial>& pending,
                                         int stealer, int victim,
                                         int stolen_trial_id,
                                         const PlannedTrial& extra);

/// Reorders targets so that no targeted trial follows its own speaker.
/// Returns false when that is impossible.
bool repair_succession(std::vector<PlannedTrial>& schedule,
                       std::optional<int> last_speaker);

enum class EventType { cue_onset, press, word_ok, word_fail, tick };
std::string_view to_string(EventType t);
std::optional<EventType> parse_event_type(std::string_view s);

struct ProtocolEvent {
  EventType type = EventType::tick;
  std::int64_t t_ms = 0;
  int participant = 0;
};

/// One line of the trial log. Every record carries the same ten keys.
struct LogRecord {
  using LabelValue = std::variant<std::monostate, std::string, std::map<int, Label>>;

  std::string type;
  std::int64_t t_ms = 0;
  std::optional<int> trial_id;
  std::optional<int> block_id;
  std::optional<DisplayCondition> condition;
  std::optional<TargetSelection> selection;
  std::optional<int> participant;
  LabelValue label;
  std::optional<std::int64_t> rt_ms;
  std::optional<BalancingAction> balancing;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct ProtocolTiming {
  std::int64_t press_window_ms = 3000;
  std::int64_t word_window_ms = 5000;
  std::int64_t max_trial_ms() const { return press_window_ms + word_window_ms; }
};

struct EngineConfig {
  ProtocolTiming timing;
  Involvement involvement = Involvement::targeted_or_actor;
  bool rebalancing = true;
};

struct EngineSnapshot {
  bool finished = false;
  std::optional<int> block_id;
  std::optional<BlockKind> block_kind;
  std::optional<DisplayCondition> block_condition;
  std::optional<ActiveTrial> active;
  std::size_t pending = 0;
  std::size_t next_block = 0;
};

class ProtocolEngine {
public:
  ProtocolEngine(ExperimentPlan plan, EngineConfig config = {});

  /// Applies one timestamped event. The first returned record echoes the
  /// event (ticks are echoed only when they change something).
  std::vector<LogRecord> on_event(const ProtocolEvent& event);

  /// Time-driven transitions only: deadline expiry and block caps.
  std::vector<LogRecord> enforce_caps(std::int64_t now_ms);

  bool finished() const;
  bool in_flight() const;
  /// True when the next cue_onset would start a trial.
  bool ready_for_cue() const;
  EngineSnapshot snapshot() const;
  const ExperimentPlan& plan() const { return plan_; }
  const EngineConfig& config() const { return config_; }
  const std::vector<SelectionHistoryEntry>& block_history() const {
    return history_;
  }
  std::span<const PlannedTrial> pending() const;

private:
  struct OpenBlock {
    const BlockPlan* plan = nullptr;
    std::int64_t started_ms = 0;
    std::vector<PlannedTrial> pending;
    int next_slot = 0;
  };

  void advance_time(std::int64_t now, std::vector<LogRecord>& out);
  void open_next_block(std::int64_t now, std::vector<LogRecord>& out);
  void close_block(std::int64_t now, std::string_view reason,
                   std::vector<LogRecord>& out);
  void prepare_next(std::int64_t now, bool recue, std::vector<LogRecord>& out);
  void resolve(std::int64_t now, bool word_accepted, std::vector<LogRecord>& out);
  void handle_steal(std::int64_t now, int stealer, std::vector<LogRecord>& out);
  bool cap_reached(std::int64_t now) const;
  bool is_participant(int id) const;
  LogRecord trial_record(std::string type, std::int64_t t) const;

  ExperimentPlan plan_;
  EngineConfig config_;
  Rng rng_;
  std::size_t next_block_ = 0;
  std::optional<OpenBlock> block_;
  std::optional<ActiveTrial> active_;
  std::vector<SelectionHistoryEntry> history_;
  std::int64_t last_t_ = 0;
  int next_trial_id_ = 0;
};

}  // namespace mirroreyes
