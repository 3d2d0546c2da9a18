#include "mirroreyes/protocol.hpp"

#include <algorithm>
#include <map>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace mirroreyes {

std::string_view to_string(BlockKind k) {
  switch (k) {
    case BlockKind::practice:
      return "practice";
    case BlockKind::single:
      return "single";
    case BlockKind::mixed:
      return "mixed";
  }
  throw std::invalid_argument("unknown block kind");
}

BlockKind parse_block_kind(std::string_view s) {
  if (s == "practice") return BlockKind::practice;
  if (s == "single") return BlockKind::single;
  if (s == "mixed") return BlockKind::mixed;
  throw std::invalid_argument("unknown block kind: " + std::string(s));
}

std::string_view to_string(MistakeScheduling m) {
  return m == MistakeScheduling::iid ? "iid" : "quota";
}

MistakeScheduling parse_mistake_scheduling(std::string_view s) {
  if (s == "iid") return MistakeScheduling::iid;
  if (s == "quota") return MistakeScheduling::quota;
  throw std::invalid_argument("unknown mistake scheduling: " + std::string(s));
}

std::string_view to_string(Involvement i) {
  return i == Involvement::all ? "all" : "targeted_or_actor";
}

Involvement parse_involvement(std::string_view s) {
  if (s == "targeted_or_actor") return Involvement::targeted_or_actor;
  if (s == "all") return Involvement::all;
  throw std::invalid_argument("unknown involvement policy: " + std::string(s));
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::tp:
      return "TP";
    case Label::fp:
      return "FP";
    case Label::fn:
      return "FN";
    case Label::tn:
      return "TN";
    case Label::preempted:
      return "preempted";
    case Label::na:
      return "n/a";
  }
  throw std::invalid_argument("unknown label");
}

Label parse_label(std::string_view s) {
  for (auto l : {Label::tp, Label::fp, Label::fn, Label::tn, Label::preempted,
                 Label::na}) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown label: " + std::string(s));
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::cueing:
      return "cueing";
    case Phase::await_button:
      return "await_button";
    case Phase::await_word:
      return "await_word";
    case Phase::resolved:
      return "resolved";
  }
  throw std::invalid_argument("unknown phase");
}

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::cue_onset:
      return "cue_onset";
    case EventType::press:
      return "press";
    case EventType::word_ok:
      return "word_ok";
    case EventType::word_fail:
      return "word_fail";
    case EventType::tick:
      return "tick";
  }
  throw std::invalid_argument("unknown event type");
}

std::optional<EventType> parse_event_type(std::string_view s) {
  for (auto t : {EventType::cue_onset, EventType::press, EventType::word_ok,
                 EventType::word_fail, EventType::tick}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Planning

namespace {

bool is_targeted(const PlannedTrial& t) {
  return t.selection.kind == TargetSelection::Kind::participant;
}

void check_rate(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("mistake rate must be in [0, 1]");
  }
}

BlockPlan make_block(int block_id, BlockKind kind,
                     std::optional<DisplayCondition> condition,
                     const std::vector<DisplayCondition>& conditions,
                     double rate, std::int64_t cap_ms, const ExperimentPlan& plan,
                     int& next_trial_id, Rng& rng) {
  check_rate(rate);
  BlockPlan block;
  block.block_id = block_id;
  block.kind = kind;
  block.condition = condition;
  block.mistake_rate = rate;
  block.cap_ms = cap_ms;

  const std::size_t n = conditions.size();
  std::vector<double> trial_rate(n, rate);
  if (plan.config.mistake_scheduling == MistakeScheduling::quota) {
    const auto k = static_cast<std::size_t>(std::lround(rate * static_cast<double>(n)));
    std::vector<double> flags(n, 0.0);
    std::fill_n(flags.begin(), std::min(k, n), 1.0);
    rng.shuffle(flags);
    trial_rate = flags;
  }

  std::vector<SelectionHistoryEntry> history;
  for (std::size_t i = 0; i < n; ++i) {
    const auto sel = select_next_target(history, plan.roster, trial_rate[i], rng);
    if (sel.kind == TargetSelection::Kind::between) {
      history.push_back({sel, TrialResult::silent_mistake, std::nullopt});
    } else {
      history.push_back({sel, TrialResult::success, sel.participant});
    }
    block.trials.push_back({next_trial_id++, static_cast<int>(i), conditions[i], sel,
                            false});
  }
  return block;
}

}  // namespace

ExperimentPlan plan_experiment(std::uint64_t seed, std::vector<int> roster,
                               const PlanConfig& config) {
  if (roster.size() < 2) {
    throw std::invalid_argument("roster needs at least two participants");
  }
  if (config.practice_trials_per_condition < 0 || config.part1_trials_per_block < 0 ||
      config.part2_trials_per_condition < 0) {
    throw std::invalid_argument("trial counts must be non-negative");
  }

  ExperimentPlan plan;
  plan.seed = seed;
  plan.roster = std::move(roster);
  plan.config = config;

  Rng rng(seed);
  plan.part1_order = kAllConditions;
  rng.shuffle(plan.part1_order);

  int block_id = 1;
  int trial_id = 1;
  if (config.include_practice) {
    for (auto c : kAllConditions) {
      std::vector<DisplayCondition> conds(
          static_cast<std::size_t>(config.practice_trials_per_condition), c);
      plan.blocks.push_back(make_block(block_id++, BlockKind::practice, c, conds,
                                       config.mistake_rate_practice,
                                       config.practice_cap_ms, plan, trial_id, rng));
    }
  }
  if (config.include_part1) {
    for (auto c : plan.part1_order) {
      std::vector<DisplayCondition> conds(
          static_cast<std::size_t>(config.part1_trials_per_block), c);
      plan.blocks.push_back(make_block(block_id++, BlockKind::single, c, conds,
                                       config.mistake_rate_part1,
                                       config.part1_cap_ms, plan, trial_id, rng));
    }
  }
  if (config.include_part2) {
    std::vector<DisplayCondition> conds;
    for (auto c : kAllConditions) {
      conds.insert(conds.end(),
                   static_cast<std::size_t>(config.part2_trials_per_condition), c);
    }
    rng.shuffle(conds);
    plan.blocks.push_back(make_block(block_id++, BlockKind::mixed, std::nullopt, conds,
                                     config.mistake_rate_part2, config.part2_cap_ms,
                                     plan, trial_id, rng));
  }
  return plan;
}

bool succession_valid(std::span<const PlannedTrial> schedule,
                      std::optional<int> last_speaker) {
  for (const auto& t : schedule) {
    if (!is_targeted(t)) continue;
    if (last_speaker && t.selection.participant == *last_speaker) return false;
    last_speaker = t.selection.participant;
  }
  return true;
}

bool repair_succession(std::vector<PlannedTrial>& schedule,
                       std::optional<int> last_speaker) {
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!is_targeted(schedule[k])) continue;
    if (last_speaker && schedule[k].selection.participant == *last_speaker) {
      std::size_t l = k + 1;
      while (l < schedule.size() &&
             (!is_targeted(schedule[l]) ||
              schedule[l].selection.participant == *last_speaker)) {
        ++l;
      }
      if (l == schedule.size()) return false;
      std::swap(schedule[k].selection, schedule[l].selection);
    }
    last_speaker = schedule[k].selection.participant;
  }
  return true;
}

namespace {

// Reorders the targeted selections in place: each slot takes the participant
// with the most remaining trials other than the previous speaker, earliest
// original occurrence first on ties.
bool rearrange_targets(std::vector<PlannedTrial>& schedule, int last_speaker) {
  std::vector<std::size_t> slots;
  std::map<int, std::vector<TargetSelection>> queues;
  std::map<int, std::size_t> first_seen;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!is_targeted(schedule[k])) continue;
    slots.push_back(k);
    const int p = schedule[k].selection.participant;
    queues[p].push_back(schedule[k].selection);
    first_seen.emplace(p, k);
  }
  std::map<int, std::size_t> taken;
  int last = last_speaker;
  std::vector<TargetSelection> order;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    std::optional<int> pick;
    for (const auto& [p, q] : queues) {
      const std::size_t left = q.size() - taken[p];
      if (p == last || left == 0) continue;
      if (!pick) {
        pick = p;
        continue;
      }
      const std::size_t best = queues[*pick].size() - taken[*pick];
      if (left > best || (left == best && first_seen[p] < first_seen[*pick])) pick = p;
    }
    if (!pick) return false;
    order.push_back(queues[*pick][taken[*pick]++]);
    last = *pick;
  }
  for (std::size_t i = 0; i < slots.size(); ++i) schedule[slots[i]].selection = order[i];
  return true;
}

}  // namespace

std::optional<BalancingAction> rebalance(std::vector<PlannedTrial>& pending,
                                         int stealer, int victim,
                                         int stolen_trial_id,
                                         const PlannedTrial& extra) {
  auto next_own = std::find_if(pending.begin(), pending.end(), [&](const auto& t) {
    return is_targeted(t) && t.selection.participant == stealer;
  });
  if (next_own != pending.end()) {
    auto candidate = pending;
    auto& slot = candidate[static_cast<std::size_t>(next_own - pending.begin())];
    slot.selection = TargetSelection::of(victim);
    if (succession_valid(candidate, stealer)) {
      const int swapped = slot.trial_id;
      pending = std::move(candidate);
      return BalancingAction{BalancingAction::Kind::swap, {stolen_trial_id, swapped}};
    }
  }

  auto candidate = pending;
  PlannedTrial appended = extra;
  appended.selection = TargetSelection::of(victim);
  appended.appended = true;
  candidate.push_back(appended);
  if (succession_valid(candidate, stealer)) {
    pending = std::move(candidate);
    return BalancingAction{BalancingAction::Kind::append,
                           {stolen_trial_id, appended.trial_id}};
  }

  const auto before = candidate;
  if (!repair_succession(candidate, stealer) || !succession_valid(candidate, stealer)) {
    candidate = before;
    if (!rearrange_targets(candidate, stealer)) return std::nullopt;
  }
  BalancingAction action{BalancingAction::Kind::append,
                         {stolen_trial_id, appended.trial_id}};
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (candidate[i].selection != before[i].selection &&
        candidate[i].trial_id != appended.trial_id) {
      action.trial_ids.push_back(candidate[i].trial_id);
    }
  }
  pending = std::move(candidate);
  return action;
}

// ---------------------------------------------------------------------------
// Classification

TrialOutcome classify_outcome(const Trial& trial,
                              const std::optional<PressEvent>& first_press,
                              std::span<const int> roster,
                              std::int64_t cue_onset_ms, Involvement involvement) {
  TrialOutcome out;
  const bool mistake = trial.selection.is_mistake;
  // Silent bystanders are scored only on mistake trials, unless every
  // participant counts as involved.
  const Label silent = (mistake || involvement == Involvement::all) ? Label::tn
                                                                    : Label::na;
  for (int id : roster) out.labels[id] = silent;

  if (!first_press) {
    if (!mistake && trial.selection.kind == TargetSelection::Kind::participant) {
      out.labels[trial.selection.participant] = Label::fn;
    }
    return out;
  }

  const int presser = first_press->participant;
  out.responder = presser;
  out.reaction_time_ms = first_press->t_ms - cue_onset_ms;
  if (mistake || trial.selection.kind != TargetSelection::Kind::participant) {
    out.labels[presser] = Label::fp;
  } else if (presser == trial.selection.participant) {
    out.labels[presser] = Label::tp;
  } else {
    out.labels[presser] = Label::fp;
    out.labels[trial.selection.participant] = Label::preempted;
  }
  return out;
}

bool validate_word(std::string_view previous, std::string_view next) {
  if (previous.empty() || next.empty()) return false;
  const auto lower = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  return lower(previous.back()) == lower(next.front());
}

// ---------------------------------------------------------------------------
// Engine

ProtocolEngine::ProtocolEngine(ExperimentPlan plan, EngineConfig config)
    : plan_(std::move(plan)), config_(config), rng_(plan_.seed ^ 0x9e3779b97f4a7c15ULL) {
  if (plan_.roster.size() < 2) {
    throw std::invalid_argument("roster needs at least two participants");
  }
  int max_id = 0;
  for (const auto& b : plan_.blocks) {
    for (const auto& t : b.trials) max_id = std::max(max_id, t.trial_id);
  }
  next_trial_id_ = max_id + 1;
}

bool ProtocolEngine::finished() const {
  return !block_ && next_block_ >= plan_.blocks.size();
}

bool ProtocolEngine::in_flight() const {
  return active_ &&
         (active_->phase == Phase::await_button || active_->phase == Phase::await_word);
}

bool ProtocolEngine::ready_for_cue() const {
  if (finished()) return false;
  if (!block_) return true;
  return active_ && active_->phase == Phase::cueing;
}

std::span<const PlannedTrial> ProtocolEngine::pending() const {
  if (!block_) return {};
  return block_->pending;
}

EngineSnapshot ProtocolEngine::snapshot() const {
  EngineSnapshot s;
  s.finished = finished();
  s.next_block = next_block_;
  if (block_) {
    s.block_id = block_->plan->block_id;
    s.block_kind = block_->plan->kind;
    s.block_condition = block_->plan->condition;
    s.pending = block_->pending.size();
  }
  s.active = active_;
  return s;
}

bool ProtocolEngine::is_participant(int id) const {
  return std::find(plan_.roster.begin(), plan_.roster.end(), id) != plan_.roster.end();
}

bool ProtocolEngine::cap_reached(std::int64_t now) const {
  return block_ && now - block_->started_ms >= block_->plan->cap_ms;
}

LogRecord ProtocolEngine::trial_record(std::string type, std::int64_t t) const {
  LogRecord r;
  r.type = std::move(type);
  r.t_ms = t;
  if (active_) {
    r.trial_id = active_->trial.trial_id;
    r.block_id = active_->trial.block_id;
    r.condition = active_->trial.condition;
    r.selection = active_->trial.selection;
  } else if (block_) {
    r.block_id = block_->plan->block_id;
  }
  return r;
}

std::vector<LogRecord> ProtocolEngine::enforce_caps(std::int64_t now_ms) {
  return on_event({EventType::tick, now_ms, 0});
}

std::vector<LogRecord> ProtocolEngine::on_event(const ProtocolEvent& event) {
  LogRecord echo;
  echo.type = std::string(to_string(event.type));
  echo.t_ms = event.t_ms;
  if (event.type == EventType::press) echo.participant = event.participant;

  if (event.t_ms < last_t_) {
    echo.label = std::string("out_of_order");
    return {echo};
  }
  const std::int64_t previous_t = last_t_;
  last_t_ = event.t_ms;

  std::vector<LogRecord> derived;
  advance_time(event.t_ms, derived);
  const std::int64_t now = event.t_ms;

  switch (event.type) {
    case EventType::tick:
      // Unlogged ticks must leave no trace, so replay can skip them.
      if (derived.empty()) {
        last_t_ = previous_t;
        return {};
      }
      break;

    case EventType::cue_onset:
      if (!block_ && !finished()) open_next_block(now, derived);
      if (active_ && active_->phase == Phase::cueing) {
        active_->phase = Phase::await_button;
        active_->cue_onset_ms = now;
        active_->deadline_ms = now + config_.timing.press_window_ms;
        const auto r = trial_record(echo.type, now);
        echo.trial_id = r.trial_id;
        echo.block_id = r.block_id;
        echo.condition = r.condition;
        echo.selection = r.selection;
        echo.label = std::string("cued");
      } else {
        echo.label = std::string("ignored");
      }
      break;

    case EventType::press: {
      if (!is_participant(event.participant)) {
        echo.label = std::string("rejected");
        break;
      }
      if (!active_ || (active_->phase != Phase::await_button &&
                       active_->phase != Phase::await_word)) {
        echo.label = std::string("ignored");
        break;
      }
      const auto r = trial_record(echo.type, now);
      echo.trial_id = r.trial_id;
      echo.block_id = r.block_id;
      echo.condition = r.condition;
      echo.rt_ms = now - active_->cue_onset_ms;
      if (active_->phase == Phase::await_word) {
        echo.label = std::string("extra");
        break;
      }
      echo.label = std::string("scoring");
      active_->scoring_press = PressEvent{event.participant, now, active_->trial.trial_id};
      active_->phase = Phase::await_word;
      active_->deadline_ms = now + config_.timing.word_window_ms;
      const auto& sel = active_->trial.selection;
      if (sel.kind == TargetSelection::Kind::participant && !sel.is_mistake &&
          event.participant != sel.participant) {
        handle_steal(now, event.participant, derived);
      }
      break;
    }

    case EventType::word_ok:
    case EventType::word_fail: {
      if (!active_ || active_->phase != Phase::await_word) {
        echo.label = std::string("ignored");
        break;
      }
      const auto r = trial_record(echo.type, now);
      echo.trial_id = r.trial_id;
      echo.block_id = r.block_id;
      echo.condition = r.condition;
      echo.participant = active_->scoring_press->participant;
      const bool ok = event.type == EventType::word_ok;
      echo.label = std::string(ok ? "accepted" : "failed");
      resolve(now, ok, derived);
      break;
    }
  }

  std::vector<LogRecord> out;
  out.reserve(derived.size() + 1);
  out.push_back(std::move(echo));
  for (auto& r : derived) out.push_back(std::move(r));
  return out;
}

void ProtocolEngine::advance_time(std::int64_t now, std::vector<LogRecord>& out) {
  if (in_flight() && now > active_->deadline_ms) {
    resolve(now, false, out);
  }
  if (block_ && cap_reached(now) && !in_flight()) {
    close_block(now, "cap", out);
  }
}

void ProtocolEngine::open_next_block(std::int64_t now, std::vector<LogRecord>& out) {
  const BlockPlan& plan = plan_.blocks[next_block_++];
  block_ = OpenBlock{&plan, now, plan.trials, static_cast<int>(plan.trials.size())};
  history_.clear();

  LogRecord r;
  r.type = "block_start";
  r.t_ms = now;
  r.block_id = plan.block_id;
  r.condition = plan.condition;
  r.label = std::string(to_string(plan.kind));
  out.push_back(std::move(r));

  if (block_->pending.empty()) {
    close_block(now, "completed", out);
  } else {
    prepare_next(now, false, out);
  }
}

void ProtocolEngine::close_block(std::int64_t now, std::string_view reason,
                                 std::vector<LogRecord>& out) {
  LogRecord r;
  r.type = "block_closed";
  r.t_ms = now;
  r.block_id = block_->plan->block_id;
  r.condition = block_->plan->condition;
  r.label = std::string(reason);
  out.push_back(std::move(r));
  // A prepared but uncued trial is dropped with the block.
  active_.reset();
  block_.reset();
}

void ProtocolEngine::prepare_next(std::int64_t now, bool recue,
                                  std::vector<LogRecord>& out) {
  auto& pending = block_->pending;
  auto& front = pending.front();
  const auto excluded = excluded_participant(history_);
  if (excluded && is_targeted(front) && front.selection.participant == *excluded) {
    auto other = std::find_if(pending.begin() + 1, pending.end(), [&](const auto& t) {
      return is_targeted(t) && t.selection.participant != *excluded;
    });
    if (other != pending.end()) {
      std::swap(front.selection, other->selection);
    } else {
      front.selection = select_next_target(history_, plan_.roster, 0.0, rng_);
    }
  }

  const PlannedTrial next = front;
  pending.erase(pending.begin());
  ActiveTrial a;
  a.trial = Trial{next.trial_id, block_->plan->block_id, next.condition,
                  next.selection, next.slot, next.appended};
  a.phase = Phase::cueing;
  a.recue = recue;
  active_ = a;
  out.push_back(trial_record(recue ? "recue" : "trial_prepared", now));
}

void ProtocolEngine::resolve(std::int64_t now, bool word_accepted,
                             std::vector<LogRecord>& out) {
  const ActiveTrial& a = *active_;
  const TrialOutcome outcome = classify_outcome(a.trial, a.scoring_press, plan_.roster,
                                                a.cue_onset_ms, config_.involvement);

  SelectionHistoryEntry entry{a.trial.selection, TrialResult::success, std::nullopt};
  if (a.scoring_press) {
    entry.actor = a.scoring_press->participant;
    entry.result = word_accepted ? TrialResult::success : TrialResult::timeout;
  } else if (a.trial.selection.is_mistake) {
    entry.result = TrialResult::silent_mistake;
  } else {
    entry.result = TrialResult::timeout;
    entry.actor = a.trial.selection.participant;
  }
  history_.push_back(entry);

  LogRecord r = trial_record("trial_resolved", now);
  r.participant = outcome.responder;
  r.label = outcome.labels;
  r.rt_ms = outcome.reaction_time_ms;
  out.push_back(std::move(r));
  active_.reset();

  if (cap_reached(now)) {
    close_block(now, "cap", out);
  } else if (block_->pending.empty()) {
    close_block(now, "completed", out);
  } else {
    prepare_next(now, entry.result == TrialResult::timeout, out);
  }
}

void ProtocolEngine::handle_steal(std::int64_t now, int stealer,
                                  std::vector<LogRecord>& out) {
  if (!config_.rebalancing) return;
  const int victim = active_->trial.selection.participant;
  const int stolen = active_->trial.trial_id;

  LogRecord r = trial_record("rebalance", now);
  r.participant = victim;
  if (now - block_->started_ms + config_.timing.max_trial_ms() > block_->plan->cap_ms) {
    r.type = "unbalanced";
    r.label = std::string("cap");
    out.push_back(std::move(r));
    return;
  }

  PlannedTrial extra;
  extra.trial_id = next_trial_id_;
  extra.slot = block_->next_slot;
  extra.condition = active_->trial.condition;
  extra.appended = true;
  auto action = rebalance(block_->pending, stealer, victim, stolen, extra);
  if (!action) {
    r.type = "unbalanced";
    r.label = std::string("succession");
    out.push_back(std::move(r));
    return;
  }
  if (action->kind == BalancingAction::Kind::append) {
    ++next_trial_id_;
    ++block_->next_slot;
  }
  r.balancing = *action;
  out.push_back(std::move(r));
}

}  // namespace mirroreyes
