#include "mirroreyes/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace mirroreyes {

std::string_view to_string(BotSampling s) {
  return s == BotSampling::stratified ? "stratified" : "iid";
}

BotSampling parse_bot_sampling(std::string_view s) {
  if (s == "iid") return BotSampling::iid;
  if (s == "stratified") return BotSampling::stratified;
  throw std::invalid_argument("unknown bot sampling: " + std::string(s));
}

void BotProfile::validate() const {
  for (double p : correctness) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("correctness must be in [0, 1]");
  }
  if (!(word_fail_rate >= 0.0 && word_fail_rate <= 1.0)) {
    throw std::invalid_argument("word_fail_rate must be in [0, 1]");
  }
  if (!(rt_sd_ms >= 0.0) || !(word_latency_sd_ms >= 0.0)) {
    throw std::invalid_argument("standard deviations must be non-negative");
  }
}

SimulationSetup SimulationSetup::defaults(const SessionConfig& config) {
  SimulationSetup s;
  s.config = config;
  for (int id : config.roster) {
    BotProfile b;
    b.participant = id;
    s.bots.push_back(b);
  }
  return s;
}

void to_json(Json& j, const BotProfile& b) {
  Json corr = Json::object();
  for (auto c : kAllConditions) {
    corr[std::string(to_string(c))] = b.correctness[static_cast<std::size_t>(c)];
  }
  j = Json{{"participant", b.participant},
           {"correctness", std::move(corr)},
           {"rt_mean_ms", b.rt_mean_ms},
           {"rt_sd_ms", b.rt_sd_ms},
           {"word_latency_mean_ms", b.word_latency_mean_ms},
           {"word_latency_sd_ms", b.word_latency_sd_ms},
           {"word_fail_rate", b.word_fail_rate}};
}

void from_json(const Json& j, BotProfile& b) {
  b.participant = j.at("participant").get<int>();
  if (const auto it = j.find("correctness"); it != j.end()) {
    if (it->is_number()) {
      b.correctness.fill(it->get<double>());
    } else {
      for (const auto& [name, value] : it->items()) {
        b.correctness[static_cast<std::size_t>(parse_condition(name))] = value.get<double>();
      }
    }
  }
  b.rt_mean_ms = j.value("rt_mean_ms", b.rt_mean_ms);
  b.rt_sd_ms = j.value("rt_sd_ms", b.rt_sd_ms);
  b.word_latency_mean_ms = j.value("word_latency_mean_ms", b.word_latency_mean_ms);
  b.word_latency_sd_ms = j.value("word_latency_sd_ms", b.word_latency_sd_ms);
  b.word_fail_rate = j.value("word_fail_rate", b.word_fail_rate);
  b.validate();
}

void to_json(Json& j, const SimulationOptions& o) {
  j = Json{{"sampling", to_string(o.sampling)},
           {"steal_share", o.steal_share},
           {"inter_trial_min_ms", o.inter_trial_min_ms},
           {"inter_trial_max_ms", o.inter_trial_max_ms},
           {"inter_block_ms", o.inter_block_ms}};
}

void from_json(const Json& j, SimulationOptions& o) {
  if (j.contains("sampling")) o.sampling = parse_bot_sampling(j.at("sampling").get<std::string>());
  o.steal_share = j.value("steal_share", o.steal_share);
  o.inter_trial_min_ms = j.value("inter_trial_min_ms", o.inter_trial_min_ms);
  o.inter_trial_max_ms = j.value("inter_trial_max_ms", o.inter_trial_max_ms);
  o.inter_block_ms = j.value("inter_block_ms", o.inter_block_ms);
  if (!(o.steal_share >= 0.0 && o.steal_share <= 1.0)) {
    throw std::invalid_argument("steal_share must be in [0, 1]");
  }
  if (o.inter_trial_min_ms < 1 || o.inter_trial_max_ms < o.inter_trial_min_ms ||
      o.inter_block_ms < 0) {
    throw std::invalid_argument("inter-trial interval must satisfy 1 <= min <= max");
  }
}

void SimulationSetup::validate() const {
  config.validate();
  std::set<int> seen;
  for (const auto& b : bots) {
    b.validate();
    if (std::find(config.roster.begin(), config.roster.end(), b.participant) ==
        config.roster.end()) {
      throw std::invalid_argument("bot for participant " + std::to_string(b.participant) +
                                  " who is not on the roster");
    }
    if (!seen.insert(b.participant).second) {
      throw std::invalid_argument("two bots for participant " + std::to_string(b.participant));
    }
  }
  for (int id : config.roster) {
    if (!seen.contains(id)) throw std::invalid_argument("no bot for participant " + std::to_string(id));
  }
}

SimulationSetup simulation_setup_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("setup must be a JSON object");
  const Json known = Json(SessionConfig{});
  for (const auto& [key, value] : j.items()) {
    if (key != "session" && key != "bots" && key != "simulation" && !known.contains(key)) {
      throw std::invalid_argument("unknown setup key: " + key);
    }
  }
  const auto nested = j.find("session");
  if (nested != j.end() && j.size() > 1 + j.count("bots") + j.count("simulation")) {
    throw std::invalid_argument("session keys must be either nested or top-level, not both");
  }
  SessionConfig config = (nested != j.end() ? *nested : j).get<SessionConfig>();
  config.validate();
  SimulationSetup setup = SimulationSetup::defaults(config);
  if (const auto it = j.find("bots"); it != j.end()) {
    setup.bots = it->get<std::vector<BotProfile>>();
  }
  if (const auto it = j.find("simulation"); it != j.end()) {
    setup.options = it->get<SimulationOptions>();
  }
  setup.validate();
  return setup;
}

SimulationSetup load_simulation_setup(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return simulation_setup_from_json(Json::parse(in, nullptr, true, true));
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Json header_config(const SimulationSetup& setup) {
  return Json{{"session", setup.config},
              {"bots", setup.bots},
              {"simulation", setup.options}};
}

SessionConfig session_from_header(const Json& header) {
  const auto it = header.find("session");
  if (it == header.end()) throw std::invalid_argument("log header has no session config");
  SessionConfig c = it->get<SessionConfig>();
  c.validate();
  return c;
}

namespace {

class Decider {
public:
  Decider(BotSampling mode, Rng& rng) : mode_(mode), rng_(rng) {}

  /// True with probability `rate` (iid) or on schedule (stratified).
  bool draw(const std::string& stream, double rate) {
    if (mode_ == BotSampling::iid) return rng_.bernoulli(rate);
    auto it = acc_.find(stream);
    if (it == acc_.end()) it = acc_.emplace(stream, rng_.uniform(-0.5, 0.5)).first;
    it->second += rate;
    if (it->second >= 0.5) {
      it->second -= 1.0;
      return true;
    }
    return false;
  }

private:
  BotSampling mode_;
  Rng& rng_;
  std::map<std::string, double> acc_;
};

std::int64_t truncated_normal_ms(Rng& rng, double mean, double sd, std::int64_t max_ms) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto v = static_cast<std::int64_t>(std::lround(rng.normal(mean, sd)));
    if (v >= 1 && v <= max_ms) return v;
  }
  return std::clamp(static_cast<std::int64_t>(std::lround(mean)), std::int64_t{1}, max_ms);
}

}  // namespace

SimulationSummary simulate(const SimulationSetup& input, std::uint64_t seed,
                           std::ostream& log) {
  SimulationSetup setup = input;
  setup.config.seed = seed;
  setup.config.validate();
  setup.validate();
  std::map<int, BotProfile> bots;
  for (const auto& b : setup.bots) bots[b.participant] = b;

  ProtocolEngine engine(plan_experiment(seed, setup.config.roster, setup.config.plan),
                        setup.config.engine);
  TrialLogWriter writer(log);
  writer.write_header(header_config(setup));

  Rng rng(seed ^ 0xb0b5b0b5b0b5b0b5ULL);
  Decider decide(setup.options.sampling, rng);
  const auto& roster = setup.config.roster;
  const auto& timing = setup.config.engine.timing;

  SimulationSummary summary;
  auto emit = [&](EventType type, std::int64_t t, int participant = 0) {
    const auto records = engine.on_event({type, t, participant});
    writer.write(records);
    summary.records += records.size();
  };

  std::int64_t t = 0;
  bool first = true;
  while (!engine.finished()) {
    if (!engine.snapshot().block_id) {
      t += first ? 0 : setup.options.inter_block_ms;
    }
    first = false;
    t += setup.options.inter_trial_min_ms +
         static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(
             setup.options.inter_trial_max_ms - setup.options.inter_trial_min_ms + 1)));
    const bool had_block = engine.snapshot().block_id.has_value();
    emit(EventType::tick, t);
    if (engine.finished()) break;
    // A cap that closed the block earns the inter-block gap first.
    if (had_block && !engine.snapshot().block_id) continue;

    emit(EventType::cue_onset, t);
    const auto snap = engine.snapshot();
    if (!snap.active || snap.active->phase != Phase::await_button) {
      throw std::logic_error("cue did not start a trial");
    }
    const Trial& trial = snap.active->trial;
    const auto cond = static_cast<std::size_t>(trial.condition);
    const std::string cond_key = std::string(to_string(trial.condition));
    ++summary.trials;

    std::optional<int> presser;
    if (trial.selection.is_mistake) {
      ++summary.mistake_trials;
      // Chance that anyone presses, chosen so each silent bystander is right
      // with its own correctness on average.
      double miss_sum = 0.0;
      for (int id : roster) miss_sum += 1.0 - bots[id].correctness[cond];
      const double q = std::min(1.0, miss_sum);
      if (decide.draw("mistake:" + cond_key, q) && miss_sum > 0.0) {
        double u = rng.uniform() * miss_sum;
        for (int id : roster) {
          u -= 1.0 - bots[id].correctness[cond];
          presser = id;
          if (u < 0.0) break;
        }
      }
    } else if (trial.selection.kind == TargetSelection::Kind::participant) {
      const int target = trial.selection.participant;
      const double err = 1.0 - bots[target].correctness[cond];
      if (!decide.draw("target:" + std::to_string(target) + ":" + cond_key, err)) {
        presser = target;
      } else if (decide.draw("steal", setup.options.steal_share)) {
        std::vector<int> others;
        for (int id : roster) {
          if (id != target) others.push_back(id);
        }
        presser = others[rng.index(others.size())];
      }
    }

    if (presser) {
      const BotProfile& bot = bots[*presser];
      const std::int64_t rt =
          truncated_normal_ms(rng, bot.rt_mean_ms, bot.rt_sd_ms, timing.press_window_ms);
      const std::int64_t latency = truncated_normal_ms(
          rng, bot.word_latency_mean_ms, bot.word_latency_sd_ms, timing.word_window_ms);
      emit(EventType::press, t + rt, *presser);
      t += rt + latency;
      const bool fail = bot.word_fail_rate > 0.0 && rng.bernoulli(bot.word_fail_rate);
      emit(fail ? EventType::word_fail : EventType::word_ok, t);
    } else {
      t = snap.active->deadline_ms + 1;
      emit(EventType::tick, t);
    }
  }
  summary.virtual_end_ms = t;
  log.flush();
  return summary;
}

ReplayReport replay(const ParsedLog& log) {
  if (!log.config) throw std::invalid_argument("log has no session_start header");
  const SessionConfig config = session_from_header(*log.config);
  ProtocolEngine engine(plan_experiment(config.seed, config.roster, config.plan),
                        config.engine);

  ReplayReport report;
  report.truncated = log.truncated;
  const auto& lines = log.lines;
  std::size_t i = 0;
  while (i < lines.size()) {
    const LogLine& line = lines[i];
    const auto type = parse_event_type(line.record.type);
    if (!type) {
      report.divergence = ReplayDivergence{line.line_number, line.line_number, "",
                                           line.text};
      return report;
    }
    ++report.events;
    const auto produced = engine.on_event(
        {*type, line.record.t_ms, line.record.participant.value_or(0)});
    if (produced.empty()) {
      report.divergence = ReplayDivergence{line.line_number, line.line_number, "",
                                           line.text};
      return report;
    }
    for (std::size_t k = 0; k < produced.size(); ++k) {
      if (i + k >= lines.size()) {
        // The log ends inside this batch.
        report.truncated = true;
        return report;
      }
      const std::string expected = serialize_record(produced[k]);
      const LogLine& logged = lines[i + k];
      if (expected != logged.text) {
        report.divergence =
            ReplayDivergence{line.line_number, logged.line_number, expected, logged.text};
        return report;
      }
      ++report.records_checked;
    }
    i += produced.size();
  }
  report.finished = engine.finished();
  if (!report.finished) report.truncated = true;
  return report;
}

}  // namespace mirroreyes
