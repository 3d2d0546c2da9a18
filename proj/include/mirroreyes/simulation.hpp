#pragma once

// Headless sessions on a virtual clock, and log replay.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirroreyes/session_config.hpp"
#include "mirroreyes/trial_log.hpp"

namespace mirroreyes {

/// How a bot turns its correctness probability into decisions.
enum class BotSampling {
  /// Independent draw per decision.
  iid,
  /// Error diffusion: errors are spread evenly so that the realized error
  /// fraction tracks the target at every prefix.
  stratified,
};
std::string_view to_string(BotSampling s);
BotSampling parse_bot_sampling(std::string_view s);

struct BotProfile {
  int participant = 0;
  /// Probability of the correct response, indexed by DisplayCondition.
  std::array<double, 3> correctness{0.82, 0.91, 0.94};
  double rt_mean_ms = 1300.0;
  double rt_sd_ms = 250.0;
  double word_latency_mean_ms = 2000.0;
  double word_latency_sd_ms = 500.0;
  /// Probability that an uttered word is rejected.
  double word_fail_rate = 0.0;

  void validate() const;
};

struct SimulationOptions {
  BotSampling sampling = BotSampling::iid;
  /// Share of targeted-trial errors that become steals rather than misses.
  double steal_share = 0.5;
  std::int64_t inter_trial_min_ms = 500;
  std::int64_t inter_trial_max_ms = 1000;
  std::int64_t inter_block_ms = 10'000;
};

struct SimulationSetup {
  SessionConfig config;
  std::vector<BotProfile> bots;
  SimulationOptions options;

  /// One default bot per roster member.
  static SimulationSetup defaults(const SessionConfig& config);

  /// Bots must cover the roster exactly once each.
  void validate() const;
};

void to_json(Json& j, const BotProfile& b);
void from_json(const Json& j, BotProfile& b);
void to_json(Json& j, const SimulationOptions& o);
void from_json(const Json& j, SimulationOptions& o);

/// Reads a session config plus optional "bots" and "simulation" sections.
SimulationSetup load_simulation_setup(const std::filesystem::path& path);
SimulationSetup simulation_setup_from_json(const Json& j);

/// Header config stored in the log: the session config under "session" and
/// the bot setup under "simulation".
Json header_config(const SimulationSetup& setup);

struct SimulationSummary {
  std::size_t records = 0;
  std::int64_t virtual_end_ms = 0;
  int trials = 0;
  int mistake_trials = 0;
};

/// Runs the full plan with bots; writes the header and every record to `log`.
/// `seed` replaces the config seed.
SimulationSummary simulate(const SimulationSetup& setup, std::uint64_t seed,
                           std::ostream& log);

struct ReplayDivergence {
  /// Input event whose batch diverged.
  std::size_t event_line = 0;
  /// First record line that differs.
  std::size_t record_line = 0;
  std::string expected;
  std::string actual;
};

struct ReplayReport {
  std::size_t events = 0;
  std::size_t records_checked = 0;
  bool truncated = false;
  bool finished = false;
  std::optional<ReplayDivergence> divergence;

  bool ok() const { return !divergence; }
};

/// Rebuilds the engine from the header and re-drives it with the logged
/// input events, comparing every produced line with the logged one.
ReplayReport replay(const ParsedLog& log);

/// Engine configuration recorded in a log header.
SessionConfig session_from_header(const Json& header);

}  // namespace mirroreyes
