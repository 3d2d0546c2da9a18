#include <doctest.h>

#include <sstream>

#include "mirroreyes/report.hpp"
#include "mirroreyes/simulation.hpp"

using namespace mirroreyes;

namespace {

std::string simulate_text(const SimulationSetup& setup, std::uint64_t seed) {
  std::ostringstream out;
  simulate(setup, seed, out);
  return out.str();
}

ParsedLog parse(const std::string& text) {
  std::istringstream in(text);
  return read_trial_log(in);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

// Replaces the value of "t_ms" on one line.
std::string retime(const std::string& line, std::int64_t t) {
  const auto k = line.find("\"t_ms\":") + 7;
  const auto e = line.find(',', k);
  return line.substr(0, k) + std::to_string(t) + line.substr(e);
}

}  // namespace

TEST_CASE("the same seed gives byte-identical logs") {
  const auto setup = SimulationSetup::defaults(SessionConfig{});
  const auto a = simulate_text(setup, 11);
  CHECK(a == simulate_text(setup, 11));
  CHECK(a != simulate_text(setup, 12));
}

TEST_CASE("a simulated session covers the full plan and replays cleanly") {
  const auto setup = SimulationSetup::defaults(SessionConfig{});
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto text = simulate_text(setup, seed);
    const auto log = parse(text);
    REQUIRE(log.config);
    const auto r = replay(log);
    CHECK(r.ok());
    CHECK(r.finished);
    CHECK_FALSE(r.truncated);
    CHECK(r.records_checked == log.lines.size());
    CHECK(succession_violations(log).empty());

    int practice = 0, single = 0, mixed = 0;
    for (const auto& l : log.lines) {
      if (l.record.type != "block_start") continue;
      const auto kind = std::get<std::string>(l.record.label);
      practice += kind == "practice";
      single += kind == "single";
      mixed += kind == "mixed";
    }
    CHECK(practice == 3);
    CHECK(single == 3);
    CHECK(mixed == 1);

    const auto result = analyze(log);
    CHECK(result.cells.size() == 6);
    for (auto c : kAllConditions) CHECK(result.condition_accuracy(c));
  }
}

TEST_CASE("every resolved trial labels every participant") {
  const auto log = parse(simulate_text(SimulationSetup::defaults(SessionConfig{}), 5));
  int resolved = 0;
  for (const auto& l : log.lines) {
    const auto& r = l.record;
    if (r.type != "trial_resolved") continue;
    ++resolved;
    const auto& labels = std::get<std::map<int, Label>>(r.label);
    REQUIRE(labels.size() == 3);
    int positives = 0;
    for (const auto& [id, lab] : labels) positives += lab == Label::tp || lab == Label::fp;
    REQUIRE(positives == (r.rt_ms ? 1 : 0));
    if (r.rt_ms) {
      REQUIRE(*r.rt_ms >= 0);
      REQUIRE(*r.rt_ms <= 3000);
    }
  }
  CHECK(resolved > 150);
}

TEST_CASE("mistake fraction over a thousand mixed trials") {
  SessionConfig config;
  config.plan.include_practice = false;
  config.plan.include_part1 = false;
  config.plan.part2_trials_per_condition = 334;
  config.plan.part2_cap_ms = 100'000'000;
  const auto setup = SimulationSetup::defaults(config);
  for (std::uint64_t seed : {1, 2}) {
    const auto result = analyze(parse(simulate_text(setup, seed)));
    REQUIRE(result.resolved_trials >= 1000);
    const double rate = *result.mistake_rate(BlockKind::mixed);
    INFO("seed " << seed << " rate " << rate);
    CHECK(rate >= 0.16);
    CHECK(rate <= 0.24);
  }
}

TEST_CASE("a retimed press diverges at that event") {
  auto lines = lines_of(simulate_text(SimulationSetup::defaults(SessionConfig{}), 3));
  std::size_t target = 0;
  for (std::size_t i = 1; i < lines.size() && !target; ++i) {
    if (lines[i].find("\"type\":\"press\"") != std::string::npos &&
        lines[i].find("\"scoring\"") != std::string::npos && i > 40) {
      target = i;
    }
  }
  REQUIRE(target);
  const auto t = parse_record(lines[target]).t_ms;
  lines[target] = retime(lines[target], t - 7);
  const auto r = replay(parse(join(lines)));
  REQUIRE(r.divergence);
  CHECK(r.divergence->event_line == target + 1);
  CHECK(r.divergence->record_line == target + 1);
}

TEST_CASE("a retimed derived record is reported at its own line") {
  auto lines = lines_of(simulate_text(SimulationSetup::defaults(SessionConfig{}), 3));
  std::size_t target = 0;
  for (std::size_t i = 60; i < lines.size() && !target; ++i) {
    if (lines[i].find("\"type\":\"trial_resolved\"") != std::string::npos) target = i;
  }
  REQUIRE(target);
  lines[target] = retime(lines[target], parse_record(lines[target]).t_ms + 1);
  const auto r = replay(parse(join(lines)));
  REQUIRE(r.divergence);
  CHECK(r.divergence->record_line == target + 1);
  CHECK(r.divergence->event_line < target + 1);
  CHECK(r.divergence->actual == lines[target]);
}

TEST_CASE("a truncated log replays cleanly up to the cut") {
  const auto text = simulate_text(SimulationSetup::defaults(SessionConfig{}), 4);
  for (std::size_t cut : {text.size() / 3, text.size() / 2 + 17, text.size() - 5}) {
    const auto log = parse(text.substr(0, cut));
    const auto r = replay(log);
    CHECK(r.ok());
    CHECK_FALSE(r.finished);
    CHECK(r.truncated);
    CHECK(r.records_checked <= log.lines.size());
  }
  // Cut exactly at a line boundary: still partial, never a divergence.
  const auto at_line = text.substr(0, text.rfind('\n', text.size() / 2) + 1);
  const auto r = replay(parse(at_line));
  CHECK(r.ok());
  CHECK(r.truncated);
}

TEST_CASE("bot setup parses from JSON and rejects bad profiles") {
  const auto setup = simulation_setup_from_json(Json::parse(R"({
    "session": {"seed": 4},
    "bots": [{"participant": 1, "correctness": 1},
             {"participant": 2, "correctness": 1},
             {"participant": 3, "correctness": {"eye_only": 1, "mirror_only": 1, "mirror_eye": 1}}],
    "simulation": {"sampling": "stratified"}})"));
  CHECK(setup.options.sampling == BotSampling::stratified);
  REQUIRE(setup.bots.size() == 3);
  CHECK(setup.bots[1].correctness[2] == 1.0);

  // Perfect bots: every scored label is correct.
  std::ostringstream out;
  simulate(setup, 4, out);
  const auto result = analyze(parse(out.str()));
  for (auto c : kAllConditions) CHECK(*result.condition_accuracy(c) == 1.0);

  BotProfile bad;
  bad.participant = 1;
  bad.correctness = {0.5, 1.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS(simulation_setup_from_json(Json::parse(R"({"bots": [{"participant": 9}]})")));
  CHECK_THROWS(simulation_setup_from_json(Json::parse(R"({"sesion": {"seed": 4}})")));
  CHECK_THROWS(simulation_setup_from_json(Json::parse(R"({"session": {}, "seed": 4})")));
}

TEST_CASE("session keys may be nested or top-level") {
  const auto nested = simulation_setup_from_json(
      Json::parse(R"({"session": {"seed": 4, "plan": {"mistake_scheduling": "quota"}}})"));
  const auto flat =
      simulation_setup_from_json(Json::parse(R"({"seed": 4, "plan": {"mistake_scheduling": "quota"}})"));
  CHECK(nested.config.seed == 4);
  CHECK(nested.config.plan.mistake_scheduling == MistakeScheduling::quota);
  CHECK(Json(nested.config) == Json(flat.config));

  // A log header is itself a valid setup.
  std::ostringstream out;
  simulate(nested, 4, out);
  const auto log = parse(out.str());
  const auto again = simulation_setup_from_json(*log.config);
  CHECK(Json(again.config) == Json(nested.config));
  CHECK(again.bots.size() == nested.bots.size());
}
