#include "mirroreyes/trial_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

namespace mirroreyes {

namespace {

constexpr std::array<const char*, 10> kRecordKeys = {
    "type",      "t_ms",        "trial_id", "block_id", "condition",
    "selection", "participant", "label",    "rt_ms",    "balancing"};

void check_keys(const Json& j, bool header) {
  for (const char* key : kRecordKeys) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing key: ") + key);
  }
  const std::size_t expected = kRecordKeys.size() + (header ? 1 : 0);
  if (j.size() != expected) {
    for (const auto& [key, value] : j.items()) {
      bool known = header && key == "config";
      for (const char* k : kRecordKeys) known = known || key == k;
      if (!known) throw std::invalid_argument("unexpected key: " + key);
    }
  }
}

}  // namespace

std::string serialize_record(const LogRecord& record) {
  return dump_line(Json(record));
}

LogRecord parse_record(const std::string& line) {
  const Json j = Json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("log line is not an object");
  check_keys(j, false);
  return j.get<LogRecord>();
}

void TrialLogWriter::write_header(const Json& config, std::int64_t t_ms) {
  LogRecord header;
  header.type = kSessionStartType;
  header.t_ms = t_ms;
  Json j = header;
  j["config"] = config;
  out_ << dump_line(j) << '\n';
}

void TrialLogWriter::write(const LogRecord& record) {
  out_ << serialize_record(record) << '\n';
}

void TrialLogWriter::write(const std::vector<LogRecord>& records) {
  for (const auto& r : records) write(r);
  out_.flush();
}

ParsedLog read_trial_log(std::istream& in) {
  ParsedLog log;
  std::string text;
  std::size_t line_number = 0;
  while (std::getline(in, text)) {
    ++line_number;
    const bool terminated = !in.eof();
    if (text.empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      if (!terminated) {
        log.truncated = true;
        break;
      }
      throw std::runtime_error("line " + std::to_string(line_number) +
                               ": invalid JSON: " + e.what());
    }
    try {
      if (!j.is_object()) throw std::invalid_argument("not an object");
      const bool header = j.value("type", "") == kSessionStartType;
      check_keys(j, header);
      if (header) {
        if (line_number != 1 || log.config) {
          throw std::invalid_argument("session_start must be the first line");
        }
        log.config = j.at("config");
        continue;
      }
      log.lines.push_back({line_number, text, j.get<LogRecord>()});
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return log;
}

std::vector<SuccessionViolation> succession_violations(const ParsedLog& log) {
  std::vector<SuccessionViolation> out;
  // Barred participant for the next cue, and whether the bar lapses after it.
  bool has_bar = false;
  int barred = 0;
  bool bar_is_timeout = false;
  std::set<int> accepted;
  std::optional<int> block;

  for (const auto& line : log.lines) {
    const LogRecord& r = line.record;
    // The opening cue's echo precedes its block_start record.
    if (r.block_id && r.block_id != block) {
      block = r.block_id;
      has_bar = false;
      accepted.clear();
    }
    if (r.type == "word_ok" && r.trial_id &&
               std::get_if<std::string>(&r.label) &&
               std::get<std::string>(r.label) == "accepted") {
      accepted.insert(*r.trial_id);
    } else if (r.type == "cue_onset" && r.selection &&
               std::get_if<std::string>(&r.label) &&
               std::get<std::string>(r.label) == "cued") {
      const auto& sel = *r.selection;
      if (sel.kind == TargetSelection::Kind::participant && has_bar &&
          sel.participant == barred) {
        out.push_back({line.line_number, sel.participant});
      }
    } else if (r.type == "trial_resolved" && r.selection && r.trial_id) {
      if (r.participant) {
        has_bar = true;
        barred = *r.participant;
        bar_is_timeout = !accepted.contains(*r.trial_id);
      } else if (!r.selection->is_mistake) {
        has_bar = true;
        barred = r.selection->participant;
        bar_is_timeout = true;
      } else if (bar_is_timeout) {
        // A silent mistake trial ends the immediate re-cue.
        has_bar = false;
      }
      continue;
    }
    if (r.type == "cue_onset" && bar_is_timeout && has_bar) {
      // The re-cue has been issued; the timed-out participant is eligible again.
      has_bar = false;
    }
  }
  return out;
}

}  // namespace mirroreyes
