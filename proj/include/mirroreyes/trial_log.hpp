#pragma once

// JSON-lines trial log. The first line is a session_start header whose
// "config" key holds everything needed to rebuild the engine; every other
// line is one LogRecord with the fixed ten keys.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirroreyes/json_io.hpp"
#include "mirroreyes/protocol.hpp"

namespace mirroreyes {

inline constexpr const char* kSessionStartType = "session_start";

std::string serialize_record(const LogRecord& record);

/// Throws std::invalid_argument naming the missing or extra key.
LogRecord parse_record(const std::string& line);

class TrialLogWriter {
public:
  explicit TrialLogWriter(std::ostream& out) : out_(out) {}

  void write_header(const Json& config, std::int64_t t_ms = 0);
  void write(const LogRecord& record);
  void write(const std::vector<LogRecord>& records);

private:
  std::ostream& out_;
};

struct LogLine {
  std::size_t line_number = 0;
  std::string text;
  LogRecord record;
};

struct ParsedLog {
  std::optional<Json> config;
  std::vector<LogLine> lines;
  /// Set when the final line was cut off mid-object.
  bool truncated = false;
};

/// Reads a whole log. Malformed lines throw std::runtime_error with the line
/// number; an unterminated final line is treated as truncation.
ParsedLog read_trial_log(std::istream& in);

struct SuccessionViolation {
  std::size_t line_number = 0;
  int participant = 0;
};

/// Scans a log for cues that target the participant barred by the
/// succession rule (the last speaker, or the participant who just timed out
/// on the immediate re-cue). History restarts at every block.
std::vector<SuccessionViolation> succession_violations(const ParsedLog& log);

}  // namespace mirroreyes
