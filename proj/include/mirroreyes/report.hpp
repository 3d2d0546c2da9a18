#pragma once

// Turns a trial log and an optional questionnaire into result tables.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirroreyes/analytics.hpp"

namespace mirroreyes {

struct AnalysisOptions {
  PosthocMethod posthoc = PosthocMethod::tukey_hsd;
  UeqKey ueq_key = UeqKey::standard;
};

struct ConditionCell {
  DisplayCondition condition = DisplayCondition::eye_only;
  BlockType block_type = BlockType::single;
  ConfusionCounts pooled;
  /// Participants with a defined accuracy in this cell.
  std::vector<double> participant_accuracy;
  std::vector<double> rt_samples_ms;
};

struct UeqConditionSummary {
  DisplayCondition condition = DisplayCondition::eye_only;
  std::size_t n = 0;
  RtSummary pragmatic;
  RtSummary hedonic;
  RtSummary overall;
  UeqBand band = UeqBand::neutral;
  std::optional<double> alpha_pragmatic;
  std::optional<double> alpha_hedonic;
};

struct AnalysisResult {
  std::vector<ParticipantStats> participants;
  /// Condition x block type, in enumeration order.
  std::vector<ConditionCell> cells;
  /// Pooled over both block types.
  std::map<DisplayCondition, ConfusionCounts> by_condition;
  std::map<DisplayCondition, std::vector<double>> rt_by_condition;
  int mistake_trials = 0;
  int resolved_trials = 0;
  std::map<BlockKind, std::pair<int, int>> mistakes_by_block_kind;

  std::optional<AnovaTable> accuracy_anova;
  std::optional<AnovaTable> rt_anova;
  std::vector<std::string> diagnostics;
  std::optional<PairwiseComparison> accuracy_posthoc;

  std::vector<UeqResponse> ueq_responses;
  std::vector<UeqScores> ueq_scores;
  std::vector<UeqConditionSummary> ueq_summary;
  std::map<std::string, AnovaTable> ueq_anova;
  std::map<std::string, PairwiseComparison> ueq_posthoc;

  const ConditionCell& cell(DisplayCondition c, BlockType b) const;
  std::optional<double> condition_accuracy(DisplayCondition c) const;
  /// Fraction of resolved trials that were mistake trials, per block kind.
  std::optional<double> mistake_rate(BlockKind k) const;
};

AnalysisResult analyze(const ParsedLog& log,
                       const std::vector<UeqResponse>& questionnaire = {},
                       const AnalysisOptions& options = {});

/// Writes CSV tables, plot series and report.txt into `dir`.
void write_analysis(const AnalysisResult& result, const std::filesystem::path& dir);

}  // namespace mirroreyes
