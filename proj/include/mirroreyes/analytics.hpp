#pragma once

// Offline measures: identification accuracy, reaction times, ANOVA with
// post-hoc comparisons, UEQ-S scale scores and Cronbach's alpha.

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mirroreyes/compositor.hpp"
#include "mirroreyes/trial_log.hpp"

namespace mirroreyes {

struct ConfusionCounts {
  int tp = 0;
  int tn = 0;
  int fp = 0;
  int fn = 0;

  int total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

/// (TP + TN) / (TP + TN + FP + FN); empty when nothing was scored.
std::optional<double> accuracy(const ConfusionCounts& c);

struct RtSummary {
  std::size_t n = 0;
  std::optional<double> mean;
  /// Sample standard deviation; empty below two samples.
  std::optional<double> sd;
};

RtSummary summarize_rt(std::span<const double> samples);

enum class BlockType { single, mixed };
std::string_view to_string(BlockType b);

struct ParticipantStats {
  int participant_id = 0;
  DisplayCondition condition = DisplayCondition::eye_only;
  BlockType block_type = BlockType::single;
  ConfusionCounts counts;
  /// Milliseconds, one per TP or FP.
  std::vector<double> rt_samples_ms;
};

/// One entry per participant x condition x block type seen in the log.
/// Practice blocks are skipped.
std::vector<ParticipantStats> collect_stats(const ParsedLog& log);

struct AnovaRow {
  std::string name;
  double df = 0.0;
  double sum_sq = 0.0;
  double mean_sq = 0.0;
  std::optional<double> f;
  std::optional<double> p;
};

struct AnovaTable {
  /// Factor rows first, residual last.
  std::vector<AnovaRow> rows;
  double total_sum_sq = 0.0;
  /// Residual variance is zero, so F and p are undefined.
  bool zero_residual = false;

  const AnovaRow& row(std::string_view name) const;
};

/// Fixed-effects two-way ANOVA with interaction. Levels are ordered by first
/// appearance. Throws std::invalid_argument for empty or unequal cells.
AnovaTable two_way_anova(std::span<const double> values,
                         std::span<const std::string> factor_a,
                         std::span<const std::string> factor_b,
                         const std::string& name_a = "A",
                         const std::string& name_b = "B");

AnovaTable one_way_anova(std::span<const double> values,
                         std::span<const std::string> groups,
                         const std::string& name = "Group");

/// CDF of the studentized range for `k` means and `df` error degrees of
/// freedom; df = infinity is allowed.
double ptukey(double q, int k, double df);

enum class PosthocMethod { tukey_hsd, bonferroni };
std::string_view to_string(PosthocMethod m);
PosthocMethod parse_posthoc_method(std::string_view s);

struct PairwiseComparison {
  PosthocMethod method = PosthocMethod::tukey_hsd;
  std::vector<std::string> groups;
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  /// Symmetric; the diagonal is empty.
  std::vector<std::vector<std::optional<double>>> p;
};

/// Throws std::invalid_argument for fewer than two groups or a group with
/// fewer than two observations.
PairwiseComparison posthoc_pairwise(std::span<const double> values,
                                    std::span<const std::string> groups,
                                    PosthocMethod method = PosthocMethod::tukey_hsd);

enum class UeqKey {
  /// Published UEQ-S key: negative pole on the left for all eight items.
  standard,
  /// Item 4 reversed, following the printed "clear / confusing" order.
  as_printed,
};
std::string_view to_string(UeqKey k);
UeqKey parse_ueq_key(std::string_view s);

enum class UeqBand { negative, neutral, positive };
std::string_view to_string(UeqBand b);
UeqBand ueq_band(double mean);

struct UeqResponse {
  std::string participant_id;
  DisplayCondition condition = DisplayCondition::eye_only;
  std::array<int, 8> items{};
};

struct UeqScores {
  double pragmatic_mean = 0.0;
  double hedonic_mean = 0.0;
  double overall_mean = 0.0;
  UeqBand band = UeqBand::neutral;
};

/// Items mapped to -3..+3. Throws std::invalid_argument for raw values
/// outside 1..7.
std::array<double, 8> ueq_transform(const UeqResponse& r, UeqKey key = UeqKey::standard);
UeqScores ueq_score(const UeqResponse& r, UeqKey key = UeqKey::standard);

/// Header `participant,condition,item1,...,item8`. Errors name the line.
std::vector<UeqResponse> read_ueq_csv(std::istream& in);

/// Rows are respondents. Empty when the row-sum variance is zero.
std::optional<double> cronbach_alpha(const std::vector<std::vector<double>>& items);

}  // namespace mirroreyes
