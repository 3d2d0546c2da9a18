#include "mirroreyes/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mirroreyes {

const ConditionCell& AnalysisResult::cell(DisplayCondition c, BlockType b) const {
  for (const auto& x : cells) {
    if (x.condition == c && x.block_type == b) return x;
  }
  throw std::out_of_range("no such cell");
}

std::optional<double> AnalysisResult::condition_accuracy(DisplayCondition c) const {
  const auto it = by_condition.find(c);
  if (it == by_condition.end()) return std::nullopt;
  return accuracy(it->second);
}

std::optional<double> AnalysisResult::mistake_rate(BlockKind k) const {
  const auto it = mistakes_by_block_kind.find(k);
  if (it == mistakes_by_block_kind.end() || it->second.second == 0) return std::nullopt;
  return static_cast<double>(it->second.first) / it->second.second;
}

namespace {

constexpr BlockType kBlockTypes[] = {BlockType::single, BlockType::mixed};

ConditionCell& cell_of(std::vector<ConditionCell>& cells, DisplayCondition c, BlockType b) {
  for (auto& x : cells) {
    if (x.condition == c && x.block_type == b) return x;
  }
  throw std::out_of_range("no such cell");
}

PairwiseComparison try_posthoc(const std::vector<double>& values,
                               const std::vector<std::string>& groups,
                               PosthocMethod method) {
  return posthoc_pairwise(values, groups, method);
}

void analyze_ueq(AnalysisResult& r, const AnalysisOptions& options) {
  std::map<DisplayCondition, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < r.ueq_responses.size(); ++i) {
    r.ueq_scores.push_back(ueq_score(r.ueq_responses[i], options.ueq_key));
    rows[r.ueq_responses[i].condition].push_back(i);
  }
  for (auto c : kAllConditions) {
    const auto it = rows.find(c);
    if (it == rows.end()) continue;
    UeqConditionSummary s;
    s.condition = c;
    s.n = it->second.size();
    std::vector<double> prag;
    std::vector<double> hed;
    std::vector<double> overall;
    std::vector<std::vector<double>> prag_items;
    std::vector<std::vector<double>> hed_items;
    for (std::size_t i : it->second) {
      prag.push_back(r.ueq_scores[i].pragmatic_mean);
      hed.push_back(r.ueq_scores[i].hedonic_mean);
      overall.push_back(r.ueq_scores[i].overall_mean);
      const auto t = ueq_transform(r.ueq_responses[i], options.ueq_key);
      prag_items.push_back({t[0], t[1], t[2], t[3]});
      hed_items.push_back({t[4], t[5], t[6], t[7]});
    }
    s.pragmatic = summarize_rt(prag);
    s.hedonic = summarize_rt(hed);
    s.overall = summarize_rt(overall);
    s.band = ueq_band(*s.overall.mean);
    if (s.n >= 2) {
      s.alpha_pragmatic = cronbach_alpha(prag_items);
      s.alpha_hedonic = cronbach_alpha(hed_items);
    }
    r.ueq_summary.push_back(s);
  }

  if (r.ueq_summary.size() < 2) return;
  std::vector<std::string> groups;
  std::map<std::string, std::vector<double>> scales;
  for (std::size_t i = 0; i < r.ueq_responses.size(); ++i) {
    groups.emplace_back(to_string(r.ueq_responses[i].condition));
    scales["pragmatic"].push_back(r.ueq_scores[i].pragmatic_mean);
    scales["hedonic"].push_back(r.ueq_scores[i].hedonic_mean);
    scales["overall"].push_back(r.ueq_scores[i].overall_mean);
  }
  for (const auto& [name, values] : scales) {
    r.ueq_anova[name] = one_way_anova(values, groups, "Display condition");
    try {
      r.ueq_posthoc[name] = try_posthoc(values, groups, options.posthoc);
    } catch (const std::invalid_argument& e) {
      r.diagnostics.push_back("UEQ " + name + " post-hoc skipped: " + e.what());
    }
  }
}

}  // namespace

AnalysisResult analyze(const ParsedLog& log, const std::vector<UeqResponse>& questionnaire,
                       const AnalysisOptions& options) {
  AnalysisResult r;
  r.participants = collect_stats(log);

  for (auto c : kAllConditions) {
    for (auto b : kBlockTypes) r.cells.push_back({c, b, {}, {}, {}});
  }
  for (const auto& p : r.participants) {
    auto& cell = cell_of(r.cells, p.condition, p.block_type);
    cell.pooled += p.counts;
    if (const auto a = accuracy(p.counts)) cell.participant_accuracy.push_back(*a);
    cell.rt_samples_ms.insert(cell.rt_samples_ms.end(), p.rt_samples_ms.begin(),
                              p.rt_samples_ms.end());
    r.by_condition[p.condition] += p.counts;
    auto& rts = r.rt_by_condition[p.condition];
    rts.insert(rts.end(), p.rt_samples_ms.begin(), p.rt_samples_ms.end());
  }

  std::map<int, BlockKind> kinds;
  for (const auto& line : log.lines) {
    const auto& rec = line.record;
    if (rec.type == "block_start" && rec.block_id) {
      if (const auto* s = std::get_if<std::string>(&rec.label)) {
        kinds[*rec.block_id] = parse_block_kind(*s);
      }
    } else if (rec.type == "trial_resolved" && rec.block_id && rec.selection) {
      ++r.resolved_trials;
      auto& [mistakes, total] = r.mistakes_by_block_kind[kinds.at(*rec.block_id)];
      ++total;
      if (rec.selection->is_mistake) {
        ++mistakes;
        ++r.mistake_trials;
      }
    }
  }

  // Condition x block type ANOVAs over participant cells.
  std::vector<double> acc_values;
  std::vector<double> rt_values;
  std::vector<std::string> acc_a, acc_b, rt_a, rt_b;
  for (const auto& p : r.participants) {
    if (const auto a = accuracy(p.counts)) {
      acc_values.push_back(*a);
      acc_a.emplace_back(to_string(p.condition));
      acc_b.emplace_back(to_string(p.block_type));
    } else {
      r.diagnostics.push_back("participant " + std::to_string(p.participant_id) + " " +
                              std::string(to_string(p.condition)) + "/" +
                              std::string(to_string(p.block_type)) +
                              ": no scored responses, excluded from accuracy");
    }
    if (const auto s = summarize_rt(p.rt_samples_ms); s.mean) {
      rt_values.push_back(*s.mean);
      rt_a.emplace_back(to_string(p.condition));
      rt_b.emplace_back(to_string(p.block_type));
    }
  }
  try {
    r.accuracy_anova =
        two_way_anova(acc_values, acc_a, acc_b, "Display condition", "Block type");
  } catch (const std::invalid_argument& e) {
    r.diagnostics.push_back(std::string("accuracy ANOVA skipped: ") + e.what());
  }
  try {
    r.rt_anova = two_way_anova(rt_values, rt_a, rt_b, "Display condition", "Block type");
  } catch (const std::invalid_argument& e) {
    r.diagnostics.push_back(std::string("reaction time ANOVA skipped: ") + e.what());
  }
  try {
    r.accuracy_posthoc = try_posthoc(acc_values, acc_a, options.posthoc);
  } catch (const std::invalid_argument& e) {
    r.diagnostics.push_back(std::string("accuracy post-hoc skipped: ") + e.what());
  }

  r.ueq_responses = questionnaire;
  analyze_ueq(r, options);
  return r;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string num(std::optional<double> v, int precision = 6) {
  if (!v || !std::isfinite(*v)) return "";
  std::ostringstream os;
  os << std::setprecision(precision) << *v;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_anova_csv(const AnovaTable& t, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "source,df,sum_sq,mean_sq,F,p\n";
  for (const auto& row : t.rows) {
    out << row.name << ',' << row.df << ',' << num(row.sum_sq, 10) << ','
        << num(row.mean_sq, 10) << ',' << num(row.f) << ',' << num(row.p) << '\n';
  }
}

void write_posthoc_csv(const PairwiseComparison& c, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "group";
  for (const auto& g : c.groups) out << ',' << g;
  out << '\n';
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    out << c.groups[i];
    for (std::size_t j = 0; j < c.groups.size(); ++j) out << ',' << num(c.p[i][j]);
    out << '\n';
  }
}

void print_anova(std::ostream& out, const AnovaTable& t) {
  out << "  " << std::left << std::setw(32) << "source" << std::right << std::setw(6)
      << "df" << std::setw(14) << "sum_sq" << std::setw(12) << "F" << std::setw(12) << "p"
      << '\n';
  for (const auto& row : t.rows) {
    out << "  " << std::left << std::setw(32) << row.name << std::right << std::setw(6)
        << row.df << std::setw(14) << num(row.sum_sq) << std::setw(12) << num(row.f, 4)
        << std::setw(12) << num(row.p, 4) << '\n';
  }
  if (t.zero_residual) out << "  (zero residual variance: F and p undefined)\n";
}

void print_posthoc(std::ostream& out, const std::string& title, const PairwiseComparison& c) {
  out << "\nPost-hoc p-values (" << to_string(c.method) << "), " << title << '\n';
  out << "  " << std::setw(12) << "";
  for (const auto& g : c.groups) out << std::setw(13) << g;
  out << '\n';
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    out << "  " << std::left << std::setw(12) << c.groups[i] << std::right;
    for (std::size_t j = 0; j < c.groups.size(); ++j) {
      out << std::setw(13) << (i == j ? std::string("-") : num(c.p[i][j], 4));
    }
    out << '\n';
  }
}

}  // namespace

void write_analysis(const AnalysisResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    auto out = open_out(dir / "accuracy_participants.csv");
    out << "participant,condition,block_type,tp,tn,fp,fn,accuracy\n";
    for (const auto& p : r.participants) {
      out << p.participant_id << ',' << to_string(p.condition) << ','
          << to_string(p.block_type) << ',' << p.counts.tp << ',' << p.counts.tn << ','
          << p.counts.fp << ',' << p.counts.fn << ',' << num(accuracy(p.counts)) << '\n';
    }
  }
  {
    auto out = open_out(dir / "accuracy.csv");
    out << "condition,block_type,participants,mean_accuracy,sd_accuracy,pooled_accuracy\n";
    for (const auto& c : r.cells) {
      const auto s = summarize_rt(c.participant_accuracy);
      out << to_string(c.condition) << ',' << to_string(c.block_type) << ',' << s.n << ','
          << num(s.mean) << ',' << num(s.sd) << ',' << num(accuracy(c.pooled)) << '\n';
    }
  }
  {
    auto out = open_out(dir / "reaction_times.csv");
    out << "condition,block_type,n,mean_ms,sd_ms\n";
    for (const auto& c : r.cells) {
      const auto s = summarize_rt(c.rt_samples_ms);
      out << to_string(c.condition) << ',' << to_string(c.block_type) << ',' << s.n << ','
          << num(s.mean) << ',' << num(s.sd) << '\n';
    }
  }
  {
    auto out = open_out(dir / "rt_samples.csv");
    out << "condition,block_type,rt_ms\n";
    for (const auto& c : r.cells) {
      for (double v : c.rt_samples_ms) {
        out << to_string(c.condition) << ',' << to_string(c.block_type) << ',' << v << '\n';
      }
    }
  }
  if (r.accuracy_anova) write_anova_csv(*r.accuracy_anova, dir / "anova_accuracy.csv");
  if (r.rt_anova) write_anova_csv(*r.rt_anova, dir / "anova_rt.csv");
  if (r.accuracy_posthoc) write_posthoc_csv(*r.accuracy_posthoc, dir / "posthoc_accuracy.csv");

  if (!r.ueq_responses.empty()) {
    auto out = open_out(dir / "ueq_scores.csv");
    out << "participant,condition,pragmatic,hedonic,overall,band\n";
    for (std::size_t i = 0; i < r.ueq_responses.size(); ++i) {
      const auto& s = r.ueq_scores[i];
      out << r.ueq_responses[i].participant_id << ','
          << to_string(r.ueq_responses[i].condition) << ',' << num(s.pragmatic_mean) << ','
          << num(s.hedonic_mean) << ',' << num(s.overall_mean) << ',' << to_string(s.band)
          << '\n';
    }
    auto sum = open_out(dir / "ueq_summary.csv");
    sum << "condition,n,pragmatic_mean,pragmatic_sd,hedonic_mean,hedonic_sd,overall_mean,"
           "overall_sd,band,alpha_pragmatic,alpha_hedonic\n";
    for (const auto& s : r.ueq_summary) {
      sum << to_string(s.condition) << ',' << s.n << ',' << num(s.pragmatic.mean) << ','
          << num(s.pragmatic.sd) << ',' << num(s.hedonic.mean) << ',' << num(s.hedonic.sd)
          << ',' << num(s.overall.mean) << ',' << num(s.overall.sd) << ','
          << to_string(s.band) << ',' << num(s.alpha_pragmatic) << ','
          << num(s.alpha_hedonic) << '\n';
    }
    for (const auto& [name, table] : r.ueq_anova) {
      write_anova_csv(table, dir / ("anova_ueq_" + name + ".csv"));
    }
    for (const auto& [name, c] : r.ueq_posthoc) {
      write_posthoc_csv(c, dir / ("posthoc_ueq_" + name + ".csv"));
    }
  }

  auto out = open_out(dir / "report.txt");
  out << "Trials resolved: " << r.resolved_trials << " (" << r.mistake_trials
      << " machine-mistake trials)\n";
  for (const auto& [kind, counts] : r.mistakes_by_block_kind) {
    out << "  " << to_string(kind) << " blocks: mistake rate "
        << num(r.mistake_rate(kind), 4) << " (" << counts.first << "/" << counts.second
        << ")\n";
  }
  out << "\nAccuracy by condition (pooled counts)\n";
  for (auto c : kAllConditions) {
    out << "  " << std::left << std::setw(12) << to_string(c) << std::right
        << num(r.condition_accuracy(c), 4) << '\n';
  }
  out << "\nAccuracy and reaction time by condition and block type\n";
  for (const auto& c : r.cells) {
    const auto a = summarize_rt(c.participant_accuracy);
    const auto t = summarize_rt(c.rt_samples_ms);
    out << "  " << std::left << std::setw(12) << to_string(c.condition) << std::setw(8)
        << to_string(c.block_type) << std::right << " acc " << std::setw(8)
        << num(a.mean, 4) << " sd " << std::setw(8) << num(a.sd, 4) << "   rt "
        << std::setw(8) << num(t.mean, 5) << " ms sd " << std::setw(8) << num(t.sd, 4)
        << " n " << t.n << '\n';
  }
  if (r.accuracy_anova) {
    out << "\nTwo-way ANOVA, accuracy\n";
    print_anova(out, *r.accuracy_anova);
  }
  if (r.accuracy_posthoc) print_posthoc(out, "accuracy by condition", *r.accuracy_posthoc);
  if (r.rt_anova) {
    out << "\nTwo-way ANOVA, reaction time\n";
    print_anova(out, *r.rt_anova);
  }
  if (!r.ueq_summary.empty()) {
    out << "\nUEQ-S scale means (sd)\n";
    for (const auto& s : r.ueq_summary) {
      out << "  " << std::left << std::setw(12) << to_string(s.condition) << std::right
          << " pragmatic " << num(s.pragmatic.mean, 3) << " (" << num(s.pragmatic.sd, 3)
          << ")  hedonic " << num(s.hedonic.mean, 3) << " (" << num(s.hedonic.sd, 3)
          << ")  overall " << num(s.overall.mean, 3) << " (" << num(s.overall.sd, 3)
          << ")  " << to_string(s.band) << '\n';
    }
    for (const auto& [name, table] : r.ueq_anova) {
      out << "\nOne-way ANOVA, UEQ " << name << '\n';
      print_anova(out, table);
      if (const auto it = r.ueq_posthoc.find(name); it != r.ueq_posthoc.end()) {
        print_posthoc(out, "UEQ " + name, it->second);
      }
    }
  }
  if (!r.diagnostics.empty()) {
    out << "\nDiagnostics\n";
    for (const auto& d : r.diagnostics) out << "  " << d << '\n';
  }
}

}  // namespace mirroreyes
