#include "mirroreyes/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mirroreyes {

std::optional<double> accuracy(const ConfusionCounts& c) {
  if (c.total() <= 0) return std::nullopt;
  return static_cast<double>(c.tp + c.tn) / c.total();
}

RtSummary summarize_rt(std::span<const double> samples) {
  RtSummary s;
  s.n = samples.size();
  if (samples.empty()) return s;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                      static_cast<double>(samples.size());
  s.mean = mean;
  if (samples.size() >= 2) {
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    s.sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  }
  return s;
}

std::string_view to_string(BlockType b) { return b == BlockType::mixed ? "mixed" : "single"; }

std::vector<ParticipantStats> collect_stats(const ParsedLog& log) {
  std::map<int, BlockKind> block_kinds;
  std::map<std::tuple<int, int, int>, ParticipantStats> cells;

  for (const auto& line : log.lines) {
    const LogRecord& r = line.record;
    if (r.type == "block_start" && r.block_id) {
      if (const auto* s = std::get_if<std::string>(&r.label)) {
        block_kinds[*r.block_id] = parse_block_kind(*s);
      }
      continue;
    }
    if (r.type != "trial_resolved") continue;
    const auto* labels = std::get_if<std::map<int, Label>>(&r.label);
    if (!labels || !r.block_id || !r.condition) {
      throw std::runtime_error("line " + std::to_string(line.line_number) +
                               ": trial_resolved without labels, block or condition");
    }
    const auto kind = block_kinds.find(*r.block_id);
    if (kind == block_kinds.end()) {
      throw std::runtime_error("line " + std::to_string(line.line_number) +
                               ": trial for a block that never started");
    }
    if (kind->second == BlockKind::practice) continue;
    const BlockType bt =
        kind->second == BlockKind::mixed ? BlockType::mixed : BlockType::single;

    for (const auto& [id, label] : *labels) {
      auto key = std::make_tuple(id, static_cast<int>(*r.condition), static_cast<int>(bt));
      auto& cell = cells[key];
      cell.participant_id = id;
      cell.condition = *r.condition;
      cell.block_type = bt;
      switch (label) {
        case Label::tp:
          ++cell.counts.tp;
          break;
        case Label::fp:
          ++cell.counts.fp;
          break;
        case Label::fn:
          ++cell.counts.fn;
          break;
        case Label::tn:
          ++cell.counts.tn;
          break;
        case Label::preempted:
        case Label::na:
          break;
      }
      if ((label == Label::tp || label == Label::fp) && r.rt_ms) {
        cell.rt_samples_ms.push_back(static_cast<double>(*r.rt_ms));
      }
    }
  }

  std::vector<ParticipantStats> out;
  out.reserve(cells.size());
  for (auto& [key, cell] : cells) out.push_back(std::move(cell));
  return out;
}

// ---------------------------------------------------------------------------
// ANOVA

const AnovaRow& AnovaTable::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no ANOVA row named " + std::string(name));
}

namespace {

std::vector<std::string> levels_of(std::span<const std::string> labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

std::size_t level_index(const std::vector<std::string>& levels, const std::string& l) {
  return static_cast<std::size_t>(std::find(levels.begin(), levels.end(), l) -
                                  levels.begin());
}

void finish_rows(AnovaTable& t) {
  AnovaRow& resid = t.rows.back();
  resid.mean_sq = resid.df > 0 ? resid.sum_sq / resid.df : 0.0;
  // Relative threshold so rounding noise in constant data still counts as zero.
  const double scale = std::max(1.0, t.total_sum_sq);
  t.zero_residual = resid.df <= 0 || resid.sum_sq <= 1e-12 * scale;
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    AnovaRow& r = t.rows[i];
    r.mean_sq = r.sum_sq / r.df;
    if (t.zero_residual) continue;
    r.f = r.mean_sq / resid.mean_sq;
    boost::math::fisher_f dist(r.df, resid.df);
    r.p = boost::math::cdf(boost::math::complement(dist, *r.f));
  }
}

}  // namespace

AnovaTable two_way_anova(std::span<const double> values,
                         std::span<const std::string> factor_a,
                         std::span<const std::string> factor_b,
                         const std::string& name_a, const std::string& name_b) {
  if (values.size() != factor_a.size() || values.size() != factor_b.size()) {
    throw std::invalid_argument("values and factor labels differ in length");
  }
  const auto la = levels_of(factor_a);
  const auto lb = levels_of(factor_b);
  if (la.size() < 2 || lb.size() < 2) {
    throw std::invalid_argument("each factor needs at least two levels");
  }
  const std::size_t a = la.size();
  const std::size_t b = lb.size();

  std::vector<double> cell_sum(a * b, 0.0);
  std::vector<std::size_t> cell_n(a * b, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = level_index(la, factor_a[i]) * b + level_index(lb, factor_b[i]);
    cell_sum[c] += values[i];
    ++cell_n[c];
  }
  for (std::size_t c = 0; c < a * b; ++c) {
    if (cell_n[c] == 0) {
      throw std::invalid_argument("empty cell " + la[c / b] + " x " + lb[c % b]);
    }
    if (cell_n[c] != cell_n[0]) {
      throw std::invalid_argument("unbalanced design: cell " + la[c / b] + " x " +
                                  lb[c % b] + " has " + std::to_string(cell_n[c]) +
                                  " observations, expected " + std::to_string(cell_n[0]));
    }
  }
  const auto n = static_cast<double>(cell_n[0]);
  const double grand =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());

  std::vector<double> cell_mean(a * b);
  for (std::size_t c = 0; c < a * b; ++c) cell_mean[c] = cell_sum[c] / n;
  std::vector<double> mean_a(a, 0.0);
  std::vector<double> mean_b(b, 0.0);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      mean_a[i] += cell_mean[i * b + j] / static_cast<double>(b);
      mean_b[j] += cell_mean[i * b + j] / static_cast<double>(a);
    }
  }

  double ss_a = 0.0;
  for (double m : mean_a) ss_a += (m - grand) * (m - grand);
  ss_a *= n * static_cast<double>(b);
  double ss_b = 0.0;
  for (double m : mean_b) ss_b += (m - grand) * (m - grand);
  ss_b *= n * static_cast<double>(a);
  double ss_ab = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double d = cell_mean[i * b + j] - mean_a[i] - mean_b[j] + grand;
      ss_ab += d * d;
    }
  }
  ss_ab *= n;
  double ss_e = 0.0;
  double ss_t = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t c = level_index(la, factor_a[i]) * b + level_index(lb, factor_b[i]);
    ss_e += (values[i] - cell_mean[c]) * (values[i] - cell_mean[c]);
    ss_t += (values[i] - grand) * (values[i] - grand);
  }

  AnovaTable t;
  t.total_sum_sq = ss_t;
  const double df_a = static_cast<double>(a - 1);
  const double df_b = static_cast<double>(b - 1);
  t.rows.push_back({name_a, df_a, ss_a, 0.0, {}, {}});
  t.rows.push_back({name_b, df_b, ss_b, 0.0, {}, {}});
  t.rows.push_back({name_a + ":" + name_b, df_a * df_b, ss_ab, 0.0, {}, {}});
  t.rows.push_back({"Residual", static_cast<double>(values.size()) - static_cast<double>(a * b),
                    ss_e, 0.0, {}, {}});
  finish_rows(t);
  return t;
}

AnovaTable one_way_anova(std::span<const double> values,
                         std::span<const std::string> groups, const std::string& name) {
  if (values.size() != groups.size()) {
    throw std::invalid_argument("values and group labels differ in length");
  }
  const auto levels = levels_of(groups);
  if (levels.size() < 2) throw std::invalid_argument("need at least two groups");
  std::vector<double> sum(levels.size(), 0.0);
  std::vector<std::size_t> count(levels.size(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto g = level_index(levels, groups[i]);
    sum[g] += values[i];
    ++count[g];
  }
  const double grand =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss_g = 0.0;
  for (std::size_t g = 0; g < levels.size(); ++g) {
    const double m = sum[g] / static_cast<double>(count[g]);
    ss_g += static_cast<double>(count[g]) * (m - grand) * (m - grand);
  }
  double ss_e = 0.0;
  double ss_t = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto g = level_index(levels, groups[i]);
    const double m = sum[g] / static_cast<double>(count[g]);
    ss_e += (values[i] - m) * (values[i] - m);
    ss_t += (values[i] - grand) * (values[i] - grand);
  }
  AnovaTable t;
  t.total_sum_sq = ss_t;
  t.rows.push_back({name, static_cast<double>(levels.size() - 1), ss_g, 0.0, {}, {}});
  t.rows.push_back({"Residual",
                    static_cast<double>(values.size()) - static_cast<double>(levels.size()),
                    ss_e, 0.0, {}, {}});
  finish_rows(t);
  return t;
}

// ---------------------------------------------------------------------------
// Studentized range

namespace {

/// P(range of k standard normals < w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const boost::math::normal_distribution<double> z01;
  auto integrand = [&](double z) {
    const double inner = boost::math::cdf(z01, z) - boost::math::cdf(z01, z - w);
    return boost::math::pdf(z01, z) * std::pow(inner, k - 1);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double v = gauss_kronrod<double, 31>::integrate(integrand, -9.0, 9.0 + w, 15, 1e-13);
  return std::clamp(k * v, 0.0, 1.0);
}

}  // namespace

double ptukey(double q, int k, double df) {
  if (k < 2) throw std::invalid_argument("studentized range needs k >= 2");
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(df) || df > 1e5) return normal_range_cdf(q, k);

  // s = sqrt(chi2_df / df); integrate its density against the normal range CDF.
  const boost::math::chi_squared_distribution<double> chi(df);
  const double lo = std::sqrt(boost::math::quantile(chi, 1e-14) / df);
  const double hi =
      std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-14)) / df);
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) -
                          (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_pdf = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_pdf) * normal_range_cdf(q * s, k);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double v = gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 12, 1e-11);
  return std::clamp(v, 0.0, 1.0);
}

std::string_view to_string(PosthocMethod m) {
  return m == PosthocMethod::bonferroni ? "bonferroni" : "tukey_hsd";
}

PosthocMethod parse_posthoc_method(std::string_view s) {
  if (s == "tukey_hsd" || s == "tukey") return PosthocMethod::tukey_hsd;
  if (s == "bonferroni") return PosthocMethod::bonferroni;
  throw std::invalid_argument("unknown post-hoc method: " + std::string(s));
}

PairwiseComparison posthoc_pairwise(std::span<const double> values,
                                    std::span<const std::string> groups,
                                    PosthocMethod method) {
  if (values.size() != groups.size()) {
    throw std::invalid_argument("values and group labels differ in length");
  }
  PairwiseComparison out;
  out.method = method;
  out.groups = levels_of(groups);
  const std::size_t k = out.groups.size();
  if (k < 2) throw std::invalid_argument("need at least two groups");
  out.means.assign(k, 0.0);
  out.sizes.assign(k, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto g = level_index(out.groups, groups[i]);
    out.means[g] += values[i];
    ++out.sizes[g];
  }
  for (std::size_t g = 0; g < k; ++g) {
    if (out.sizes[g] < 2) {
      throw std::invalid_argument("group " + out.groups[g] +
                                  " has fewer than two observations");
    }
    out.means[g] /= static_cast<double>(out.sizes[g]);
  }
  double ss_e = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - out.means[level_index(out.groups, groups[i])];
    ss_e += d * d;
  }
  const double df = static_cast<double>(values.size() - k);
  const double mse = ss_e / df;
  const double pairs = static_cast<double>(k * (k - 1) / 2);

  out.p.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double diff = std::abs(out.means[i] - out.means[j]);
      const double inv_n = 1.0 / static_cast<double>(out.sizes[i]) +
                           1.0 / static_cast<double>(out.sizes[j]);
      std::optional<double> p;
      if (mse > 0.0) {
        if (method == PosthocMethod::tukey_hsd) {
          const double q = diff / std::sqrt(mse / 2.0 * inv_n);
          p = 1.0 - ptukey(q, static_cast<int>(k), df);
        } else {
          const double t = diff / std::sqrt(mse * inv_n);
          boost::math::students_t dist(df);
          p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)) * pairs);
        }
        p = std::clamp(*p, 0.0, 1.0);
      } else if (diff == 0.0) {
        p = 1.0;
      } else {
        p = 0.0;
      }
      out.p[i][j] = p;
      out.p[j][i] = p;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// UEQ-S

std::string_view to_string(UeqKey k) {
  return k == UeqKey::as_printed ? "as_printed" : "standard";
}

UeqKey parse_ueq_key(std::string_view s) {
  if (s == "standard") return UeqKey::standard;
  if (s == "as_printed") return UeqKey::as_printed;
  throw std::invalid_argument("unknown UEQ key: " + std::string(s));
}

std::string_view to_string(UeqBand b) {
  switch (b) {
    case UeqBand::negative:
      return "negative";
    case UeqBand::neutral:
      return "neutral";
    case UeqBand::positive:
      return "positive";
  }
  throw std::invalid_argument("unknown band");
}

UeqBand ueq_band(double mean) {
  if (mean > 0.8) return UeqBand::positive;
  if (mean < -0.8) return UeqBand::negative;
  return UeqBand::neutral;
}

std::array<double, 8> ueq_transform(const UeqResponse& r, UeqKey key) {
  std::array<double, 8> out{};
  for (std::size_t i = 0; i < 8; ++i) {
    const int raw = r.items[i];
    if (raw < 1 || raw > 7) {
      throw std::invalid_argument("item" + std::to_string(i + 1) + " out of range: " +
                                  std::to_string(raw));
    }
    const bool reversed = key == UeqKey::as_printed && i == 3;
    out[i] = reversed ? 4.0 - raw : raw - 4.0;
  }
  return out;
}

UeqScores ueq_score(const UeqResponse& r, UeqKey key) {
  const auto t = ueq_transform(r, key);
  UeqScores s;
  s.pragmatic_mean = (t[0] + t[1] + t[2] + t[3]) / 4.0;
  s.hedonic_mean = (t[4] + t[5] + t[6] + t[7]) / 4.0;
  s.overall_mean = std::accumulate(t.begin(), t.end(), 0.0) / 8.0;
  s.band = ueq_band(s.overall_mean);
  return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<UeqResponse> read_ueq_csv(std::istream& in) {
  std::string line;
  std::size_t line_number = 0;
  std::vector<UeqResponse> out;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    const auto fail = [&](const std::string& what) {
      return std::runtime_error("line " + std::to_string(line_number) + ": " + what);
    };
    if (!header_seen) {
      static const std::vector<std::string> expected = {
          "participant", "condition", "item1", "item2", "item3",
          "item4",       "item5",     "item6", "item7", "item8"};
      if (cells != expected) {
        throw fail("expected header participant,condition,item1..item8");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 10) {
      throw fail("expected 10 columns, found " + std::to_string(cells.size()));
    }
    UeqResponse r;
    r.participant_id = cells[0];
    try {
      r.condition = parse_condition(cells[1]);
      for (std::size_t i = 0; i < 8; ++i) {
        std::size_t used = 0;
        r.items[i] = std::stoi(cells[i + 2], &used);
        if (used != cells[i + 2].size()) throw std::invalid_argument("not an integer");
      }
      ueq_transform(r);
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("questionnaire file is empty");
  return out;
}

std::optional<double> cronbach_alpha(const std::vector<std::vector<double>>& items) {
  if (items.size() < 2) throw std::invalid_argument("need at least two respondents");
  const std::size_t k = items.front().size();
  if (k < 2) throw std::invalid_argument("need at least two items");
  for (const auto& row : items) {
    if (row.size() != k) throw std::invalid_argument("ragged item matrix");
  }
  const auto n = static_cast<double>(items.size());
  auto variance = [&](auto value_of) {
    double mean = 0.0;
    for (const auto& row : items) mean += value_of(row);
    mean /= n;
    double ss = 0.0;
    for (const auto& row : items) ss += (value_of(row) - mean) * (value_of(row) - mean);
    return ss / (n - 1.0);
  };
  double item_var = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    item_var += variance([j](const std::vector<double>& row) { return row[j]; });
  }
  const double total_var = variance([](const std::vector<double>& row) {
    return std::accumulate(row.begin(), row.end(), 0.0);
  });
  if (!(total_var > 1e-15)) return std::nullopt;
  const double kk = static_cast<double>(k);
  return kk * (total_var - item_var) / ((kk - 1.0) * total_var);
}

}  // namespace mirroreyes
