#pragma once

// Independent reference computations and frozen reference values shared by
// the unit tests and the acceptance runner.

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace oracles {

// Textbook balanced two-way decomposition from cell, row and column means.
struct HandAnova {
  double ss_a, ss_b, ss_ab, ss_e;
};

inline HandAnova hand_two_way(const std::vector<std::vector<std::vector<double>>>& cells) {
  const std::size_t a = cells.size(), b = cells[0].size(), n = cells[0][0].size();
  std::vector<std::vector<double>> cm(a, std::vector<double>(b));
  std::vector<double> row(a, 0.0), col(b, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      cm[i][j] = std::accumulate(cells[i][j].begin(), cells[i][j].end(), 0.0) / n;
      row[i] += cm[i][j] / b;
      col[j] += cm[i][j] / a;
      grand += cm[i][j] / (a * b);
    }
  }
  HandAnova h{0, 0, 0, 0};
  for (std::size_t i = 0; i < a; ++i) h.ss_a += b * n * (row[i] - grand) * (row[i] - grand);
  for (std::size_t j = 0; j < b; ++j) h.ss_b += a * n * (col[j] - grand) * (col[j] - grand);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double d = cm[i][j] - row[i] - col[j] + grand;
      h.ss_ab += n * d * d;
      for (double y : cells[i][j]) h.ss_e += (y - cm[i][j]) * (y - cm[i][j]);
    }
  }
  return h;
}

struct Flat {
  std::vector<double> y;
  std::vector<std::string> a, b;
};

inline Flat flatten(const std::vector<std::vector<std::vector<double>>>& cells) {
  Flat f;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      for (double y : cells[i][j]) {
        f.y.push_back(y);
        f.a.push_back("a" + std::to_string(i + 1));
        f.b.push_back("b" + std::to_string(j + 1));
      }
    }
  }
  return f;
}

inline const std::vector<std::vector<std::vector<double>>> kAnovaFixture = {
    {{3, 5, 4, 5}, {7, 9, 8, 8}},
    {{4, 6, 3, 7}, {12, 14, 13, 11}},
};


/// Same 16 observations through statsmodels anova_lm (typ=1).
struct AnovaReference {
  double ss_a = 27.5625, ss_b = 126.5625, ss_ab = 14.0625, ss_e = 19.75;
  double f_a = 16.746835443037938, f_b = 76.898734177215189, f_ab = 8.544303797468356;
  double p_a = 0.001492814764972, p_b = 0.000001451388104, p_ab = 0.012767438483603;
};

/// FNV-1a digests of each eye at target (800, 300) over
/// make_test_camera_image(1280, 720, {{320, 360}, {640, 360}, {960, 360}}).
inline const std::map<std::string, std::string> kCompositorGoldens{
    {"eye_only/left", "c6d9295c7542b641"},    {"eye_only/right", "c6d9295c7542b641"},
    {"mirror_only/left", "6f6f87bb5b745511"}, {"mirror_only/right", "6f6f87bb5b745511"},
    {"mirror_eye/left", "10cc64aa42ead9d9"},  {"mirror_eye/right", "10cc64aa42ead9d9"},
};

}  // namespace oracles
