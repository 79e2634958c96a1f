#pragma once

// Per-class, macro and micro recall/precision/F1 over the three statuses.

#include <algorithm>
#include <array>
#include <cstdio>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "evchain/corpus.hpp"
#include "evchain/error.hpp"

namespace evchain {

struct Scores {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  bool operator==(const Scores&) const = default;
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Rows are gold classes, columns predictions.
using Confusion = std::array<std::array<long, kNumStatuses>, kNumStatuses>;

struct Metrics {
  Confusion confusion{};
  std::array<Scores, kNumStatuses> per_class{};
  // Unweighted mean of the per-class values (F1 averaged directly).
  Scores macro;
  // From pooled counts; equals accuracy for single-label prediction.
  Scores micro;
  long total = 0;

  static Metrics from_confusion(const Confusion& c) {
    Metrics m;
    m.confusion = c;
    long correct = 0;
    for (int g = 0; g < kNumStatuses; ++g)
      for (int p = 0; p < kNumStatuses; ++p) {
        m.total += c[g][p];
        if (g == p) correct += c[g][p];
      }
    for (int k = 0; k < kNumStatuses; ++k) {
      long tp = c[k][k], gold = 0, predicted = 0;
      for (int j = 0; j < kNumStatuses; ++j) {
        gold += c[k][j];
        predicted += c[j][k];
      }
      Scores& s = m.per_class[k];
      s.recall = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
      s.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
      s.f1 = f1_score(s.precision, s.recall);
      m.macro.recall += s.recall / kNumStatuses;
      m.macro.precision += s.precision / kNumStatuses;
      m.macro.f1 += s.f1 / kNumStatuses;
    }
    const double acc = m.total ? static_cast<double>(correct) / static_cast<double>(m.total) : 0.0;
    m.micro = Scores{acc, acc, acc};
    return m;
  }

  static Metrics from_predictions(std::span<const int> gold, std::span<const int> predicted) {
    if (gold.size() != predicted.size()) throw Error("metrics: gold and prediction counts differ");
    if (gold.empty()) throw Error("metrics: empty evaluation set");
    Confusion c{};
    for (size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] < 0 || gold[i] >= kNumStatuses || predicted[i] < 0 || predicted[i] >= kNumStatuses)
        throw Error("metrics: class index out of range");
      ++c[static_cast<size_t>(gold[i])][static_cast<size_t>(predicted[i])];
    }
    return from_confusion(c);
  }

  double accuracy() const { return micro.recall; }
};

inline Confusion operator+(const Confusion& a, const Confusion& b) {
  Confusion out{};
  for (size_t g = 0; g < a.size(); ++g)
    for (size_t p = 0; p < a.size(); ++p) out[g][p] = a[g][p] + b[g][p];
  return out;
}

// "R/P/F1" in percent: integers for R and P, one decimal for F1.
inline std::string format_cell(const Scores& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f/%.0f/%.1f", 100.0 * s.recall, 100.0 * s.precision, 100.0 * s.f1);
  return buf;
}

inline std::string metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
  size_t name_w = 5;
  for (const auto& [name, m] : rows) name_w = std::max(name_w, name.size());
  auto pad = [](std::string s, size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("Model", name_w) + " | " + pad("PA", 14) + " | " + pad("OG", 14) + " | " + pad("FU", 14) +
                    " | " + pad("Macro", 14) + " | Micro\n";
  for (const auto& [name, m] : rows) {
    out += pad(name, name_w);
    for (const auto& s : m.per_class) out += " | " + pad(format_cell(s), 14);
    out += " | " + pad(format_cell(m.macro), 14) + " | " + format_cell(m.micro) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json to_json(const Scores& s) {
  return {{"recall", s.recall}, {"precision", s.precision}, {"f1", s.f1}};
}

inline nlohmann::ordered_json to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  for (int k = 0; k < kNumStatuses; ++k) j["per_class"][status_code(status_from_index(k))] = to_json(m.per_class[k]);
  j["macro"] = to_json(m.macro);
  j["micro"] = to_json(m.micro);
  j["confusion"] = m.confusion;
  j["total"] = m.total;
  return j;
}

}  // namespace evchain
