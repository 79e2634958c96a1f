#pragma once

// First-order saliency: absolute derivatives of the classification loss with
// respect to every input embedding coordinate, averaged per token, rendered as
// CSV or a self-contained HTML heatmap.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evchain/corpus.hpp"
#include "evchain/error.hpp"
#include "evchain/models.hpp"

namespace evchain {

struct SaliencyMap {
  std::vector<std::string> tokens;
  std::vector<double> scores;              // mean of raw[t] over dimensions
  std::vector<std::vector<double>> raw;    // |dloss / demb[t][d]|
  std::optional<TemporalStatus> predicted;
  std::optional<TemporalStatus> gold;
};

// The loss is taken at `label`; the caller passes the gold label when one is
// known and the predicted label otherwise.
inline SaliencyMap compute_saliency(const nn::Model& model, const nn::ModelInput& input,
                                    const std::vector<std::string>& forms, TemporalStatus label) {
  if (forms.size() != input.embeddings.size()) throw Error("saliency: token forms do not match the input length");
  nn::Grid dx;
  const nn::Pass pass = model.input_gradient(input, status_index(label), dx);
  SaliencyMap map;
  map.tokens = forms;
  map.predicted = nn::classify_logits(pass.logits).status;
  map.raw.resize(dx.size());
  map.scores.resize(dx.size());
  for (size_t t = 0; t < dx.size(); ++t) {
    double sum = 0.0;
    map.raw[t].resize(dx[t].size());
    for (size_t d = 0; d < dx[t].size(); ++d) sum += (map.raw[t][d] = std::abs(dx[t][d]));
    map.scores[t] = dx[t].empty() ? 0.0 : sum / static_cast<double>(dx[t].size());
  }
  return map;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string heatmap_csv(const SaliencyMap& map) {
  if (map.tokens.empty()) throw Error("heatmap: empty saliency map");
  std::string out = "position,token,score\n";
  char buf[64];
  for (size_t t = 0; t < map.tokens.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.6f", map.scores[t]);
    out += std::to_string(t + 1) + "," + detail::csv_field(map.tokens[t]) + "," + buf + "\n";
  }
  return out;
}

// Reads back the tokens and scores of a heatmap CSV.
inline SaliencyMap parse_heatmap_csv(std::string_view text) {
  SaliencyMap map;
  size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    size_t end = pos;
    bool quoted = false;
    while (end < text.size() && (quoted || text[end] != '\n')) {
      if (text[end] == '"') quoted = !quoted;
      ++end;
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    if (header) {
      if (line != "position,token,score") throw Error("heatmap csv: unexpected header");
      header = false;
      continue;
    }
    const size_t first = line.find(',');
    const size_t last = line.rfind(',');
    if (first == std::string_view::npos || first == last) throw Error("heatmap csv: malformed row");
    std::string_view tok = line.substr(first + 1, last - first - 1);
    std::string form;
    if (!tok.empty() && tok.front() == '"') {
      for (size_t i = 1; i + 1 < tok.size(); ++i) {
        form += tok[i];
        if (tok[i] == '"') ++i;
      }
    } else {
      form = std::string(tok);
    }
    map.tokens.push_back(std::move(form));
    map.scores.push_back(std::stod(std::string(line.substr(last + 1))));
  }
  return map;
}

// Per-token shade in [0, 1]: score / max(score), 0 when every score is 0.
inline std::vector<double> heat_intensities(const SaliencyMap& map) {
  const double mx = map.scores.empty() ? 0.0 : *std::max_element(map.scores.begin(), map.scores.end());
  std::vector<double> out(map.scores.size(), 0.0);
  if (mx > 0.0)
    for (size_t t = 0; t < out.size(); ++t) out[t] = map.scores[t] / mx;
  return out;
}

inline std::string heatmap_html(const SaliencyMap& map) {
  if (map.tokens.empty()) throw Error("heatmap: empty saliency map");
  const auto level = heat_intensities(map);
  std::string out =
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>saliency</title>\n"
      "<style>body{font-family:sans-serif}span.tok{padding:2px 4px;margin:1px;display:inline-block}</style>\n"
      "</head><body>\n<p class=\"caption\">predicted: ";
  out += map.predicted ? status_code(*map.predicted) : "-";
  out += ", gold: ";
  out += map.gold ? status_code(*map.gold) : "-";
  out += "</p>\n<div>\n";
  char buf[256];
  for (size_t t = 0; t < map.tokens.size(); ++t) {
    // White at 0, deep red (178, 24, 43) at 1.
    const double a = level[t];
    const int r = static_cast<int>(std::lround(255.0 + a * (178.0 - 255.0)));
    const int g = static_cast<int>(std::lround(255.0 + a * (24.0 - 255.0)));
    const int b = static_cast<int>(std::lround(255.0 + a * (43.0 - 255.0)));
    std::snprintf(buf, sizeof buf,
                  "<span class=\"tok\" data-intensity=\"%.6f\" data-score=\"%.6f\" "
                  "style=\"background-color:rgb(%d,%d,%d)\">",
                  a, map.scores[t], r, g, b);
    out += buf;
    out += detail::html_escape(map.tokens[t]);
    out += "</span>\n";
  }
  out += "</div>\n</body></html>\n";
  return out;
}

}  // namespace evchain
