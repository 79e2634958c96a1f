#pragma once

// Word vectors in the word2vec text format ("vocab_size dim" header, then one
// "word v1 ... vD" row per word).

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "evchain/error.hpp"
#include "evchain/nncore.hpp"

namespace evchain::nn {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(size_t dim, std::uint64_t unk_seed) : dim_(dim) {
    if (dim == 0) throw Error("embedding dimension must be positive");
    Rng rng(unk_seed);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    unk_.resize(dim);
    for (double& v : unk_) v = u(rng);
  }

  // Rows whose width disagrees with the header are rejected with their line
  // number.
  static EmbeddingTable parse(std::string_view text, std::uint64_t unk_seed = 0) {
    size_t pos = 0;
    int line_no = 0;
    auto next_line = [&](std::string_view& line) {
      while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (!line.empty()) return true;
      }
      return false;
    };
    auto fields = [](std::string_view line) {
      std::vector<std::string_view> out;
      size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
      }
      return out;
    };
    auto to_size = [](std::string_view s, size_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc() && p == s.data() + s.size();
    };

    std::string_view line;
    if (!next_line(line)) throw Error("embeddings: malformed header (empty input)");
    auto header = fields(line);
    size_t vocab = 0;
    size_t dim = 0;
    if (header.size() != 2 || !to_size(header[0], vocab) || !to_size(header[1], dim) || dim == 0)
      throw Error("embeddings: malformed header on line " + std::to_string(line_no) + ", expected 'vocab_size dim'");
    EmbeddingTable table(dim, unk_seed);
    while (next_line(line)) {
      auto f = fields(line);
      if (f.size() != dim + 1)
        throw Error("embeddings line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                    " values, found " + std::to_string(f.size() - 1));
      Vec v(dim);
      for (size_t d = 0; d < dim; ++d) {
        auto [p, ec] = std::from_chars(f[d + 1].data(), f[d + 1].data() + f[d + 1].size(), v[d]);
        if (ec != std::errc() || p != f[d + 1].data() + f[d + 1].size())
          throw Error("embeddings line " + std::to_string(line_no) + ": malformed value '" + std::string(f[d + 1]) +
                      "'");
      }
      table.vectors_.insert_or_assign(std::string(f[0]), std::move(v));
    }
    if (table.vectors_.size() != vocab)
      throw Error("embeddings: header declares " + std::to_string(vocab) + " words, found " +
                  std::to_string(table.vectors_.size()));
    return table;
  }

  size_t dim() const { return dim_; }
  size_t vocab_size() const { return vectors_.size(); }
  const Vec& unk() const { return unk_; }
  const std::map<std::string, Vec, std::less<>>& vectors() const { return vectors_; }

  void set_unk(Vec v) {
    if (v.size() != dim_) throw Error("unk vector has wrong dimension");
    unk_ = std::move(v);
  }
  void set(std::string word, Vec v) {
    if (v.size() != dim_) throw Error("embedding for '" + word + "' has wrong dimension");
    vectors_.insert_or_assign(std::move(word), std::move(v));
  }
  bool contains(std::string_view word) const { return vectors_.find(word) != vectors_.end(); }

  // Exact form, then lowercased form, then the unk vector.
  const Vec& lookup(std::string_view word) const {
    if (auto it = vectors_.find(word); it != vectors_.end()) return it->second;
    if (auto it = vectors_.find(ascii_lower(word)); it != vectors_.end()) return it->second;
    return unk_;
  }

  // Key under which `word` resolves, or empty for unk.
  std::string resolve(std::string_view word) const {
    if (contains(word)) return std::string(word);
    auto lower = ascii_lower(word);
    if (contains(lower)) return lower;
    return {};
  }

  std::string to_text() const {
    std::string out = std::to_string(vectors_.size()) + " " + std::to_string(dim_) + "\n";
    char buf[32];
    for (const auto& [word, v] : vectors_) {
      out += word;
      for (double x : v) {
        std::snprintf(buf, sizeof buf, " %.6f", x);
        out += buf;
      }
      out += '\n';
    }
    return out;
  }

 private:
  size_t dim_ = 0;
  std::map<std::string, Vec, std::less<>> vectors_;
  Vec unk_;
};

// Seeded uniform(-1, 1) vectors for a fixed vocabulary.
inline EmbeddingTable random_embeddings(const std::vector<std::string>& words, size_t dim, std::uint64_t seed) {
  EmbeddingTable table(dim, seed ^ 0x9e3779b97f4a7c15ULL);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& w : words) {
    Vec v(dim);
    for (double& x : v) x = u(rng);
    table.set(w, std::move(v));
  }
  return table;
}

}  // namespace evchain::nn
