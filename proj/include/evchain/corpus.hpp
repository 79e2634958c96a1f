#pragma once

// Dependency-parsed sentences, CoNLL-U reading/writing, and event annotations.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "evchain/error.hpp"

namespace evchain {

enum class TemporalStatus : int { kPast = 0, kOngoing = 1, kFuture = 2 };

inline constexpr int kNumStatuses = 3;

inline const char* status_code(TemporalStatus s) {
  switch (s) {
    case TemporalStatus::kPast: return "PA";
    case TemporalStatus::kOngoing: return "OG";
    case TemporalStatus::kFuture: return "FU";
  }
  return "??";
}

inline std::optional<TemporalStatus> parse_status(std::string_view code) {
  if (code == "PA") return TemporalStatus::kPast;
  if (code == "OG") return TemporalStatus::kOngoing;
  if (code == "FU") return TemporalStatus::kFuture;
  return std::nullopt;
}

inline int status_index(TemporalStatus s) { return static_cast<int>(s); }
inline TemporalStatus status_from_index(int i) { return static_cast<TemporalStatus>(i); }

struct Token {
  int id = 0;  // 1-based
  std::string form;
  std::optional<std::string> lemma;
  std::optional<std::string> upos;
  int head = 0;  // 0 attaches to the artificial root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct DepSentence {
  std::string doc_id;
  std::string sent_id;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  bool valid_id(int id) const { return id >= 1 && id <= size(); }
  const Token& token(int id) const { return tokens.at(static_cast<size_t>(id - 1)); }

  int root_id() const {
    for (const auto& t : tokens)
      if (t.head == 0) return t.id;
    return 0;
  }

  // children[id] lists dependents of token `id` in surface order; index 0 is
  // the artificial root.
  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> out(tokens.size() + 1);
    for (const auto& t : tokens) out[static_cast<size_t>(t.head)].push_back(t.id);
    return out;
  }

  std::string locator() const { return "sentence " + doc_id + "/" + sent_id; }

  bool operator==(const DepSentence&) const = default;
};

using Corpus = std::vector<DepSentence>;

struct EventMention {
  std::string doc_id;
  std::string sent_id;
  int token_id = 0;
  std::optional<TemporalStatus> label;

  bool operator==(const EventMention&) const = default;
};

// Checks consecutive ids, head range, a single root and acyclicity.
inline void validate_sentence(const DepSentence& s) {
  const int n = s.size();
  if (n == 0) throw Error(s.locator() + ": empty sentence");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<size_t>(i)];
    if (t.id != i + 1)
      throw Error(s.locator() + ": token ids not consecutive at position " + std::to_string(i + 1));
    if (t.form.empty()) throw Error(s.locator() + ": token " + std::to_string(t.id) + " has empty form");
    if (t.head < 0 || t.head > n)
      throw Error(s.locator() + ": token " + std::to_string(t.id) + " head out of range (" +
                  std::to_string(t.head) + ")");
    if (t.head == t.id) throw Error(s.locator() + ": token " + std::to_string(t.id) + " is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots == 0) throw Error(s.locator() + ": no root token");
  if (roots > 1) throw Error(s.locator() + ": multiple roots (" + std::to_string(roots) + ")");
  // Every walk towards the root must terminate within n steps.
  for (const auto& t : s.tokens) {
    int cur = t.id;
    int steps = 0;
    while (cur != 0) {
      cur = s.token(cur).head;
      if (++steps > n) throw Error(s.locator() + ": cycle detected through token " + std::to_string(t.id));
    }
  }
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::string> optional_field(std::string_view f) {
  if (f == "_") return std::nullopt;
  return std::string(f);
}

}  // namespace detail

// Reads the basic-dependency layer of a CoNLL-U document. Multiword-token
// ranges and empty nodes are skipped; `# sent_id` and `# newdoc id` comments
// name sentences, otherwise ids are sequence numbers.
inline Corpus parse_conllu(std::string_view text) {
  Corpus corpus;
  int doc_counter = 0;
  std::string doc_id = "1";
  std::optional<std::string> pending_sent_id;
  DepSentence current;
  int sentence_line = 0;
  int line_no = 0;

  auto where = [&](int line) {
    return "sentence " + std::to_string(corpus.size() + 1) + " (line " + std::to_string(line) + ")";
  };
  auto flush = [&]() {
    if (current.tokens.empty()) {
      pending_sent_id.reset();
      return;
    }
    current.doc_id = doc_id;
    current.sent_id = pending_sent_id ? *pending_sent_id : std::to_string(corpus.size() + 1);
    try {
      validate_sentence(current);
    } catch (const Error& e) {
      throw Error(where(sentence_line) + ": " + e.what());
    }
    corpus.push_back(std::move(current));
    current = DepSentence{};
    pending_sent_id.reset();
  };

  for (std::string_view line : detail::split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (detail::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = detail::trim(line.substr(1));
      size_t eq = body.find('=');
      std::string_view key = detail::trim(body.substr(0, eq));
      std::string_view value = eq == std::string_view::npos ? std::string_view{} : detail::trim(body.substr(eq + 1));
      if (key == "sent_id") {
        pending_sent_id = std::string(value);
      } else if (key == "newdoc id" || key == "newdoc") {
        ++doc_counter;
        doc_id = value.empty() ? std::to_string(doc_counter) : std::string(value);
      }
      continue;
    }
    if (current.tokens.empty()) sentence_line = line_no;
    auto cols = detail::split(line, '\t');
    const std::string at = where(sentence_line) + ": line " + std::to_string(line_no);
    if (cols.size() != 10)
      throw Error(at + " has " + std::to_string(cols.size()) + " columns, expected 10");
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos)
      continue;
    auto id = detail::to_int(cols[0]);
    if (!id) throw Error(at + " has malformed ID");
    auto head = detail::to_int(cols[6]);
    if (!head) throw Error(at + " has malformed HEAD");
    std::string_view deps = cols[8];
    if (deps != "_") {
      auto entries = detail::split(deps, '|');
      auto colon = entries[0].find(':');
      if (entries.size() > 1 || detail::to_int(entries[0].substr(0, colon)) != head)
        throw Error(at + ": enhanced dependency graph not supported");
    }
    Token tok;
    tok.id = *id;
    tok.form = std::string(cols[1]);
    tok.lemma = detail::optional_field(cols[2]);
    tok.upos = detail::optional_field(cols[3]);
    tok.head = *head;
    tok.deprel = std::string(cols[7]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return corpus;
}

inline std::string to_conllu(const Corpus& corpus) {
  std::ostringstream out;
  std::optional<std::string> last_doc;
  for (const auto& s : corpus) {
    if (!last_doc || *last_doc != s.doc_id) {
      out << "# newdoc id = " << s.doc_id << "\n";
      last_doc = s.doc_id;
    }
    out << "# sent_id = " << s.sent_id << "\n";
    for (const auto& t : s.tokens) {
      out << t.id << '\t' << t.form << '\t' << t.lemma.value_or("_") << '\t' << t.upos.value_or("_")
          << "\t_\t_\t" << t.head << '\t' << (t.deprel.empty() ? "_" : t.deprel) << "\t_\t_\n";
    }
    out << "\n";
  }
  return out.str();
}

// (doc_id, sent_id) -> position in the corpus.
class CorpusIndex {
 public:
  explicit CorpusIndex(const Corpus& corpus) {
    for (size_t i = 0; i < corpus.size(); ++i) index_.emplace(std::make_pair(corpus[i].doc_id, corpus[i].sent_id), i);
  }
  std::optional<size_t> find(const std::string& doc_id, const std::string& sent_id) const {
    auto it = index_.find({doc_id, sent_id});
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, size_t> index_;
};

// Line-delimited JSON records {doc_id, sent_id, token_id, label}.
inline std::vector<EventMention> load_events(std::string_view text, const Corpus& corpus) {
  CorpusIndex index(corpus);
  std::vector<EventMention> out;
  int line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string at = "events line " + std::to_string(line_no) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(at + "malformed record (" + e.what() + ")");
    }
    if (!rec.is_object()) throw Error(at + "record is not an object");
    for (const char* key : {"doc_id", "sent_id", "token_id", "label"})
      if (!rec.contains(key)) throw Error(at + "missing field '" + key + "'");
    if (rec.size() != 4) throw Error(at + "unexpected extra fields");
    EventMention m;
    try {
      m.doc_id = rec["doc_id"].is_string() ? rec["doc_id"].get<std::string>() : rec["doc_id"].dump();
      m.sent_id = rec["sent_id"].is_string() ? rec["sent_id"].get<std::string>() : rec["sent_id"].dump();
      m.token_id = rec["token_id"].get<int>();
    } catch (const nlohmann::json::exception&) {
      throw Error(at + "token_id must be an integer");
    }
    const auto& label = rec["label"];
    if (!label.is_null()) {
      auto status = label.is_string() ? parse_status(label.get<std::string>()) : std::nullopt;
      if (!status) throw Error(at + "unknown label " + label.dump());
      m.label = status;
    }
    auto si = index.find(m.doc_id, m.sent_id);
    if (!si) throw Error(at + "dangling reference to sentence " + m.doc_id + "/" + m.sent_id);
    if (!corpus[*si].valid_id(m.token_id))
      throw Error(at + "token_id " + std::to_string(m.token_id) + " out of range for " + corpus[*si].locator());
    out.push_back(std::move(m));
  }
  return out;
}

inline std::string events_to_jsonl(const std::vector<EventMention>& mentions) {
  std::string out;
  for (const auto& m : mentions) {
    nlohmann::ordered_json rec;
    rec["doc_id"] = m.doc_id;
    rec["sent_id"] = m.sent_id;
    rec["token_id"] = m.token_id;
    rec["label"] = m.label ? nlohmann::ordered_json(status_code(*m.label)) : nlohmann::ordered_json(nullptr);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace evchain
