#pragma once

// Event-centred token selections: dependency chains and local windows.

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evchain/corpus.hpp"
#include "evchain/error.hpp"

namespace evchain {

enum class Representation { kChain, kWindow, kTree };

inline const char* representation_name(Representation r) {
  switch (r) {
    case Representation::kChain: return "chain";
    case Representation::kWindow: return "window";
    case Representation::kTree: return "tree";
  }
  return "?";
}

inline Representation parse_representation(std::string_view name) {
  if (name == "chain") return Representation::kChain;
  if (name == "window") return Representation::kWindow;
  if (name == "tree") return Representation::kTree;
  throw Error("unknown representation '" + std::string(name) + "'");
}

struct DependencyChain {
  int target_id = 0;
  std::vector<int> member_ids;  // strictly increasing
  std::vector<int> stage1_ids;  // strictly increasing
};

struct ContextWindow {
  int target_id = 0;
  std::vector<int> member_ids;
  int half_width = 0;
};

struct ChainOptions {
  // Drops `punct` dependents of the target's subtree.
  bool drop_punctuation = false;
};

// Relation label with any subtype removed: "aux:pass" -> "aux".
inline std::string_view base_relation(std::string_view deprel) { return deprel.substr(0, deprel.find(':')); }

inline bool is_satellite_relation(std::string_view deprel) {
  auto base = base_relation(deprel);
  return base == "aux" || base == "auxpass" || base == "cop";
}

inline void require_target(const DepSentence& sent, int target_id) {
  if (!sent.valid_id(target_id))
    throw Error(sent.locator() + ": invalid target token id " + std::to_string(target_id));
}

// Stage 1 collects the target, every governor up to the root and the whole
// subtree below the target. Stage 2 adds aux/auxpass/cop dependents of
// stage-1 words in a single pass (no closure over newly added words).
inline DependencyChain extract_chain(const DepSentence& sent, int target_id, const ChainOptions& opts = {}) {
  require_target(sent, target_id);
  std::vector<char> stage1(static_cast<size_t>(sent.size()) + 1, 0);
  for (int cur = target_id; cur != 0; cur = sent.token(cur).head) stage1[static_cast<size_t>(cur)] = 1;

  const auto children = sent.children();
  std::vector<int> stack{target_id};
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    for (int child : children[static_cast<size_t>(node)]) {
      if (opts.drop_punctuation && base_relation(sent.token(child).deprel) == "punct") continue;
      stage1[static_cast<size_t>(child)] = 1;
      stack.push_back(child);
    }
  }

  DependencyChain chain;
  chain.target_id = target_id;
  for (const auto& t : sent.tokens) {
    if (stage1[static_cast<size_t>(t.id)]) {
      chain.stage1_ids.push_back(t.id);
      chain.member_ids.push_back(t.id);
    } else if (t.head != 0 && stage1[static_cast<size_t>(t.head)] && is_satellite_relation(t.deprel)) {
      chain.member_ids.push_back(t.id);
    }
  }
  return chain;
}

inline ContextWindow extract_window(const DepSentence& sent, int target_id, int half_width = 7) {
  require_target(sent, target_id);
  if (half_width < 0) throw Error("window half width must be >= 0");
  ContextWindow w;
  w.target_id = target_id;
  w.half_width = half_width;
  const int lo = std::max(1, target_id - half_width);
  const int hi = std::min(sent.size(), target_id + half_width);
  for (int id = lo; id <= hi; ++id) w.member_ids.push_back(id);
  return w;
}

// Token ids a model consumes for one mention; the tree representation is the
// whole sentence.
inline std::vector<int> representation_ids(const DepSentence& sent, int target_id, Representation repr,
                                           int half_width = 7, const ChainOptions& opts = {}) {
  switch (repr) {
    case Representation::kChain: return extract_chain(sent, target_id, opts).member_ids;
    case Representation::kWindow: return extract_window(sent, target_id, half_width).member_ids;
    case Representation::kTree: {
      require_target(sent, target_id);
      std::vector<int> ids(static_cast<size_t>(sent.size()));
      for (int i = 0; i < sent.size(); ++i) ids[static_cast<size_t>(i)] = i + 1;
      return ids;
    }
  }
  return {};
}

inline std::vector<std::string> forms_of(const DepSentence& sent, const std::vector<int>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(sent.token(id).form);
  return out;
}

struct ChainStats {
  size_t mentions = 0;
  double mean_length = 0.0;
  double median_length = 0.0;
  double mean_window_length = 0.0;
  // Mean over mentions of |chain ∩ window| / |chain|.
  double window_overlap = 0.0;
};

inline ChainStats chain_stats(const Corpus& corpus, const std::vector<EventMention>& mentions, int half_width = 7) {
  if (mentions.empty()) throw Error("chain_stats: empty mention list");
  CorpusIndex index(corpus);
  std::vector<double> lengths;
  lengths.reserve(mentions.size());
  double overlap_sum = 0.0;
  double window_sum = 0.0;
  for (const auto& m : mentions) {
    auto si = index.find(m.doc_id, m.sent_id);
    if (!si) throw Error("chain_stats: dangling reference to sentence " + m.doc_id + "/" + m.sent_id);
    const auto& sent = corpus[*si];
    auto chain = extract_chain(sent, m.token_id);
    auto window = extract_window(sent, m.token_id, half_width);
    size_t shared = 0;
    for (int id : chain.member_ids)
      if (std::binary_search(window.member_ids.begin(), window.member_ids.end(), id)) ++shared;
    overlap_sum += static_cast<double>(shared) / static_cast<double>(chain.member_ids.size());
    window_sum += static_cast<double>(window.member_ids.size());
    lengths.push_back(static_cast<double>(chain.member_ids.size()));
  }
  ChainStats st;
  st.mentions = mentions.size();
  double total = 0.0;
  for (double l : lengths) total += l;
  const double n = static_cast<double>(lengths.size());
  st.mean_length = total / n;
  st.mean_window_length = window_sum / n;
  st.window_overlap = overlap_sum / n;
  std::sort(lengths.begin(), lengths.end());
  const size_t mid = lengths.size() / 2;
  st.median_length = lengths.size() % 2 ? lengths[mid] : 0.5 * (lengths[mid - 1] + lengths[mid]);
  return st;
}

// One line of an extraction dump.
inline nlohmann::ordered_json extraction_record(const DepSentence& sent, const EventMention& m, Representation repr,
                                                const std::vector<int>& ids) {
  nlohmann::ordered_json rec;
  rec["doc_id"] = sent.doc_id;
  rec["sent_id"] = sent.sent_id;
  rec["token_id"] = m.token_id;
  rec["kind"] = representation_name(repr);
  rec["forms"] = forms_of(sent, ids);
  rec["ids"] = ids;
  return rec;
}

}  // namespace evchain
