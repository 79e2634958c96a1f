#pragma once

// Deterministic synthetic event corpora.
//
// Every sentence follows one template:
//
//   The SUBJ AUX CUE [a OBJ] FILLER{L} [INTER | for] their TARGET TRAILING{2..6}
//
// AUX/CUE carry the label (FU: "will launch", PA: "had launched",
// OG: "is launching"). The L filler tokens hang off OBJ (or CUE) and the
// trailing clause hangs off CUE, so neither lies on the path from TARGET to
// the root. TARGET is governed by CUE directly or through INTER.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "evchain/corpus.hpp"
#include "evchain/error.hpp"

namespace evchain {

struct SynthConfig {
  int n_sentences = 1000;
  // PA / OG / FU proportions, default to the test-split distribution.
  std::array<double, 3> label_weights{0.67, 0.21, 0.12};
  int distractor_len = 9;
  std::uint64_t seed = 7;

  void validate() const {
    if (n_sentences < 1) throw Error("synthetic config: n_sentences must be >= 1");
    if (distractor_len < 0) throw Error("synthetic config: distractor_len must be >= 0");
    double sum = 0.0;
    for (double w : label_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error("synthetic config: label weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("synthetic config: label weights must sum to 1");
  }
};

struct SyntheticCorpus {
  Corpus sentences;
  std::vector<EventMention> mentions;
};

namespace synth_lexicon {

struct CueVerb {
  const char* base;
  const char* participle;
  const char* progressive;
};

inline const std::vector<const char*>& subjects() {
  static const std::vector<const char*> v{"union", "coalition", "group",    "movement",
                                          "federation", "council", "alliance", "committee"};
  return v;
}
inline const std::vector<CueVerb>& cue_verbs() {
  static const std::vector<CueVerb> v{
      {"launch", "launched", "launching"},    {"stage", "staged", "staging"},
      {"organize", "organized", "organizing"}, {"hold", "held", "holding"},
      {"begin", "begun", "beginning"},        {"lead", "led", "leading"},
      {"plan", "planned", "planning"},        {"call", "called", "calling"}};
  return v;
}
inline const std::vector<const char*>& objects() {
  static const std::vector<const char*> v{"campaign", "boycott", "vigil", "blockade", "petition", "drive"};
  return v;
}
inline const std::vector<const char*>& intermediates() {
  static const std::vector<const char*> v{"describing", "defending", "announcing", "promoting", "justifying",
                                          "explaining"};
  return v;
}
inline const std::vector<const char*>& targets() {
  static const std::vector<const char*> v{"protest", "march", "strike", "rally", "demonstration", "sit-in",
                                          "walkout"};
  return v;
}
inline const std::vector<const char*>& fillers() {
  static const std::vector<const char*> v{
      "here",   "on",     "friday", "in",    "old",       "city",      "square",  "near",
      "harbor", "after",  "weeks",  "of",    "tense",     "talks",     "amid",    "heavy",
      "rain",   "outside", "parliament", "with", "thousands", "local", "supporters", "across",
      "northern", "region", "large", "crowd", "hunger", "quiet"};
  return v;
}
inline const std::vector<const char*>& trailing() {
  static const std::vector<const char*> v{"as", "a", "moral", "reaction", "to", "an", "immoral", "situation",
                                          "over", "rising", "prices", "and", "low", "wages"};
  return v;
}
inline const char* aux_for(TemporalStatus s) {
  switch (s) {
    case TemporalStatus::kFuture: return "will";
    case TemporalStatus::kPast: return "had";
    case TemporalStatus::kOngoing: return "is";
  }
  return "will";
}

// Every lowercased surface form the generator can emit.
inline std::vector<std::string> vocabulary() {
  std::vector<std::string> out{"the", "a", "for", "their", "will", "had", "is"};
  auto add = [&](const std::vector<const char*>& words) {
    for (const char* w : words) out.emplace_back(w);
  };
  add(subjects());
  for (const auto& v : cue_verbs()) {
    out.emplace_back(v.base);
    out.emplace_back(v.participle);
    out.emplace_back(v.progressive);
  }
  add(objects());
  add(intermediates());
  add(targets());
  add(fillers());
  add(trailing());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace synth_lexicon

inline SyntheticCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  namespace lex = synth_lexicon;
  std::mt19937_64 rng(cfg.seed);
  auto pick = [&rng](const auto& items) -> const auto& {
    std::uniform_int_distribution<size_t> d(0, items.size() - 1);
    return items[d(rng)];
  };
  auto coin = [&rng]() { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };
  std::discrete_distribution<int> label_dist(cfg.label_weights.begin(), cfg.label_weights.end());
  std::uniform_int_distribution<int> trailing_len(2, 6);

  SyntheticCorpus out;
  out.sentences.reserve(static_cast<size_t>(cfg.n_sentences));
  for (int i = 0; i < cfg.n_sentences; ++i) {
    const auto status = status_from_index(label_dist(rng));
    DepSentence s;
    s.doc_id = "synth";
    s.sent_id = "s" + std::to_string(i + 1);
    auto add = [&s](std::string form, int head, std::string deprel) {
      Token t;
      t.id = s.size() + 1;
      t.form = std::move(form);
      t.head = head;
      t.deprel = std::move(deprel);
      s.tokens.push_back(std::move(t));
      return s.size();
    };
    // Heads that point forward are patched once the head's id is known.
    add("The", 2, "det");
    add(pick(lex::subjects()), 4, "nsubj");
    add(lex::aux_for(status), 4, "aux");
    const auto& verb = pick(lex::cue_verbs());
    const char* cue_form = status == TemporalStatus::kFuture ? verb.base
                           : status == TemporalStatus::kPast ? verb.participle
                                                             : verb.progressive;
    const int cue = add(cue_form, 0, "root");

    int filler_head = cue;
    std::string filler_rel = "obl";
    if (coin()) {
      add("a", s.size() + 2, "det");
      filler_head = add(pick(lex::objects()), cue, "dobj");
      filler_rel = "nmod";
    }
    int first_filler = 0;
    for (int k = 0; k < cfg.distractor_len; ++k) {
      if (k == 0) {
        first_filler = add(pick(lex::fillers()), filler_head, filler_rel);
      } else {
        add(pick(lex::fillers()), first_filler, "amod");
      }
    }

    int governor = cue;
    std::string target_rel = "obl";
    int case_tok = 0;
    if (coin()) {
      governor = add(pick(lex::intermediates()), cue, "xcomp");
      target_rel = "dobj";
    } else {
      case_tok = add("for", 0, "case");
    }
    const int poss = add("their", 0, "nmod:poss");
    const int target = add(pick(lex::targets()), governor, target_rel);
    s.tokens[static_cast<size_t>(poss - 1)].head = target;
    if (case_tok) s.tokens[static_cast<size_t>(case_tok - 1)].head = target;

    const int n_trailing = trailing_len(rng);
    int first_trailing = 0;
    for (int k = 0; k < n_trailing; ++k) {
      if (k == 0) {
        first_trailing = add(pick(lex::trailing()), cue, "advcl");
      } else {
        add(pick(lex::trailing()), first_trailing, "dep");
      }
    }
    validate_sentence(s);
    out.mentions.push_back(EventMention{s.doc_id, s.sent_id, target, status});
    out.sentences.push_back(std::move(s));
  }
  return out;
}

}  // namespace evchain
