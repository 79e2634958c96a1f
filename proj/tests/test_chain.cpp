#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "evchain/chain.hpp"
#include "evchain/synthetic.hpp"
#include "test_util.hpp"

using namespace evchain;

namespace {

DepSentence flat_sentence(int n) {
  DepSentence s;
  s.doc_id = "d";
  s.sent_id = "s";
  for (int i = 1; i <= n; ++i) s.tokens.push_back(Token{i, "w" + std::to_string(i), {}, {}, i == 1 ? 0 : 1, "dep"});
  return s;
}

std::vector<int> ids(std::initializer_list<int> v) { return std::vector<int>(v); }

// Reachability over the head relation by transitive closure, independent of
// the traversal in extract_chain.
std::vector<int> brute_force_stage1(const DepSentence& s, int target) {
  const int n = s.size();
  std::vector<std::vector<char>> reach(static_cast<size_t>(n + 1), std::vector<char>(static_cast<size_t>(n + 1), 0));
  for (const auto& t : s.tokens)
    if (t.head) reach[static_cast<size_t>(t.head)][static_cast<size_t>(t.id)] = 1;  // head governs id
  for (int k = 1; k <= n; ++k)
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
  std::vector<int> out;
  for (int x = 1; x <= n; ++x)
    if (x == target || reach[x][target] || reach[target][x]) out.push_back(x);
  return out;
}

}  // namespace

TEST_CASE("example (1) clause yields the expected chain", "[chain]") {
  const auto s = testing::example_one_fixture();
  const auto chain = extract_chain(s, 8);
  CHECK(chain.stage1_ids == ids({3, 6, 7, 8}));
  CHECK(forms_of(s, chain.stage1_ids) == std::vector<std::string>{"launch", "describing", "their", "protest"});
  CHECK(forms_of(s, chain.member_ids) ==
        std::vector<std::string>{"will", "launch", "describing", "their", "protest"});
}

TEST_CASE("single-token sentence chain is the token itself", "[chain]") {
  const auto chain = extract_chain(flat_sentence(1), 1);
  CHECK(chain.member_ids == ids({1}));
}

TEST_CASE("copula attached to a governor joins in stage two", "[chain]") {
  DepSentence s;
  s.tokens = {Token{1, "The", {}, {}, 2, "det"}, Token{2, "strike", {}, {}, 4, "nsubj"},
              Token{3, "is", {}, {}, 4, "cop"}, Token{4, "ongoing", {}, {}, 0, "root"}};
  const auto chain = extract_chain(s, 2);
  CHECK(chain.stage1_ids == ids({1, 2, 4}));
  CHECK(forms_of(s, chain.member_ids) == std::vector<std::string>{"The", "strike", "is", "ongoing"});
}

TEST_CASE("stage two is a single pass keyed on stage one", "[chain]") {
  DepSentence s;
  s.tokens = {Token{1, "launch", {}, {}, 0, "root"}, Token{2, "will", {}, {}, 1, "aux"},
              Token{3, "have", {}, {}, 2, "aux"}, Token{4, "been", {}, {}, 1, "aux:pass"}};
  const auto chain = extract_chain(s, 1);
  CHECK(chain.stage1_ids == ids({1, 2, 3, 4}));  // the target's subtree

  // With a different target, "will" enters through stage 2 but its own
  // auxiliary does not.
  DepSentence t;
  t.tokens = {Token{1, "launch", {}, {}, 0, "root"}, Token{2, "will", {}, {}, 1, "aux"},
              Token{3, "have", {}, {}, 2, "aux"}, Token{4, "protest", {}, {}, 1, "dobj"},
              Token{5, "been", {}, {}, 1, "aux:pass"}};
  const auto c2 = extract_chain(t, 4);
  CHECK(c2.stage1_ids == ids({1, 4}));
  CHECK(c2.member_ids == ids({1, 2, 4, 5}));
}

TEST_CASE("punctuation under the target is kept unless filtered", "[chain]") {
  DepSentence s;
  s.tokens = {Token{1, "march", {}, {}, 0, "root"}, Token{2, ",", {}, {}, 1, "punct"},
              Token{3, "big", {}, {}, 1, "amod"}};
  CHECK(extract_chain(s, 1).member_ids == ids({1, 2, 3}));
  CHECK(extract_chain(s, 1, ChainOptions{true}).member_ids == ids({1, 3}));
}

TEST_CASE("invalid targets are rejected", "[chain]") {
  const auto s = flat_sentence(3);
  CHECK_THROWS(extract_chain(s, 0));
  CHECK_THROWS(extract_chain(s, 4));
  CHECK_THROWS(extract_window(s, 4, 7));
  CHECK_THROWS(extract_window(s, 1, -1));
}

TEST_CASE("local windows clip to sentence bounds", "[chain][window]") {
  auto w = extract_window(flat_sentence(30), 15, 7);
  CHECK(w.member_ids.size() == 15);
  CHECK(w.member_ids.front() == 8);
  CHECK(w.member_ids.back() == 22);

  w = extract_window(flat_sentence(20), 1, 7);
  CHECK(w.member_ids == ids({1, 2, 3, 4, 5, 6, 7, 8}));

  w = extract_window(flat_sentence(5), 3, 7);
  CHECK(w.member_ids == ids({1, 2, 3, 4, 5}));

  w = extract_window(flat_sentence(5), 3, 0);
  CHECK(w.member_ids == ids({3}));
}

TEST_CASE("chain statistics", "[chain][stats]") {
  const auto s = testing::example_one_fixture();
  const Corpus one{s};
  const auto st = chain_stats(one, {EventMention{"ex", "1", 8, {}}});
  CHECK(st.mean_length == 5.0);
  CHECK(st.median_length == 5.0);

  // Chains of length 4 (target "strike": launch, a, strike + will) and 6.
  DepSentence t = s;
  t.sent_id = "2";
  t.tokens.push_back(Token{9, "soon", {}, {}, 8, "advmod"});
  const Corpus two{s, t};
  CHECK(extract_chain(s, 5).member_ids.size() == 4);
  CHECK(extract_chain(t, 8).member_ids.size() == 6);
  const auto st2 = chain_stats(two, {EventMention{"ex", "1", 5, {}}, EventMention{"ex", "2", 8, {}}});
  CHECK(st2.mean_length == 5.0);
  CHECK(st2.median_length == 5.0);

  CHECK_THROWS(chain_stats(one, {}));
}

TEST_CASE("synthetic distractors push the chain outside the window", "[chain][stats]") {
  SynthConfig cfg;
  cfg.n_sentences = 1000;
  cfg.seed = 7;
  cfg.distractor_len = 9;
  const auto syn = generate_synthetic(cfg);
  const auto st = chain_stats(syn.sentences, syn.mentions);
  CHECK(st.window_overlap < 1.0);
  int covered = 0, futures = 0;
  for (size_t i = 0; i < syn.mentions.size(); ++i) {
    if (syn.mentions[i].label != TemporalStatus::kFuture) continue;
    ++futures;
    const auto& s = syn.sentences[i];
    const auto forms = forms_of(s, extract_chain(s, syn.mentions[i].token_id).member_ids);
    if (std::find(forms.begin(), forms.end(), "will") != forms.end()) ++covered;
  }
  CHECK(covered == futures);
}

TEST_CASE("stage one equals governors plus subtree on random trees", "[chain][property]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = testing::random_tree(1 + static_cast<int>(rng() % 20), rng);
    const int target = 1 + static_cast<int>(rng() % static_cast<unsigned>(s.size()));
    const auto chain = extract_chain(s, target);
    REQUIRE(chain.stage1_ids == brute_force_stage1(s, target));
    REQUIRE(std::is_sorted(chain.member_ids.begin(), chain.member_ids.end()));
    REQUIRE(std::adjacent_find(chain.member_ids.begin(), chain.member_ids.end()) == chain.member_ids.end());
    REQUIRE(std::binary_search(chain.member_ids.begin(), chain.member_ids.end(), s.root_id()));
    REQUIRE(std::binary_search(chain.member_ids.begin(), chain.member_ids.end(), target));
  }
}

TEST_CASE("chain membership ignores token forms", "[chain][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = testing::random_tree(2 + static_cast<int>(rng() % 15), rng);
    const int target = 1 + static_cast<int>(rng() % static_cast<unsigned>(s.size()));
    auto shuffled = s;
    std::vector<std::string> forms;
    for (const auto& t : s.tokens) forms.push_back(t.form + "x");
    std::shuffle(forms.begin(), forms.end(), rng);
    for (size_t i = 0; i < forms.size(); ++i) shuffled.tokens[i].form = forms[i];
    REQUIRE(extract_chain(s, target).member_ids == extract_chain(shuffled, target).member_ids);
  }
}

TEST_CASE("removing an off-chain non-satellite leaf leaves the chain unchanged", "[chain][property]") {
  std::mt19937_64 rng(9);
  int removed = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto s = testing::random_tree(3 + static_cast<int>(rng() % 15), rng);
    const int target = 1 + static_cast<int>(rng() % static_cast<unsigned>(s.size()));
    const auto chain = extract_chain(s, target);
    const auto children = s.children();
    for (const auto& victim : s.tokens) {
      if (!children[static_cast<size_t>(victim.id)].empty() || is_satellite_relation(victim.deprel)) continue;
      if (std::binary_search(chain.stage1_ids.begin(), chain.stage1_ids.end(), victim.id)) continue;
      DepSentence smaller;
      auto remap = [&](int id) { return id > victim.id ? id - 1 : id; };
      for (const auto& t : s.tokens) {
        if (t.id == victim.id) continue;
        Token c = t;
        c.id = remap(t.id);
        c.head = remap(t.head);
        smaller.tokens.push_back(c);
      }
      REQUIRE_NOTHROW(validate_sentence(smaller));
      std::vector<int> expected;
      for (int id : chain.member_ids) expected.push_back(remap(id));
      REQUIRE(extract_chain(smaller, remap(target)).member_ids == expected);
      ++removed;
    }
  }
  CHECK(removed > 100);
}

TEST_CASE("extraction records carry forms and ids", "[chain]") {
  const auto s = testing::example_one_fixture();
  const EventMention m{"ex", "1", 8, TemporalStatus::kFuture};
  const auto rec = extraction_record(s, m, Representation::kChain, extract_chain(s, 8).member_ids);
  CHECK(rec["kind"] == "chain");
  CHECK(rec["forms"].size() == 5);
  CHECK(rec["ids"][0] == 2);
  CHECK(rec.dump().find("\"doc_id\":\"ex\"") != std::string::npos);
}
