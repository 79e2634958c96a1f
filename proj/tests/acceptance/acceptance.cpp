// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any
// failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "evchain/evchain.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace evchain;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kFixtureBudgetSec = 1.0;
constexpr double kChainMargin = 0.05;
constexpr double kCvBudgetSec = 600.0;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSec = 120.0;
constexpr int kGradSeeds = 20;
constexpr int kMetricTrials = 1000;
constexpr double kMajorityTolerance = 1e-9;
constexpr double kSaliencyTolerance = 1e-4;
constexpr double kCueTop1Rate = 0.70;
constexpr int kInvarianceTrees = 100;
constexpr double kInvarianceTolerance = 1e-12;

// Desk-scale configuration for the chain vs window experiment.
constexpr int kSynthN = 700;
constexpr std::uint64_t kSynthSeed = 7;
constexpr int kDistractorLen = 9;
constexpr size_t kEmbeddingDim = 32;
constexpr size_t kHidden = 32;
constexpr int kEpochs = 50;
constexpr size_t kFolds = 10;

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << detail << ")" << std::endl;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, name, std::string("threw: ") + e.what());
  }
}

// ----------------------------------------------------------------------------

void fixture_chain() {
  const auto t0 = Clock::now();
  const Corpus corpus = parse_conllu(slurp(fs::path(EVCHAIN_FIXTURES) / "example1.conllu"));
  const auto mentions = load_events(slurp(fs::path(EVCHAIN_FIXTURES) / "example1_events.jsonl"), corpus);
  const auto& s = corpus.at(0);
  const auto chain = extract_chain(s, mentions.at(0).token_id);
  const auto stage1 = forms_of(s, chain.stage1_ids);
  const std::multiset<std::string> stage1_set(stage1.begin(), stage1.end());
  const auto forms = forms_of(s, chain.member_ids);
  const double dt = seconds_since(t0);
  std::string joined;
  for (const auto& f : forms) joined += (joined.empty() ? "" : " ") + f;
  const bool pass = stage1_set == std::multiset<std::string>{"launch", "describing", "protest", "their"} &&
                    forms == std::vector<std::string>{"will", "launch", "describing", "their", "protest"} &&
                    dt < kFixtureBudgetSec;
  report(1, pass, "example fixture chain", "chain \"" + joined + "\", " + fmt("%.4f s", dt));
}

struct ChainExperiment {
  std::unique_ptr<testing::SynthSetup> setup;
  std::optional<CvResult> chain;
};

void chain_vs_window(ChainExperiment& exp) {
  const auto t0 = Clock::now();
  exp.setup = testing::synth_setup(kSynthN, kEmbeddingDim, kSynthSeed, kDistractorLen);
  TrainConfig cfg;
  cfg.model_type = nn::ModelType::kLstm;
  cfg.hidden = kHidden;
  cfg.epochs = kEpochs;
  cfg.learning_rate = 0.001;
  cfg.dropout = 0.5;
  cfg.batch_size = 16;
  cfg.seed = 1;
  std::vector<size_t> all(exp.setup->examples.size());
  std::iota(all.begin(), all.end(), size_t{0});

  cfg.representation = Representation::kChain;
  exp.chain = cross_validate(cfg, exp.setup->examples, all, kFolds, exp.setup->table);
  cfg.representation = Representation::kWindow;
  const auto window = cross_validate(cfg, exp.setup->examples, all, kFolds, exp.setup->table);
  const double dt = seconds_since(t0);
  const double chain_f1 = exp.chain->pooled.micro.f1;
  const double window_f1 = window.pooled.micro.f1;
  const bool pass = chain_f1 - window_f1 >= kChainMargin && dt < kCvBudgetSec;
  report(2, pass, "chain beats window by >= 5 points micro-F1",
         fmt("chain %.4f", chain_f1) + fmt(", window %.4f", window_f1) + fmt(", %.1f s", dt));
}

nn::ModelInput random_family_input(nn::ModelType type, std::mt19937_64& rng) {
  auto x = testing::random_grid(9, 6, rng);
  if (type != nn::ModelType::kTreeLstm) return testing::sequence_input(std::move(x));
  return testing::tree_input(testing::random_tree(9, rng), std::move(x));
}

void gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  for (auto type : {nn::ModelType::kLstm, nn::ModelType::kCnn, nn::ModelType::kTreeLstm}) {
    for (int seed = 0; seed < kGradSeeds; ++seed) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 1000);
      nn::Model model(testing::small_config(type), static_cast<std::uint64_t>(seed));
      const auto in = random_family_input(type, rng);
      const auto r = nn::check_parameter_gradients(model, in, seed % 3);
      if (r.max_rel_error > worst || where.empty()) {
        worst = std::max(worst, r.max_rel_error);
        where = std::string(nn::model_type_name(type)) + " seed " + std::to_string(seed) + " " + r.worst_param;
      }
    }
  }
  const double dt = seconds_since(t0);
  report(3, worst < kGradTolerance && dt < kGradBudgetSec, "gradient check, 3 families x 20 seeds",
         fmt("max rel error %.2e", worst) + " at " + where + fmt(", %.2f s", dt));
}

void metric_identities() {
  std::mt19937_64 rng(4);
  bool ok = true;
  for (int trial = 0; trial < kMetricTrials && ok; ++trial) {
    const size_t n = 1 + rng() % 300;
    std::vector<int> gold(n), pred(n);
    for (size_t i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng() % 3);
      pred[i] = static_cast<int>(rng() % 3);
    }
    const auto m = Metrics::from_predictions(gold, pred);
    long correct = 0;
    for (size_t i = 0; i < n; ++i) correct += gold[i] == pred[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(n);
    ok &= m.micro.precision == acc && m.micro.recall == acc && m.micro.f1 == acc;
    for (int k = 0; k < 3; ++k) {
      long tp = 0, predicted = 0, actual = 0;
      for (size_t i = 0; i < n; ++i) {
        tp += gold[i] == k && pred[i] == k;
        predicted += pred[i] == k;
        actual += gold[i] == k;
      }
      const double p = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
      const double r = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
      ok &= m.per_class[k].precision == p && m.per_class[k].recall == r;
    }
  }
  std::vector<int> gold;
  gold.insert(gold.end(), 1406, 0);
  gold.insert(gold.end(), 429, 1);
  gold.insert(gold.end(), 254, 2);
  const auto majority = Metrics::from_predictions(gold, std::vector<int>(gold.size(), 0));
  const double err = std::abs(majority.micro.f1 - 1406.0 / 2089.0);
  report(4, ok && err <= kMajorityTolerance, "metric identities",
         std::string(ok ? "1000 random vectors agree" : "random vectors disagree") +
             fmt(", always-PA micro-F1 %.9f", majority.micro.f1));
}

void saliency_validity(const ChainExperiment& exp) {
  // Finite differences on random LSTMs.
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 77);
    nn::Model model(testing::small_config(nn::ModelType::kLstm), static_cast<std::uint64_t>(seed));
    auto in = testing::sequence_input(testing::random_grid(7, 6, rng));
    const std::vector<std::string> forms(7, "w");
    const auto label = status_from_index(seed % 3);
    const auto map = compute_saliency(model, in, forms, label);
    const double eps = 1e-5;
    for (size_t t = 0; t < 7; ++t)
      for (size_t d = 0; d < 6; ++d) {
        const double saved = in.embeddings[t][d];
        in.embeddings[t][d] = saved + eps;
        const double up = model.loss(in, status_index(label));
        in.embeddings[t][d] = saved - eps;
        const double down = model.loss(in, status_index(label));
        in.embeddings[t][d] = saved;
        worst = std::max(worst, nn::relative_error(map.raw[t][d], std::abs((up - down) / (2 * eps))));
      }
  }

  // Cue tokens on held-out FUTURE items the trained chain LSTMs get right.
  size_t eligible = 0, cue_top = 0;
  if (exp.chain) {
    const int future = status_index(TemporalStatus::kFuture);
    for (const auto& fold : exp.chain->folds) {
      const TrainedModel& tm = *fold.model;
      for (size_t j = 0; j < fold.test_indices.size(); ++j) {
        const Example& ex = exp.setup->examples[fold.test_indices[j]];
        if (ex.label != future || fold.predictions[j] != future) continue;
        ++eligible;
        const DepSentence& s = *ex.sentence;
        const auto ids = representation_ids(s, ex.target_id, Representation::kChain);
        const auto map =
            compute_saliency(tm.model, tm.input_for(s, ex.target_id), forms_of(s, ids), TemporalStatus::kFuture);
        const size_t top = static_cast<size_t>(std::max_element(map.scores.begin(), map.scores.end()) -
                                               map.scores.begin());
        const Token& tok = s.token(ids[top]);
        bool is_cue = tok.form == "will";
        for (const auto& t : s.tokens)
          if (t.form == "will" && t.head == tok.id) is_cue = true;  // the cue verb governing "will"
        cue_top += is_cue;
      }
    }
  }
  const double rate = eligible ? static_cast<double>(cue_top) / static_cast<double>(eligible) : 0.0;
  report(5, worst < kSaliencyTolerance && eligible > 0 && rate >= kCueTop1Rate, "saliency validity",
         fmt("max rel error %.2e", worst) + ", cue top-1 " + std::to_string(cue_top) + "/" + std::to_string(eligible) +
             fmt(" = %.3f", rate));
}

void cli_determinism() {
  const fs::path work = EVCHAIN_WORKDIR;
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cli = EVCHAIN_CLI;
  if (shell(cli + " gen --out " + (work / "data").string() + " --n 150 --seed 3 --dim 16") != 0)
    throw Error("gen failed");
  const std::string args = " cv --model lstm --repr chain --repr window --folds 5 --epochs 3 --hidden 8 --jobs 2 --seed 5"
                           " --conllu " + (work / "data/corpus.conllu").string() +
                           " --events " + (work / "data/events.jsonl").string() +
                           " --embeddings " + (work / "data/embeddings.txt").string();
  for (const char* run : {"run_a", "run_b"})
    if (shell(cli + args + " --out " + (work / run).string()) != 0) throw Error(std::string("cv failed: ") + run);
  size_t compared = 0;
  bool same = true;
  for (const auto& entry : fs::recursive_directory_iterator(work / "run_a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), work / "run_a");
    const fs::path other = work / "run_b" / rel;
    same &= fs::exists(other) && slurp(entry.path()) == slurp(other);
    ++compared;
  }
  const bool has_report = fs::exists(work / "run_a" / "report.json");
  const bool has_ckpt = fs::exists(work / "run_a" / "chain" / "fold_01.ckpt");
  report(6, same && has_report && has_ckpt && compared >= 12, "two cv runs are bitwise identical",
         std::to_string(compared) + " files compared");
}

void tree_invariance() {
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < kInvarianceTrees; ++trial) {
    const auto s = testing::random_tree(2 + static_cast<int>(rng() % 14), rng);
    nn::Model tree(testing::small_config(nn::ModelType::kTreeLstm), static_cast<std::uint64_t>(trial));
    auto in = testing::tree_input(s, testing::random_grid(s.tokens.size(), 6, rng));
    const auto before = tree.logits(in);
    for (auto& kids : in.children) std::shuffle(kids.begin(), kids.end(), rng);
    const auto after = tree.logits(in);
    for (size_t c = 0; c < before.size(); ++c) worst = std::max(worst, std::abs(before[c] - after[c]));
  }
  report(7, worst <= kInvarianceTolerance, "tree-LSTM invariant to child order",
         std::to_string(kInvarianceTrees) + fmt(" trees, max |delta logit| %.2e", worst));
}

}  // namespace

int main() {
  ChainExperiment exp;
  guarded(1, "example fixture chain", fixture_chain);
  guarded(2, "chain beats window by >= 5 points micro-F1", [&] { chain_vs_window(exp); });
  guarded(3, "gradient check, 3 families x 20 seeds", gradient_check);
  guarded(4, "metric identities", metric_identities);
  guarded(5, "saliency validity", [&] { saliency_validity(exp); });
  guarded(6, "two cv runs are bitwise identical", cli_determinism);
  guarded(7, "tree-LSTM invariant to child order", tree_invariance);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << 7 - failures << "/7" << std::endl;
  return failures ? 1 : 0;
}
