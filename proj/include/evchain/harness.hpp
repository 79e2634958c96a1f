#pragma once

// Training loop, tuning/test split, k-fold cross-validation and evaluation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "evchain/chain.hpp"
#include "evchain/corpus.hpp"
#include "evchain/embeddings.hpp"
#include "evchain/error.hpp"
#include "evchain/metrics.hpp"
#include "evchain/models.hpp"
#include "evchain/nncore.hpp"

namespace evchain {

struct TrainConfig {
  nn::ModelType model_type = nn::ModelType::kLstm;
  Representation representation = Representation::kChain;
  double learning_rate = 0.001;
  int epochs = 50;
  double dropout = 0.5;
  size_t hidden = 300;
  int half_width = 7;
  size_t batch_size = 16;
  std::uint64_t seed = 1;
  bool finetune_embeddings = false;
  nn::Activation activation = nn::Activation::kRelu;
  nn::TreeReadout readout = nn::TreeReadout::kRoot;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  double init_scale = 0.05;

  void validate() const {
    if (epochs < 0) throw Error("train config: epochs must be >= 0");
    if (hidden == 0) throw Error("train config: hidden must be positive");
    if (batch_size == 0) throw Error("train config: batch_size must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("train config: dropout must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw Error("train config: learning_rate must be positive");
    if (half_width < 0) throw Error("train config: half_width must be >= 0");
    if ((representation == Representation::kTree) != (model_type == nn::ModelType::kTreeLstm))
      throw Error("train config: the tree representation pairs only with the treelstm model");
  }

  nn::ModelConfig model_config(size_t input_dim) const {
    nn::ModelConfig mc;
    mc.type = model_type;
    mc.input_dim = input_dim;
    mc.hidden = hidden;
    mc.dropout = dropout;
    mc.activation = activation;
    mc.readout = readout;
    mc.init_scale = init_scale;
    return mc;
  }

  nlohmann::ordered_json to_json() const {
    return {{"model", nn::model_type_name(model_type)},
            {"representation", representation_name(representation)},
            {"learning_rate", learning_rate},
            {"epochs", epochs},
            {"dropout", dropout},
            {"hidden", hidden},
            {"half_width", half_width},
            {"batch_size", batch_size},
            {"seed", seed},
            {"finetune_embeddings", finetune_embeddings},
            {"activation", activation == nn::Activation::kRelu ? "relu" : "tanh"},
            {"readout", readout == nn::TreeReadout::kRoot ? "root" : "target"},
            {"rmsprop_decay", rmsprop_decay},
            {"rmsprop_epsilon", rmsprop_epsilon},
            {"init_scale", init_scale}};
  }
};

// A trained classifier together with the word vectors it reads. Fine-tuned
// rows live in `overrides`, keyed like the base table.
struct TrainedModel {
  nn::Model model;
  std::shared_ptr<const nn::EmbeddingTable> base;
  std::map<std::string, nn::Vec> overrides;
  nn::Vec unk;
  Representation representation = Representation::kChain;
  int half_width = 7;

  const nn::Vec& lookup(std::string_view form) const {
    std::string key = base->resolve(form);
    if (key.empty()) return unk;
    if (auto it = overrides.find(key); it != overrides.end()) return it->second;
    return base->lookup(key);
  }

  nn::ModelInput input_for(const DepSentence& sent, int target_id) const {
    nn::ModelInput in = nn::make_input(sent, target_id, representation, *base, half_width);
    const auto ids = representation_ids(sent, target_id, representation, half_width);
    for (size_t i = 0; i < ids.size(); ++i) in.embeddings[i] = lookup(sent.token(ids[i]).form);
    return in;
  }
};

// One labeled mention resolved against its sentence.
struct Example {
  const DepSentence* sentence = nullptr;
  int target_id = 0;
  int label = -1;
};

inline std::vector<Example> resolve_examples(const Corpus& corpus, const std::vector<EventMention>& mentions,
                                             bool require_labels = true) {
  CorpusIndex index(corpus);
  std::vector<Example> out;
  out.reserve(mentions.size());
  for (const auto& m : mentions) {
    auto si = index.find(m.doc_id, m.sent_id);
    if (!si) throw Error("dangling reference to sentence " + m.doc_id + "/" + m.sent_id);
    if (!corpus[*si].valid_id(m.token_id))
      throw Error("token_id " + std::to_string(m.token_id) + " out of range for " + corpus[*si].locator());
    if (require_labels && !m.label) throw Error("unlabeled mention in " + corpus[*si].locator());
    out.push_back(Example{&corpus[*si], m.token_id, m.label ? status_index(*m.label) : -1});
  }
  return out;
}

// Seeded shuffle, then round(0.2 n) tuning indices and the remainder as test.
inline std::pair<std::vector<size_t>, std::vector<size_t>> split_tuning_test(size_t n, std::uint64_t seed) {
  if (n < 5) throw Error("split_tuning_test: need at least 5 examples, got " + std::to_string(n));
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  nn::Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const size_t tuning = (2 * n + 5) / 10;
  return {std::vector<size_t>(idx.begin(), idx.begin() + static_cast<long>(tuning)),
          std::vector<size_t>(idx.begin() + static_cast<long>(tuning), idx.end())};
}

struct FoldPlan {
  std::vector<std::vector<size_t>> folds;
};

// Seeded shuffle, then contiguous chunks; the first n mod k folds hold one
// extra item.
inline FoldPlan kfold(size_t n, size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("kfold: k must be positive");
  if (n < k) throw Error("kfold: " + std::to_string(n) + " examples cannot fill " + std::to_string(k) + " folds");
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  nn::Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  FoldPlan plan;
  size_t pos = 0;
  for (size_t f = 0; f < k; ++f) {
    const size_t size = n / k + (f < n % k ? 1 : 0);
    plan.folds.emplace_back(idx.begin() + static_cast<long>(pos), idx.begin() + static_cast<long>(pos + size));
    pos += size;
  }
  return plan;
}

struct TrainResult {
  TrainedModel model;
  std::vector<double> loss_history;      // mean training loss per epoch
  std::vector<double> accuracy_history;  // train-mode accuracy per epoch
};

namespace detail {

// Trainable copy of the word vectors that occur in the training set.
struct EmbeddingTuner {
  std::vector<std::string> keys;  // "" stands for unk
  std::map<std::string, size_t> row;
  nn::ParamSet params;
  size_t table = 0;

  EmbeddingTuner(const nn::EmbeddingTable& base, const std::vector<Example>& examples,
                 const std::vector<size_t>& indices, Representation repr, int half_width) {
    std::map<std::string, nn::Vec> found;
    for (size_t i : indices) {
      const Example& ex = examples[i];
      for (int id : representation_ids(*ex.sentence, ex.target_id, repr, half_width)) {
        std::string key = base.resolve(ex.sentence->token(id).form);
        found.emplace(key, key.empty() ? base.unk() : base.lookup(key));
      }
    }
    table = params.add("embeddings", {std::max<size_t>(found.size(), 1), base.dim()});
    for (const auto& [key, v] : found) {
      row.emplace(key, keys.size());
      std::copy(v.begin(), v.end(), params.value(table).row(keys.size()).begin());
      keys.push_back(key);
    }
  }

  std::vector<size_t> rows_for(const nn::EmbeddingTable& base, const Example& ex, Representation repr,
                               int half_width) const {
    std::vector<size_t> out;
    for (int id : representation_ids(*ex.sentence, ex.target_id, repr, half_width))
      out.push_back(row.at(base.resolve(ex.sentence->token(id).form)));
    return out;
  }
};

}  // namespace detail

// Epochs of seeded shuffle -> mini-batches -> forward/backward -> RMSProp.
// Gradients are averaged over each batch.
inline TrainResult train_examples(const TrainConfig& cfg, const std::vector<Example>& examples,
                                  const std::vector<size_t>& indices,
                                  std::shared_ptr<const nn::EmbeddingTable> table) {
  cfg.validate();
  if (!table) throw Error("train: no embedding table");
  TrainResult result{TrainedModel{nn::Model(cfg.model_config(table->dim()), cfg.seed), table, {}, table->unk(),
                                  cfg.representation, cfg.half_width},
                     {},
                     {}};
  TrainedModel& tm = result.model;
  if (cfg.epochs == 0) return result;
  if (indices.empty()) throw Error("train: empty training set");

  std::vector<nn::ModelInput> inputs(examples.size());
  for (size_t i : indices) inputs[i] = tm.input_for(*examples[i].sentence, examples[i].target_id);

  std::optional<detail::EmbeddingTuner> tuner;
  std::vector<std::vector<size_t>> rows(examples.size());
  if (cfg.finetune_embeddings) {
    tuner.emplace(*table, examples, indices, cfg.representation, cfg.half_width);
    for (size_t i : indices) rows[i] = tuner->rows_for(*table, examples[i], cfg.representation, cfg.half_width);
  }

  const nn::RmsPropConfig opt_cfg{cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon};
  nn::RmsProp opt(opt_cfg);
  nn::RmsProp emb_opt(opt_cfg);
  nn::Rng rng(cfg.seed ^ 0x5eedf00dULL);
  std::vector<size_t> order = indices;
  nn::ParamSet& params = tm.model.params();
  params.zero_grad();
  nn::Grid dx;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    size_t correct = 0;
    for (size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      for (size_t b = start; b < stop; ++b) {
        const size_t i = order[b];
        nn::ModelInput& in = inputs[i];
        if (tuner)
          for (size_t t = 0; t < rows[i].size(); ++t) {
            auto r = tuner->params.value(tuner->table).row(rows[i][t]);
            in.embeddings[t].assign(r.begin(), r.end());
          }
        nn::Pass pass;
        try {
          pass = tm.model.train_step(in, examples[i].label, nn::Mode::kTrain, &rng, tuner ? &dx : nullptr);
        } catch (const Error& e) {
          throw Error("train: epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1) + ": " +
                      e.what());
        }
        if (!std::isfinite(pass.loss))
          throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                      std::to_string(batch + 1));
        loss_sum += pass.loss;
        if (status_index(nn::classify_logits(pass.logits).status) == examples[i].label) ++correct;
        if (tuner)
          for (size_t t = 0; t < rows[i].size(); ++t)
            nn::add_to(tuner->params.grad(tuner->table).row(rows[i][t]), dx[t]);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      params.scale_grad(scale);
      opt.step(params);
      if (tuner) {
        tuner->params.scale_grad(scale);
        emb_opt.step(tuner->params);
      }
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(order.size()));
    result.accuracy_history.push_back(static_cast<double>(correct) / static_cast<double>(order.size()));
  }

  if (tuner) {
    for (size_t r = 0; r < tuner->keys.size(); ++r) {
      auto v = tuner->params.value(tuner->table).row(r);
      if (tuner->keys[r].empty()) {
        tm.unk.assign(v.begin(), v.end());
      } else {
        tm.overrides[tuner->keys[r]] = nn::Vec(v.begin(), v.end());
      }
    }
  }
  return result;
}

inline TrainResult train(const TrainConfig& cfg, const Corpus& corpus, const std::vector<EventMention>& mentions,
                         std::shared_ptr<const nn::EmbeddingTable> table) {
  const auto examples = resolve_examples(corpus, mentions);
  std::vector<size_t> all(examples.size());
  std::iota(all.begin(), all.end(), size_t{0});
  return train_examples(cfg, examples, all, std::move(table));
}

// Eval-mode class index for each selected example.
inline std::vector<int> predict(const TrainedModel& tm, const std::vector<Example>& examples,
                                const std::vector<size_t>& indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (size_t i : indices)
    out.push_back(status_index(tm.model.classify(tm.input_for(*examples[i].sentence, examples[i].target_id)).status));
  return out;
}

inline Metrics evaluate_examples(const TrainedModel& tm, const std::vector<Example>& examples,
                                 const std::vector<size_t>& indices) {
  if (indices.empty()) throw Error("evaluate: empty evaluation set");
  std::vector<int> gold;
  for (size_t i : indices) gold.push_back(examples[i].label);
  const auto pred = predict(tm, examples, indices);
  return Metrics::from_predictions(gold, pred);
}

inline Metrics evaluate(const TrainedModel& tm, const Corpus& corpus, const std::vector<EventMention>& mentions) {
  const auto examples = resolve_examples(corpus, mentions);
  std::vector<size_t> all(examples.size());
  std::iota(all.begin(), all.end(), size_t{0});
  return evaluate_examples(tm, examples, all);
}

struct FoldResult {
  std::vector<size_t> test_indices;
  std::vector<int> predictions;
  Metrics metrics;
  std::vector<double> loss_history;
  std::optional<TrainedModel> model;
};

struct CvResult {
  FoldPlan plan;
  std::vector<FoldResult> folds;
  Metrics pooled;
};

// Trains on k-1 folds and evaluates the held-out fold, for every fold. Folds
// may run on `jobs` threads; results are ordered by fold index and pooled by
// summing confusion matrices.
inline CvResult cross_validate(const TrainConfig& cfg, const std::vector<Example>& examples,
                               const std::vector<size_t>& indices, size_t k,
                               std::shared_ptr<const nn::EmbeddingTable> table, size_t jobs = 1) {
  cfg.validate();
  CvResult cv;
  const FoldPlan local = kfold(indices.size(), k, cfg.seed);
  for (const auto& fold : local.folds) {
    std::vector<size_t> mapped;
    for (size_t j : fold) mapped.push_back(indices[j]);
    cv.plan.folds.push_back(std::move(mapped));
  }
  cv.folds.resize(k);
  std::vector<std::exception_ptr> errors(k);

  auto run_fold = [&](size_t f) {
    try {
      std::vector<size_t> train_idx;
      for (size_t g = 0; g < k; ++g)
        if (g != f) train_idx.insert(train_idx.end(), cv.plan.folds[g].begin(), cv.plan.folds[g].end());
      std::sort(train_idx.begin(), train_idx.end());
      TrainResult tr = train_examples(cfg, examples, train_idx, table);
      FoldResult& fr = cv.folds[f];
      fr.test_indices = cv.plan.folds[f];
      fr.predictions = predict(tr.model, examples, fr.test_indices);
      std::vector<int> gold;
      for (size_t i : fr.test_indices) gold.push_back(examples[i].label);
      fr.metrics = Metrics::from_predictions(gold, fr.predictions);
      fr.loss_history = std::move(tr.loss_history);
      fr.model = std::move(tr.model);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  if (jobs <= 1) {
    for (size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (size_t w = 0; w < std::min(jobs, k); ++w)
      workers.emplace_back([&] {
        for (size_t f = next++; f < k; f = next++) run_fold(f);
      });
    for (auto& t : workers) t.join();
  }

  for (size_t f = 0; f < k; ++f) {
    if (!errors[f]) continue;
    try {
      std::rethrow_exception(errors[f]);
    } catch (const std::exception& e) {
      throw Error("fold " + std::to_string(f + 1) + ": " + e.what());
    }
  }
  Confusion pooled{};
  for (const auto& fr : cv.folds) pooled = pooled + fr.metrics.confusion;
  cv.pooled = Metrics::from_confusion(pooled);
  return cv;
}

inline CvResult cross_validate(const TrainConfig& cfg, const Corpus& corpus,
                               const std::vector<EventMention>& mentions, size_t k,
                               std::shared_ptr<const nn::EmbeddingTable> table, size_t jobs = 1) {
  const auto examples = resolve_examples(corpus, mentions);
  std::vector<size_t> all(examples.size());
  std::iota(all.begin(), all.end(), size_t{0});
  return cross_validate(cfg, examples, all, k, std::move(table), jobs);
}

}  // namespace evchain
