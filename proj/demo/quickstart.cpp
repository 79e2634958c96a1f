// Extracts a dependency chain, trains a small chain LSTM on synthetic data and
// prints the saliency of one held-out future mention.

#include <iostream>
#include <memory>
#include <numeric>

#include "evchain/evchain.hpp"

using namespace evchain;

int main() {
  const char* conllu =
      "1\tActivists\t_\t_\t_\t_\t3\tnsubj\t_\t_\n"
      "2\twill\t_\t_\t_\t_\t3\taux\t_\t_\n"
      "3\tlaunch\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "4\ta\t_\t_\t_\t_\t5\tdet\t_\t_\n"
      "5\tstrike\t_\t_\t_\t_\t3\tdobj\t_\t_\n"
      "6\tdescribing\t_\t_\t_\t_\t3\txcomp\t_\t_\n"
      "7\ttheir\t_\t_\t_\t_\t8\tnmod:poss\t_\t_\n"
      "8\tprotest\t_\t_\t_\t_\t6\tdobj\t_\t_\n";
  const Corpus parsed = parse_conllu(conllu);
  const DepSentence& s = parsed.front();
  std::cout << "chain for 'protest':";
  for (const auto& form : forms_of(s, extract_chain(s, 8).member_ids)) std::cout << ' ' << form;
  std::cout << "\n\n";

  SynthConfig syn_cfg;
  syn_cfg.n_sentences = 300;
  const auto syn = generate_synthetic(syn_cfg);
  auto table =
      std::make_shared<const nn::EmbeddingTable>(nn::random_embeddings(synth_lexicon::vocabulary(), 16, 1));
  const auto examples = resolve_examples(syn.sentences, syn.mentions);
  auto [held_out, train_idx] = split_tuning_test(examples.size(), 1);

  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 80;
  const auto result = train_examples(cfg, examples, train_idx, table);
  const auto metrics = evaluate_examples(result.model, examples, held_out);
  std::cout << metrics_table({{"chain", metrics}}) << "\n";

  for (size_t i : held_out) {
    const Example& ex = examples[i];
    if (ex.label != status_index(TemporalStatus::kFuture)) continue;
    const auto ids = representation_ids(*ex.sentence, ex.target_id, Representation::kChain);
    auto map = compute_saliency(result.model.model, result.model.input_for(*ex.sentence, ex.target_id),
                                forms_of(*ex.sentence, ids), TemporalStatus::kFuture);
    map.gold = TemporalStatus::kFuture;
    std::cout << heatmap_csv(map);
    break;
  }
  return 0;
}
