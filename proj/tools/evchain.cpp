// evchain: generate corpora, extract chains, train/evaluate/cross-validate
// temporal status classifiers, draw saliency heatmaps and check gradients.

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evchain/evchain.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace evchain;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out.flush()) throw Error("cannot write '" + path.string() + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// Records what a command read and wrote; written next to its artifacts.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

  void config(json c) { config_ = std::move(c); }
  void input(const std::string& role, const std::string& path, const std::string& content) {
    inputs_[role] = {{"path", path}, {"sha256", sha256_hex(content)}};
  }
  void output(const std::string& name, const std::string& content) { outputs_[name] = sha256_hex(content); }

  std::string dump() const {
    json j;
    j["command"] = command_;
    j["version"] = EVCHAIN_VERSION;
    j["seed"] = seed_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    return j.dump(2) + "\n";
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  json config_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
};

// Writes `content` to `path` and records its digest under `name`.
void emit(Manifest& manifest, const fs::path& path, const std::string& name, const std::string& content) {
  write_file(path, content);
  manifest.output(name, content);
}

std::string data_dir_default(const char* file) {
  const char* dir = std::getenv("EVCHAIN_DATA_DIR");
  if (!dir || !*dir) return "";
  return file ? (fs::path(dir) / file).string() : std::string(dir);
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required (or set EVCHAIN_DATA_DIR)");
}

struct CorpusInputs {
  std::string conllu_path = data_dir_default("corpus.conllu");
  std::string events_path = data_dir_default("events.jsonl");
  Corpus corpus;
  std::vector<EventMention> mentions;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--conllu", conllu_path, "CoNLL-U corpus")->capture_default_str();
    cmd->add_option("--events", events_path, "event mentions, JSON lines")->capture_default_str();
  }

  void load(Manifest& manifest) {
    require_path(conllu_path, "--conllu");
    require_path(events_path, "--events");
    const std::string conllu = read_file(conllu_path);
    const std::string events = read_file(events_path);
    manifest.input("conllu", conllu_path, conllu);
    manifest.input("events", events_path, events);
    corpus = parse_conllu(conllu);
    mentions = load_events(events, corpus);
  }
};

std::shared_ptr<const nn::EmbeddingTable> load_embeddings(const std::string& path, Manifest& manifest,
                                                          std::uint64_t unk_seed) {
  require_path(path, "--embeddings");
  const std::string text = read_file(path);
  manifest.input("embeddings", path, text);
  return std::make_shared<const nn::EmbeddingTable>(nn::EmbeddingTable::parse(text, unk_seed));
}

// Flags shared by train and cv.
struct TrainFlags {
  std::string model = "lstm";
  std::string repr = "chain";
  TrainConfig cfg;
  std::string readout = "root";
  std::string embeddings = data_dir_default("embeddings.txt");

  void add_flags(CLI::App* cmd, bool single_repr) {
    cmd->add_option("--model", model, "lstm | cnn | treelstm")
        ->check(CLI::IsMember({"lstm", "cnn", "treelstm"}))
        ->capture_default_str();
    if (single_repr)
      cmd->add_option("--repr", repr, "chain | window | tree")
          ->check(CLI::IsMember({"chain", "window", "tree"}))
          ->capture_default_str();
    cmd->add_option("--epochs", cfg.epochs, "training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate, "RMSProp learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--dropout", cfg.dropout, "dropout ratio on the penultimate layer")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    cmd->add_option("--hidden", cfg.hidden, "hidden units / filters")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--half-width", cfg.half_width, "window half width")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--readout", readout, "tree-LSTM readout node: root | target")
        ->check(CLI::IsMember({"root", "target"}))
        ->capture_default_str();
    cmd->add_flag("--finetune-embeddings", cfg.finetune_embeddings, "update word vectors during training");
    cmd->add_option("--embeddings", embeddings, "word2vec text embeddings")->capture_default_str();
  }

  TrainConfig resolve(const std::string& representation) const {
    TrainConfig c = cfg;
    c.model_type = nn::parse_model_type(model);
    c.representation = parse_representation(representation);
    c.readout = readout == "root" ? nn::TreeReadout::kRoot : nn::TreeReadout::kTarget;
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(std::string("--model/--repr: ") + e.what());
    }
    return c;
  }
};

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string out = data_dir_default(nullptr);
  int n = 1000;
  std::uint64_t seed = 7;
  std::string weights = "0.67,0.21,0.12";
  int distractor_len = 9;
  size_t dim = 300;
};

std::array<double, 3> parse_weights(const std::string& text) {
  std::array<double, 3> w{};
  std::stringstream ss(text);
  std::string item;
  size_t k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= 3) throw UsageError("--weights: expected three comma-separated values");
    try {
      size_t used = 0;
      w[k] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--weights: '" + item + "' is not a number");
    }
    ++k;
  }
  if (k != 3) throw UsageError("--weights: expected three comma-separated values");
  SynthConfig probe;
  probe.label_weights = w;
  try {
    probe.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--weights: ") + e.what());
  }
  return w;
}

int run_gen(const GenArgs& a) {
  require_path(a.out, "--out");
  SynthConfig cfg;
  cfg.n_sentences = a.n;
  cfg.seed = a.seed;
  cfg.distractor_len = a.distractor_len;
  cfg.label_weights = parse_weights(a.weights);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("--n/--distractor-len: ") + e.what());
  }
  if (a.dim == 0) throw UsageError("--dim: must be positive");

  const auto syn = generate_synthetic(cfg);
  const fs::path dir(a.out);
  Manifest manifest("gen", a.seed);
  manifest.config({{"n", a.n},
                   {"seed", a.seed},
                   {"weights", cfg.label_weights},
                   {"distractor_len", a.distractor_len},
                   {"dim", a.dim}});
  emit(manifest, dir / "corpus.conllu", "corpus.conllu", to_conllu(syn.sentences));
  emit(manifest, dir / "events.jsonl", "events.jsonl", events_to_jsonl(syn.mentions));
  emit(manifest, dir / "embeddings.txt", "embeddings.txt",
       nn::random_embeddings(synth_lexicon::vocabulary(), a.dim, a.seed).to_text());
  write_file(dir / "manifest.json", manifest.dump());
  std::cout << "wrote " << syn.sentences.size() << " sentences to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  CorpusInputs data;
  std::string mode = "chain";
  int half_width = 7;
  std::string out;
};

int run_extract(ExtractArgs& a) {
  require_path(a.out, "--out");
  Manifest manifest("extract", 0);
  manifest.config({{"mode", a.mode}, {"half_width", a.half_width}});
  a.data.load(manifest);
  const Representation repr = parse_representation(a.mode);
  CorpusIndex index(a.data.corpus);
  std::string out;
  double total = 0.0;
  for (const auto& m : a.data.mentions) {
    const DepSentence& s = a.data.corpus[*index.find(m.doc_id, m.sent_id)];
    const auto ids = representation_ids(s, m.token_id, repr, a.half_width);
    total += static_cast<double>(ids.size());
    out += extraction_record(s, m, repr, ids).dump() + "\n";
  }
  emit(manifest, a.out, fs::path(a.out).filename().string(), out);
  write_file(a.out + ".manifest.json", manifest.dump());
  const double mean = a.data.mentions.empty() ? 0.0 : total / static_cast<double>(a.data.mentions.size());
  std::cout << "mentions " << a.data.mentions.size() << "\nmean_length " << format_double(mean) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train / eval

struct TrainArgs {
  CorpusInputs data;
  TrainFlags flags;
  std::string out;
};

int run_train(TrainArgs& a) {
  require_path(a.out, "--out");
  const TrainConfig cfg = a.flags.resolve(a.flags.repr);
  Manifest manifest("train", cfg.seed);
  manifest.config(cfg.to_json());
  a.data.load(manifest);
  const auto table = load_embeddings(a.flags.embeddings, manifest, cfg.seed);
  const auto result = train(cfg, a.data.corpus, a.data.mentions, table);
  emit(manifest, a.out, fs::path(a.out).filename().string(), save_checkpoint(result.model, a.flags.embeddings));
  write_file(a.out + ".manifest.json", manifest.dump());
  if (!result.loss_history.empty())
    std::cout << "epochs " << result.loss_history.size() << " final_loss " << format_double(result.loss_history.back())
              << " train_accuracy " << format_double(result.accuracy_history.back()) << "\n";
  std::cout << "wrote " << a.out << "\n";
  return kExitOk;
}

TrainedModel load_model(const std::string& ckpt_path, const std::string& embeddings_flag, Manifest& manifest) {
  const std::string text = read_file(ckpt_path);
  manifest.input("checkpoint", ckpt_path, text);
  std::string emb = embeddings_flag;
  if (emb.empty()) emb = read_checkpoint_header(text).embeddings_source;
  if (emb.empty()) throw UsageError("--embeddings: checkpoint does not name its embeddings; pass the flag");
  // The checkpoint carries its own unk vector, so the table's is never used.
  return load_checkpoint(text, load_embeddings(emb, manifest, 0));
}

struct EvalArgs {
  CorpusInputs data;
  std::string model;
  std::string embeddings;
  std::string report;
};

int run_eval(EvalArgs& a) {
  require_path(a.model, "--model");
  Manifest manifest("eval", 0);
  const TrainedModel tm = load_model(a.model, a.embeddings, manifest);
  a.data.load(manifest);
  const Metrics m = evaluate(tm, a.data.corpus, a.data.mentions);
  std::cout << metrics_table({{representation_name(tm.representation), m}});
  if (!a.report.empty()) {
    emit(manifest, a.report, fs::path(a.report).filename().string(), to_json(m).dump(2) + "\n");
    write_file(a.report + ".manifest.json", manifest.dump());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- cv

struct CvArgs {
  CorpusInputs data;
  TrainFlags flags;
  std::vector<std::string> reprs;
  size_t folds = 10;
  size_t jobs = 1;
  bool test_split = false;
  bool save_models = true;
  std::string out;
};

int run_cv(CvArgs& a) {
  require_path(a.out, "--out");
  if (a.reprs.empty()) a.reprs = {a.flags.repr};
  std::vector<TrainConfig> configs;
  for (const auto& r : a.reprs) configs.push_back(a.flags.resolve(r));
  const TrainConfig& base = configs.front();

  Manifest manifest("cv", base.seed);
  json cfg_json = base.to_json();
  cfg_json.erase("representation");
  cfg_json["representations"] = a.reprs;
  cfg_json["folds"] = a.folds;
  cfg_json["test_split"] = a.test_split;
  manifest.config(cfg_json);
  a.data.load(manifest);
  const auto table = load_embeddings(a.flags.embeddings, manifest, base.seed);
  const auto examples = resolve_examples(a.data.corpus, a.data.mentions);

  std::vector<size_t> pool(examples.size());
  std::iota(pool.begin(), pool.end(), size_t{0});
  if (a.test_split) {
    pool = split_tuning_test(examples.size(), base.seed).second;
    std::sort(pool.begin(), pool.end());
  }

  const fs::path dir(a.out);
  json report;
  report["config"] = cfg_json;
  report["examples"] = pool.size();
  std::vector<std::pair<std::string, Metrics>> rows;
  json runs = json::array();
  for (size_t r = 0; r < configs.size(); ++r) {
    const auto cv = cross_validate(configs[r], examples, pool, a.folds, table, a.jobs);
    if (r == 0) {
      json sizes = json::array();
      for (const auto& f : cv.plan.folds) sizes.push_back(f.size());
      report["fold_sizes"] = sizes;
    }
    json run;
    run["representation"] = a.reprs[r];
    run["pooled"] = to_json(cv.pooled);
    json folds = json::array();
    for (size_t f = 0; f < cv.folds.size(); ++f) {
      const auto& fr = cv.folds[f];
      folds.push_back({{"fold", f + 1},
                       {"size", fr.test_indices.size()},
                       {"metrics", to_json(fr.metrics)},
                       {"final_loss", fr.loss_history.empty() ? 0.0 : fr.loss_history.back()}});
      if (a.save_models) {
        char name[64];
        std::snprintf(name, sizeof name, "fold_%02zu.ckpt", f + 1);
        const std::string rel = a.reprs[r] + "/" + name;
        emit(manifest, dir / rel, rel, save_checkpoint(*fr.model, a.flags.embeddings));
      }
    }
    run["folds"] = folds;
    runs.push_back(run);
    rows.emplace_back(a.reprs[r], cv.pooled);
  }
  report["runs"] = runs;
  if (rows.size() > 1) {
    json cmp = json::array();
    for (const auto& [name, m] : rows) cmp.push_back({{"representation", name}, {"micro_f1", m.micro.f1}});
    report["comparison"] = cmp;
  }
  const std::string table_text = metrics_table(rows);
  emit(manifest, dir / "report.json", "report.json", report.dump(2) + "\n");
  emit(manifest, dir / "report.txt", "report.txt", table_text);
  write_file(dir / "manifest.json", manifest.dump());
  std::cout << table_text;
  return kExitOk;
}

// ---------------------------------------------------------------- saliency

struct SaliencyArgs {
  CorpusInputs data;
  std::string model;
  std::string embeddings;
  std::string out;
  std::string format = "html";
  std::string label = "gold";
};

int run_saliency(SaliencyArgs& a) {
  require_path(a.model, "--model");
  require_path(a.out, "--out");
  Manifest manifest("saliency", 0);
  manifest.config({{"format", a.format}, {"label", a.label}});
  const TrainedModel tm = load_model(a.model, a.embeddings, manifest);
  a.data.load(manifest);
  CorpusIndex index(a.data.corpus);
  const fs::path dir(a.out);
  size_t written = 0;
  for (const auto& m : a.data.mentions) {
    const DepSentence& s = a.data.corpus[*index.find(m.doc_id, m.sent_id)];
    const auto in = tm.input_for(s, m.token_id);
    const auto ids = representation_ids(s, m.token_id, tm.representation, tm.half_width);
    const auto predicted = tm.model.classify(in).status;
    const TemporalStatus at = (a.label == "gold" && m.label) ? *m.label : predicted;
    SaliencyMap map = compute_saliency(tm.model, in, forms_of(s, ids), at);
    map.gold = m.label;
    const std::string stem = sanitize(m.doc_id) + "_" + sanitize(m.sent_id) + "_" + std::to_string(m.token_id);
    const std::string name = stem + "." + a.format;
    emit(manifest, dir / name, name, a.format == "csv" ? heatmap_csv(map) : heatmap_html(map));
    ++written;
  }
  write_file(dir / "manifest.json", manifest.dump());
  std::cout << "wrote " << written << " heatmaps to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string model = "lstm";
  std::uint64_t seed = 1;
  size_t dim = 6;
  size_t hidden = 8;
  int length = 9;
  double init_scale = 0.5;
};

int run_gradcheck(const GradcheckArgs& a) {
  if (a.length < 1) throw UsageError("--length: must be positive");
  nn::ModelConfig cfg;
  cfg.type = nn::parse_model_type(a.model);
  cfg.input_dim = a.dim;
  cfg.hidden = a.hidden;
  cfg.dropout = 0.0;
  cfg.init_scale = a.init_scale;
  nn::Model model(cfg, a.seed);

  std::mt19937_64 rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::ModelInput in;
  in.embeddings.assign(static_cast<size_t>(a.length), nn::Vec(a.dim));
  for (auto& row : in.embeddings)
    for (double& v : row) v = u(rng);
  if (cfg.type == nn::ModelType::kTreeLstm) {
    in.kind = Representation::kTree;
    in.children.resize(static_cast<size_t>(a.length));
    in.root = 0;
    for (int i = 1; i < a.length; ++i)
      in.children[static_cast<size_t>(std::uniform_int_distribution<int>(0, i - 1)(rng))].push_back(i);
    in.target = a.length - 1;
  }
  const int gold = static_cast<int>(rng() % 3);
  const auto params = nn::check_parameter_gradients(model, in, gold);
  const auto inputs = nn::check_input_gradients(model, in, gold);
  const double worst = std::max(params.max_rel_error, inputs.max_rel_error);
  char buf[256];
  std::snprintf(buf, sizeof buf, "model %s seed %llu params %.3e (%s) inputs %.3e\nmax_relative_error %.6e\n",
                a.model.c_str(), static_cast<unsigned long long>(a.seed), params.max_rel_error,
                params.worst_param.c_str(), inputs.max_rel_error, worst);
  std::cout << buf;
  return worst < 1e-4 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-chain event temporal status classification"};
  app.set_version_flag("--version", EVCHAIN_VERSION);
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic distractor corpus");
  gen_cmd->add_option("--out", gen.out, "output directory")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "number of sentences")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "random seed")->capture_default_str();
  gen_cmd->add_option("--weights", gen.weights, "label weights PA,OG,FU")->capture_default_str();
  gen_cmd->add_option("--distractor-len", gen.distractor_len, "filler tokens between cue and target")
      ->capture_default_str();
  gen_cmd->add_option("--dim", gen.dim, "dimension of the generated word vectors")->capture_default_str();

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "dump chain or window representations");
  extract.data.add_flags(extract_cmd);
  extract_cmd->add_option("--mode", extract.mode, "chain | window")
      ->check(CLI::IsMember({"chain", "window"}))
      ->capture_default_str();
  extract_cmd->add_option("--half-width", extract.half_width, "window half width")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  extract_cmd->add_option("--out", extract.out, "output JSON lines file");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a classifier and write a checkpoint");
  train_args.data.add_flags(train_cmd);
  train_args.flags.add_flags(train_cmd, true);
  train_cmd->add_option("--out", train_args.out, "checkpoint path");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval.data.add_flags(eval_cmd);
  eval_cmd->add_option("--model", eval.model, "checkpoint path");
  eval_cmd->add_option("--embeddings", eval.embeddings, "embeddings (default: the path stored in the checkpoint)");
  eval_cmd->add_option("--report", eval.report, "write metrics as JSON");

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation, optionally comparing representations");
  cv.data.add_flags(cv_cmd);
  cv.flags.add_flags(cv_cmd, false);
  cv_cmd->add_option("--repr", cv.reprs, "representation(s) to compare: chain | window | tree")
      ->check(CLI::IsMember({"chain", "window", "tree"}));
  cv_cmd->add_option("--folds", cv.folds, "number of folds")->check(CLI::Range(size_t{2}, size_t{1000}))->capture_default_str();
  cv_cmd->add_option("--jobs", cv.jobs, "folds trained in parallel")->check(CLI::PositiveNumber)->capture_default_str();
  cv_cmd->add_flag("--test-split", cv.test_split, "hold out a 20% tuning split and cross-validate the rest");
  cv_cmd->add_flag("!--no-checkpoints", cv.save_models, "skip writing fold checkpoints");
  cv_cmd->add_option("--out", cv.out, "output directory");

  SaliencyArgs sal;
  auto* sal_cmd = app.add_subcommand("saliency", "write per-mention saliency heatmaps");
  sal.data.add_flags(sal_cmd);
  sal_cmd->add_option("--model", sal.model, "checkpoint path");
  sal_cmd->add_option("--embeddings", sal.embeddings, "embeddings (default: the path stored in the checkpoint)");
  sal_cmd->add_option("--out", sal.out, "output directory");
  sal_cmd->add_option("--format", sal.format, "csv | html")->check(CLI::IsMember({"csv", "html"}))->capture_default_str();
  sal_cmd->add_option("--label", sal.label, "take the loss at the gold or the predicted label")
      ->check(CLI::IsMember({"gold", "predicted"}))
      ->capture_default_str();

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of a random model's gradients");
  gc_cmd->add_option("--model", gc.model, "lstm | cnn | treelstm")
      ->check(CLI::IsMember({"lstm", "cnn", "treelstm"}))
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "random seed")->capture_default_str();
  gc_cmd->add_option("--dim", gc.dim, "input dimension")->check(CLI::PositiveNumber)->capture_default_str();
  gc_cmd->add_option("--hidden", gc.hidden, "hidden units")->check(CLI::PositiveNumber)->capture_default_str();
  gc_cmd->add_option("--length", gc.length, "tokens in the random input")->capture_default_str();
  gc_cmd->add_option("--init-scale", gc.init_scale, "uniform init range")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*extract_cmd) return run_extract(extract);
    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_eval(eval);
    if (*cv_cmd) return run_cv(cv);
    if (*sal_cmd) return run_saliency(sal);
    if (*gc_cmd) return run_gradcheck(gc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
