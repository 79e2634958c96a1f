#pragma once

// Sequence LSTM, max-over-time CNN and child-sum tree-LSTM event status
// classifiers with hand-written backward passes.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evchain/chain.hpp"
#include "evchain/corpus.hpp"
#include "evchain/embeddings.hpp"
#include "evchain/error.hpp"
#include "evchain/nncore.hpp"

namespace evchain::nn {

inline constexpr size_t kClasses = 3;

enum class ModelType { kLstm, kCnn, kTreeLstm };
enum class Activation { kRelu, kTanh };
enum class TreeReadout { kRoot, kTarget };

inline const char* model_type_name(ModelType t) {
  switch (t) {
    case ModelType::kLstm: return "lstm";
    case ModelType::kCnn: return "cnn";
    case ModelType::kTreeLstm: return "treelstm";
  }
  return "?";
}

inline ModelType parse_model_type(std::string_view name) {
  if (name == "lstm") return ModelType::kLstm;
  if (name == "cnn") return ModelType::kCnn;
  if (name == "treelstm") return ModelType::kTreeLstm;
  throw Error("unknown model type '" + std::string(name) + "'");
}

struct ModelConfig {
  ModelType type = ModelType::kLstm;
  size_t input_dim = 300;
  // Hidden units (LSTM, tree-LSTM) or filter count (CNN).
  size_t hidden = 300;
  size_t filter_width = 5;
  double dropout = 0.5;
  Activation activation = Activation::kRelu;
  TreeReadout readout = TreeReadout::kRoot;
  double init_scale = 0.05;
};

// Token vectors for one mention plus, for the tree family, the dependency
// structure over them (0-based node indices).
struct ModelInput {
  Representation kind = Representation::kChain;
  Grid embeddings;
  std::vector<std::vector<int>> children;
  int root = -1;
  int target = -1;
};

inline ModelInput make_input(const DepSentence& sent, int target_id, Representation repr,
                             const EmbeddingTable& table, int half_width = 7) {
  ModelInput in;
  in.kind = repr;
  const auto ids = representation_ids(sent, target_id, repr, half_width);
  for (int id : ids) in.embeddings.push_back(table.lookup(sent.token(id).form));
  if (repr == Representation::kTree) {
    in.children.resize(ids.size());
    for (const auto& t : sent.tokens) {
      if (t.head == 0) {
        in.root = t.id - 1;
      } else {
        in.children[static_cast<size_t>(t.head - 1)].push_back(t.id - 1);
      }
    }
    in.target = target_id - 1;
  } else {
    for (size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == target_id) in.target = static_cast<int>(i);
  }
  return in;
}

struct Pass {
  double loss = 0.0;
  Vec logits;
};

namespace detail {

inline void check_input(const ModelInput& in, size_t dim) {
  if (in.embeddings.empty()) throw Error("model input is empty");
  for (const auto& e : in.embeddings)
    if (e.size() != dim)
      throw Error("model input has embedding width " + std::to_string(e.size()) + ", model expects " +
                  std::to_string(dim));
}

// Shared softmax output layer: logits = b + W^T z with W of shape H x 3.
struct OutputLayer {
  size_t w = 0;
  size_t b = 0;

  void declare(ParamSet& ps, size_t hidden) {
    w = ps.add("W_out", {hidden, kClasses});
    b = ps.add("b_out", {kClasses});
  }
  Vec forward(const ParamSet& ps, std::span<const double> z) const {
    Vec logits(ps.value(b).values().begin(), ps.value(b).values().end());
    affine_acc(ps.value(w), z, logits);
    return logits;
  }
  // Returns dL/dz and accumulates parameter gradients when `grads` is set.
  Vec backward(const ParamSet& ps, std::span<const double> z, std::span<const double> dlogits,
               ParamSet* grads) const {
    if (grads) {
      outer_acc(grads->grad(w), z, dlogits);
      add_to(grads->grad(b).values(), dlogits);
    }
    Vec dz(z.size(), 0.0);
    back_acc(ps.value(w), dlogits, dz);
    return dz;
  }
};

}  // namespace detail

// One LSTM layer read left to right; the final hidden state feeds the output
// layer.
class LstmClassifier {
 public:
  enum Gate { kI = 0, kF = 1, kO = 2, kG = 3 };

  LstmClassifier(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    const size_t d = cfg.input_dim, h = cfg.hidden;
    static constexpr const char* names[4] = {"i", "f", "o", "g"};
    for (int k = 0; k < 4; ++k) w_[k] = params_.add(std::string("W_") + names[k], {d, h});
    for (int k = 0; k < 4; ++k) u_[k] = params_.add(std::string("U_") + names[k], {h, h});
    for (int k = 0; k < 4; ++k) b_[k] = params_.add(std::string("b_") + names[k], {h});
    out_.declare(params_, h);
    Rng rng(seed);
    params_.init_uniform(cfg.init_scale, rng);
    params_.value(b_[kF]).fill(1.0);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // gold < 0 skips the loss. Gradients go to `grads` (parameters) and `dx`
  // (inputs) when given.
  // Hidden state after each step.
  Grid hidden_states(const ModelInput& in) const {
    const Trace tr = forward(in);
    Grid out(tr.steps);
    for (size_t t = 0; t < tr.steps; ++t)
      out[t].assign(tr.hid.begin() + static_cast<long>(t * cfg_.hidden),
                    tr.hid.begin() + static_cast<long>((t + 1) * cfg_.hidden));
    return out;
  }

  Pass run(const ModelInput& in, int gold, Mode mode, Rng* rng, ParamSet* grads, Grid* dx) const {
    const Trace tr = forward(in);
    const size_t steps = tr.steps, h = cfg_.hidden;
    const auto& gate = tr.gate;
    const Vec& cell = tr.cell;
    const Vec& hid = tr.hid;
    const Vec zeros(h, 0.0);
    auto cslice = [h](const Vec& v, size_t t) { return std::span<const double>(v).subspan(t * h, h); };

    auto last = cslice(hid, steps - 1);
    const Dropout drop = dropout(last, cfg_.dropout, mode, rng);
    Pass pass;
    pass.logits = out_.forward(params_, drop.y);
    if (gold < 0) return pass;
    const SoftmaxXent xent = softmax_xent(pass.logits, gold);
    pass.loss = xent.loss;
    if (!grads && !dx) return pass;

    Vec dh = drop.backward(out_.backward(params_, drop.y, xent.dlogits, grads));
    Vec dc(h, 0.0);
    std::array<Vec, 4> da;
    for (auto& v : da) v.assign(h, 0.0);
    if (dx) dx->assign(steps, Vec(cfg_.input_dim, 0.0));
    for (size_t t = steps; t-- > 0;) {
      std::span<const double> h_prev = t ? cslice(hid, t - 1) : std::span<const double>(zeros);
      std::span<const double> c_prev = t ? cslice(cell, t - 1) : std::span<const double>(zeros);
      for (size_t j = 0; j < h; ++j) {
        const size_t q = t * h + j;
        const double i = gate[kI][q], f = gate[kF][q], o = gate[kO][q], g = gate[kG][q];
        const double tc = std::tanh(cell[q]);
        const double d_o = dh[j] * tc;
        const double dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
        da[kI][j] = dct * g * i * (1.0 - i);
        da[kF][j] = dct * c_prev[j] * f * (1.0 - f);
        da[kO][j] = d_o * o * (1.0 - o);
        da[kG][j] = dct * i * (1.0 - g * g);
        dc[j] = dct * f;
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      for (int k = 0; k < 4; ++k) {
        if (grads) {
          outer_acc(grads->grad(w_[k]), in.embeddings[t], da[k]);
          outer_acc(grads->grad(u_[k]), h_prev, da[k]);
          add_to(grads->grad(b_[k]).values(), da[k]);
        }
        if (dx) back_acc(params_.value(w_[k]), da[k], (*dx)[t]);
        if (t) back_acc(params_.value(u_[k]), da[k], dh);
      }
    }
    return pass;
  }

 private:
  // Activated gates, cells and hidden states, each steps x hidden row-major.
  struct Trace {
    size_t steps = 0;
    std::array<Vec, 4> gate;
    Vec cell, hid;
  };

  Trace forward(const ModelInput& in) const {
    detail::check_input(in, cfg_.input_dim);
    const size_t steps = in.embeddings.size(), h = cfg_.hidden;
    Trace tr;
    tr.steps = steps;
    for (auto& g : tr.gate) g.assign(steps * h, 0.0);
    tr.cell.assign(steps * h, 0.0);
    tr.hid.assign(steps * h, 0.0);
    const Vec zeros(h, 0.0);
    auto slice = [h](Vec& v, size_t t) { return std::span<double>(v).subspan(t * h, h); };
    for (size_t t = 0; t < steps; ++t) {
      std::span<const double> x = in.embeddings[t];
      std::span<const double> h_prev = t ? std::span<const double>(slice(tr.hid, t - 1)) : std::span<const double>(zeros);
      std::span<const double> c_prev =
          t ? std::span<const double>(slice(tr.cell, t - 1)) : std::span<const double>(zeros);
      for (int k = 0; k < 4; ++k) {
        auto a = slice(tr.gate[k], t);
        auto bias = params_.value(b_[k]).values();
        std::copy(bias.begin(), bias.end(), a.begin());
        affine_acc(params_.value(w_[k]), x, a);
        affine_acc(params_.value(u_[k]), h_prev, a);
        for (double& v : a) v = k == kG ? std::tanh(v) : sigmoid(v);
      }
      auto c = slice(tr.cell, t);
      auto hh = slice(tr.hid, t);
      for (size_t j = 0; j < h; ++j) {
        const size_t q = t * h + j;
        c[j] = tr.gate[kF][q] * c_prev[j] + tr.gate[kI][q] * tr.gate[kG][q];
        hh[j] = tr.gate[kO][q] * std::tanh(c[j]);
      }
    }
    return tr;
  }

  ModelConfig cfg_;
  ParamSet params_;
  std::array<size_t, 4> w_{}, u_{}, b_{};
  detail::OutputLayer out_;
};

// Width-w convolution over the token sequence, max-over-time pooling, then
// the output layer. Inputs shorter than w are right-padded with zero vectors.
class CnnClassifier {
 public:
  CnnClassifier(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.filter_width == 0) throw Error("cnn filter width must be positive");
    k_ = params_.add("K", {cfg.hidden, cfg.filter_width, cfg.input_dim});
    b_ = params_.add("b_conv", {cfg.hidden});
    out_.declare(params_, cfg.hidden);
    Rng rng(seed);
    params_.init_uniform(cfg.init_scale, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  Pass run(const ModelInput& in, int gold, Mode mode, Rng* rng, ParamSet* grads, Grid* dx) const {
    detail::check_input(in, cfg_.input_dim);
    const size_t steps = in.embeddings.size(), d = cfg_.input_dim, width = cfg_.filter_width;
    const size_t filters = cfg_.hidden;
    const size_t positions = std::max(steps, width) - width + 1;
    const Tensor& kernel = params_.value(k_);
    const Tensor& bias = params_.value(b_);

    auto window = [&](size_t p) {
      Vec w(width * d, 0.0);
      for (size_t k = 0; k < width && p + k < steps; ++k)
        std::copy(in.embeddings[p + k].begin(), in.embeddings[p + k].end(), w.begin() + static_cast<long>(k * d));
      return w;
    };

    Vec pooled(filters, 0.0), pre_at_max(filters, 0.0);
    std::vector<size_t> arg(filters, 0);
    for (size_t p = 0; p < positions; ++p) {
      const Vec w = window(p);
      for (size_t f = 0; f < filters; ++f) {
        auto kr = kernel.row(f);
        double s = bias[f];
        for (size_t q = 0; q < w.size(); ++q) s += kr[q] * w[q];
        const double act = activate(s);
        if (p == 0 || act > pooled[f]) {
          pooled[f] = act;
          pre_at_max[f] = s;
          arg[f] = p;
        }
      }
    }

    const Dropout drop = dropout(pooled, cfg_.dropout, mode, rng);
    Pass pass;
    pass.logits = out_.forward(params_, drop.y);
    if (gold < 0) return pass;
    const SoftmaxXent xent = softmax_xent(pass.logits, gold);
    pass.loss = xent.loss;
    if (!grads && !dx) return pass;

    const Vec dpooled = drop.backward(out_.backward(params_, drop.y, xent.dlogits, grads));
    if (dx) dx->assign(steps, Vec(d, 0.0));
    for (size_t f = 0; f < filters; ++f) {
      const double dpre = dpooled[f] * activation_grad(pre_at_max[f]);
      if (dpre == 0.0) continue;
      const size_t p = arg[f];
      if (grads) {
        const Vec w = window(p);
        auto gk = grads->grad(k_).row(f);
        for (size_t q = 0; q < w.size(); ++q) gk[q] += dpre * w[q];
        grads->grad(b_)[f] += dpre;
      }
      if (dx) {
        auto kr = kernel.row(f);
        for (size_t k = 0; k < width && p + k < steps; ++k)
          for (size_t j = 0; j < d; ++j) (*dx)[p + k][j] += dpre * kr[k * d + j];
      }
    }
    return pass;
  }

 private:
  double activate(double x) const { return cfg_.activation == Activation::kRelu ? std::max(0.0, x) : std::tanh(x); }
  double activation_grad(double pre) const {
    if (cfg_.activation == Activation::kRelu) return pre > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(pre);
    return 1.0 - t * t;
  }

  ModelConfig cfg_;
  ParamSet params_;
  size_t k_ = 0, b_ = 0;
  detail::OutputLayer out_;
};

// Child-sum tree-LSTM composed bottom-up over the dependency tree. Input,
// output and candidate gates read the sum of the children's hidden states;
// each child gets its own forget gate.
class TreeLstmClassifier {
 public:
  enum Gate { kI = 0, kO = 1, kU = 2, kF = 3 };

  TreeLstmClassifier(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    const size_t d = cfg.input_dim, h = cfg.hidden;
    static constexpr const char* names[4] = {"i", "o", "u", "f"};
    for (int k = 0; k < 4; ++k) w_[k] = params_.add(std::string("W_") + names[k], {d, h});
    for (int k = 0; k < 4; ++k) u_[k] = params_.add(std::string("U_") + names[k], {h, h});
    for (int k = 0; k < 4; ++k) b_[k] = params_.add(std::string("b_") + names[k], {h});
    out_.declare(params_, h);
    Rng rng(seed);
    params_.init_uniform(cfg.init_scale, rng);
    params_.value(b_[kF]).fill(1.0);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  Pass run(const ModelInput& in, int gold, Mode mode, Rng* rng, ParamSet* grads, Grid* dx) const {
    detail::check_input(in, cfg_.input_dim);
    const size_t n = in.embeddings.size(), h = cfg_.hidden;
    const std::vector<int> order = post_order(in);
    const int readout = cfg_.readout == TreeReadout::kRoot ? in.root : in.target;
    if (readout < 0 || static_cast<size_t>(readout) >= n) throw Error("tree-LSTM readout node out of range");

    struct Node {
      Vec i, o, u, c, hid, child_sum;
      std::vector<Vec> f;  // one forget gate per child, aligned with children
    };
    std::vector<Node> node(n);
    for (int id : order) {
      Node& nd = node[static_cast<size_t>(id)];
      const auto& kids = in.children[static_cast<size_t>(id)];
      std::span<const double> x = in.embeddings[static_cast<size_t>(id)];
      nd.child_sum.assign(h, 0.0);
      for (int k : kids) add_to(nd.child_sum, node[static_cast<size_t>(k)].hid);
      auto gate = [&](int g, std::span<const double> hin) {
        auto bias = params_.value(b_[g]).values();
        Vec a(bias.begin(), bias.end());
        affine_acc(params_.value(w_[g]), x, a);
        affine_acc(params_.value(u_[g]), hin, a);
        return a;
      };
      nd.i = gate(kI, nd.child_sum);
      nd.o = gate(kO, nd.child_sum);
      nd.u = gate(kU, nd.child_sum);
      for (size_t j = 0; j < h; ++j) {
        nd.i[j] = sigmoid(nd.i[j]);
        nd.o[j] = sigmoid(nd.o[j]);
        nd.u[j] = std::tanh(nd.u[j]);
      }
      nd.c.resize(h);
      for (size_t j = 0; j < h; ++j) nd.c[j] = nd.i[j] * nd.u[j];
      for (int k : kids) {
        Vec f = gate(kF, node[static_cast<size_t>(k)].hid);
        for (size_t j = 0; j < h; ++j) {
          f[j] = sigmoid(f[j]);
          nd.c[j] += f[j] * node[static_cast<size_t>(k)].c[j];
        }
        nd.f.push_back(std::move(f));
      }
      nd.hid.resize(h);
      for (size_t j = 0; j < h; ++j) nd.hid[j] = nd.o[j] * std::tanh(nd.c[j]);
    }

    const Dropout drop = dropout(node[static_cast<size_t>(readout)].hid, cfg_.dropout, mode, rng);
    Pass pass;
    pass.logits = out_.forward(params_, drop.y);
    if (gold < 0) return pass;
    const SoftmaxXent xent = softmax_xent(pass.logits, gold);
    pass.loss = xent.loss;
    if (!grads && !dx) return pass;

    Grid dh(n, Vec(h, 0.0)), dc(n, Vec(h, 0.0));
    dh[static_cast<size_t>(readout)] = drop.backward(out_.backward(params_, drop.y, xent.dlogits, grads));
    if (dx) dx->assign(n, Vec(cfg_.input_dim, 0.0));
    Vec da_i(h), da_o(h), da_u(h), da_f(h), dsum(h);
    auto accumulate = [&](int g, std::span<const double> x, std::span<const double> hin, const Vec& da, size_t id,
                          std::span<double> dhin) {
      if (grads) {
        outer_acc(grads->grad(w_[g]), x, da);
        outer_acc(grads->grad(u_[g]), hin, da);
        add_to(grads->grad(b_[g]).values(), da);
      }
      if (dx) back_acc(params_.value(w_[g]), da, (*dx)[id]);
      back_acc(params_.value(u_[g]), da, dhin);
    };
    for (size_t pos = order.size(); pos-- > 0;) {
      const size_t id = static_cast<size_t>(order[pos]);
      const Node& nd = node[id];
      const auto& kids = in.children[id];
      std::span<const double> x = in.embeddings[id];
      Vec dct(h);
      for (size_t j = 0; j < h; ++j) {
        const double tc = std::tanh(nd.c[j]);
        da_o[j] = dh[id][j] * tc * nd.o[j] * (1.0 - nd.o[j]);
        dct[j] = dc[id][j] + dh[id][j] * nd.o[j] * (1.0 - tc * tc);
        da_i[j] = dct[j] * nd.u[j] * nd.i[j] * (1.0 - nd.i[j]);
        da_u[j] = dct[j] * nd.i[j] * (1.0 - nd.u[j] * nd.u[j]);
      }
      for (size_t m = 0; m < kids.size(); ++m) {
        const size_t k = static_cast<size_t>(kids[m]);
        const Vec& f = nd.f[m];
        for (size_t j = 0; j < h; ++j) {
          da_f[j] = dct[j] * node[k].c[j] * f[j] * (1.0 - f[j]);
          dc[k][j] += dct[j] * f[j];
        }
        accumulate(kF, x, node[k].hid, da_f, id, dh[k]);
      }
      std::fill(dsum.begin(), dsum.end(), 0.0);
      accumulate(kI, x, nd.child_sum, da_i, id, dsum);
      accumulate(kO, x, nd.child_sum, da_o, id, dsum);
      accumulate(kU, x, nd.child_sum, da_u, id, dsum);
      for (int k : kids) add_to(dh[static_cast<size_t>(k)], dsum);
    }
    return pass;
  }

 private:
  // Children before parents; rejects inputs whose lists do not form one tree
  // rooted at `in.root` covering every node exactly once.
  static std::vector<int> post_order(const ModelInput& in) {
    const size_t n = in.embeddings.size();
    if (in.children.size() != n || in.root < 0 || static_cast<size_t>(in.root) >= n)
      throw Error("malformed tree input");
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    std::vector<std::pair<int, size_t>> stack{{in.root, 0}};
    seen[static_cast<size_t>(in.root)] = 1;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& kids = in.children[static_cast<size_t>(id)];
      if (next < kids.size()) {
        const int k = kids[next++];
        if (k < 0 || static_cast<size_t>(k) >= n || seen[static_cast<size_t>(k)])
          throw Error("malformed tree input");
        seen[static_cast<size_t>(k)] = 1;
        stack.emplace_back(k, 0);
      } else {
        order.push_back(id);
        stack.pop_back();
      }
    }
    if (order.size() != n) throw Error("malformed tree input: unreachable nodes");
    return order;
  }

  ModelConfig cfg_;
  ParamSet params_;
  std::array<size_t, 4> w_{}, u_{}, b_{};
  detail::OutputLayer out_;
};

struct Prediction {
  TemporalStatus status = TemporalStatus::kPast;
  Vec prob;
};

// Argmax with ties resolved toward the lower class index.
inline Prediction classify_logits(std::span<const double> logits) {
  Prediction p;
  p.prob = softmax(logits);
  size_t best = 0;
  for (size_t c = 1; c < logits.size(); ++c)
    if (logits[c] > logits[best]) best = c;
  p.status = status_from_index(static_cast<int>(best));
  return p;
}

// Value-semantic handle over the three classifier families.
class Model {
 public:
  using Impl = std::variant<LstmClassifier, CnnClassifier, TreeLstmClassifier>;

  Model(const ModelConfig& cfg, std::uint64_t seed) : impl_(make(cfg, seed)) {}

  const ModelConfig& config() const {
    return std::visit([](const auto& m) -> const ModelConfig& { return m.config(); }, impl_);
  }
  ModelType type() const { return config().type; }
  ParamSet& params() {
    return std::visit([](auto& m) -> ParamSet& { return m.params(); }, impl_);
  }
  const ParamSet& params() const {
    return std::visit([](const auto& m) -> const ParamSet& { return m.params(); }, impl_);
  }

  bool accepts(Representation r) const {
    return (type() == ModelType::kTreeLstm) == (r == Representation::kTree);
  }
  void require_compatible(const ModelInput& in) const {
    if (!accepts(in.kind))
      throw Error(std::string("model '") + model_type_name(type()) + "' cannot consume a '" +
                  representation_name(in.kind) + "' representation");
  }

  Vec logits(const ModelInput& in) const { return run(in, -1, Mode::kEval, nullptr, nullptr, nullptr).logits; }
  double loss(const ModelInput& in, int gold) const {
    return run(in, gold, Mode::kEval, nullptr, nullptr, nullptr).loss;
  }
  Prediction classify(const ModelInput& in) const { return classify_logits(logits(in)); }

  // Accumulates parameter gradients into params(); returns the loss and the
  // logits of this (possibly dropped-out) pass.
  Pass train_step(const ModelInput& in, int gold, Mode mode, Rng* rng, Grid* dx = nullptr) {
    return run(in, gold, mode, rng, &params(), dx);
  }
  // Eval-mode loss gradient with respect to the input vectors only.
  Pass input_gradient(const ModelInput& in, int gold, Grid& dx) const {
    return run(in, gold, Mode::kEval, nullptr, nullptr, &dx);
  }

  Pass run(const ModelInput& in, int gold, Mode mode, Rng* rng, ParamSet* grads, Grid* dx) const {
    require_compatible(in);
    return std::visit([&](const auto& m) { return m.run(in, gold, mode, rng, grads, dx); }, impl_);
  }

 private:
  static Impl make(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.input_dim == 0 || cfg.hidden == 0) throw Error("model dimensions must be positive");
    switch (cfg.type) {
      case ModelType::kLstm: return LstmClassifier(cfg, seed);
      case ModelType::kCnn: return CnnClassifier(cfg, seed);
      case ModelType::kTreeLstm: return TreeLstmClassifier(cfg, seed);
    }
    throw Error("unknown model type");
  }

  Impl impl_;
};

// Central-difference check of all parameter gradients of `model` on one
// labeled input (eval mode, so dropout is off).
inline GradCheckResult check_parameter_gradients(Model& model, const ModelInput& in, int gold,
                                                 const GradCheckOptions& opts = {}) {
  return grad_check(
      model.params(), [&] { return model.loss(in, gold); },
      [&] { model.run(in, gold, Mode::kEval, nullptr, &model.params(), nullptr); }, opts);
}

// Same check for the loss gradient with respect to every input coordinate.
inline GradCheckResult check_input_gradients(const Model& model, ModelInput in, int gold, double eps = 1e-5) {
  Grid dx;
  model.input_gradient(in, gold, dx);
  GradCheckResult res;
  for (size_t t = 0; t < in.embeddings.size(); ++t)
    for (size_t d = 0; d < in.embeddings[t].size(); ++d) {
      const double saved = in.embeddings[t][d];
      in.embeddings[t][d] = saved + eps;
      const double up = model.loss(in, gold);
      in.embeddings[t][d] = saved - eps;
      const double down = model.loss(in, gold);
      in.embeddings[t][d] = saved;
      const double err = relative_error(dx[t][d], (up - down) / (2.0 * eps));
      ++res.checked;
      if (res.worst_param.empty() || err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_param = "input[" + std::to_string(t) + "]";
        res.worst_index = d;
      }
    }
  return res;
}

}  // namespace evchain::nn
