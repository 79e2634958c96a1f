#pragma once

// Dense tensors, named parameter sets, softmax cross-entropy, inverted
// dropout, RMSProp and central-difference gradient checking. Everything is
// 64-bit floating point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evchain/error.hpp"

namespace evchain::nn {

using Rng = std::mt19937_64;
using Vec = std::vector<double>;
// One vector per position (token, tree node).
using Grid = std::vector<Vec>;

enum class Mode { kTrain, kEval };

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape, double fill = 0.0) : shape_(std::move(shape)) {
    for (size_t e : shape_)
      if (e == 0) throw Error("tensor extents must be positive");
    data_.assign(std::accumulate(shape_.begin(), shape_.end(), size_t{1}, std::multiplies<>()), fill);
  }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }
  // Product of all trailing extents.
  size_t cols() const { return shape_.empty() ? 0 : data_.size() / shape_.front(); }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(size_t r) { return std::span<double>(data_).subspan(r * cols(), cols()); }
  std::span<const double> row(size_t r) const { return std::span<const double>(data_).subspan(r * cols(), cols()); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Named parameters in declaration order, each paired with a gradient of the
// same shape.
class ParamSet {
 public:
  size_t add(std::string name, std::vector<size_t> shape) {
    if (find(name)) throw Error("duplicate parameter name '" + name + "'");
    Tensor t(std::move(shape));
    entries_.push_back(Param{std::move(name), t, t});
    return entries_.size() - 1;
  }

  size_t size() const { return entries_.size(); }
  Param& operator[](size_t i) { return entries_[i]; }
  const Param& operator[](size_t i) const { return entries_[i]; }
  Tensor& value(size_t i) { return entries_[i].value; }
  const Tensor& value(size_t i) const { return entries_[i].value; }
  Tensor& grad(size_t i) { return entries_[i].grad; }

  const Param* find(std::string_view name) const {
    for (const auto& p : entries_)
      if (p.name == name) return &p;
    return nullptr;
  }
  Param& at(std::string_view name) {
    for (auto& p : entries_)
      if (p.name == name) return p;
    throw Error("no parameter named '" + std::string(name) + "'");
  }
  const Param& at(std::string_view name) const {
    if (const Param* p = find(name)) return *p;
    throw Error("no parameter named '" + std::string(name) + "'");
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  size_t num_values() const {
    size_t n = 0;
    for (const auto& p : entries_) n += p.value.size();
    return n;
  }
  void zero_grad() {
    for (auto& p : entries_) p.grad.fill(0.0);
  }
  void scale_grad(double s) {
    for (auto& p : entries_)
      for (double& g : p.grad.values()) g *= s;
  }
  void init_uniform(double scale, Rng& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& p : entries_)
      for (double& v : p.value.values()) v = u(rng);
  }

 private:
  std::vector<Param> entries_;
};

// y[c] += sum_r x[r] * W[r, c] for a rows x cols matrix W.
inline void affine_acc(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const size_t cols = w.cols();
  const double* wp = w.values().data();
  for (size_t r = 0; r < x.size(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* wr = wp + r * cols;
    for (size_t c = 0; c < cols; ++c) y[c] += xr * wr[c];
  }
}

// dW[r, c] += x[r] * dy[c]
inline void outer_acc(Tensor& dw, std::span<const double> x, std::span<const double> dy) {
  const size_t cols = dw.cols();
  double* gp = dw.values().data();
  for (size_t r = 0; r < x.size(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    double* gr = gp + r * cols;
    for (size_t c = 0; c < cols; ++c) gr[c] += xr * dy[c];
  }
}

// dx[r] += sum_c W[r, c] * dy[c]
inline void back_acc(const Tensor& w, std::span<const double> dy, std::span<double> dx) {
  const size_t cols = w.cols();
  const double* wp = w.values().data();
  for (size_t r = 0; r < dx.size(); ++r) {
    const double* wr = wp + r * cols;
    double s = 0.0;
    for (size_t c = 0; c < cols; ++c) s += wr[c] * dy[c];
    dx[r] += s;
  }
}

inline void add_to(std::span<double> y, std::span<const double> x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(std::span<const double> logits) {
  for (double v : logits)
    if (!std::isfinite(v)) throw Error("softmax: non-finite logit");
  const double mx = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (double& v : p) v /= z;
  return p;
}

struct SoftmaxXent {
  double loss = 0.0;
  Vec prob;
  Vec dlogits;
};

inline SoftmaxXent softmax_xent(std::span<const double> logits, int gold) {
  if (gold < 0 || static_cast<size_t>(gold) >= logits.size()) throw Error("softmax_xent: gold index out of range");
  for (double v : logits)
    if (!std::isfinite(v)) throw Error("softmax_xent: non-finite logit");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double log_z = std::log(z) + mx;
  SoftmaxXent out;
  out.prob.resize(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out.prob[i] = std::exp(logits[i] - log_z);
  out.loss = log_z - logits[static_cast<size_t>(gold)];
  out.dlogits = out.prob;
  out.dlogits[static_cast<size_t>(gold)] -= 1.0;
  return out;
}

struct Dropout {
  Vec y;
  // Per-coordinate multiplier applied in the forward pass: 0 or 1/(1-ratio).
  Vec mask;

  Vec backward(std::span<const double> dy) const {
    Vec dx(dy.size());
    for (size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
    return dx;
  }
};

// Inverted dropout; eval mode (or ratio 0) is the identity.
inline Dropout dropout(std::span<const double> x, double ratio, Mode mode, Rng* rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw Error("dropout ratio must lie in [0, 1)");
  Dropout out;
  out.y.assign(x.begin(), x.end());
  out.mask.assign(x.size(), 1.0);
  if (mode == Mode::kEval || ratio == 0.0) return out;
  if (!rng) throw Error("dropout in train mode needs a random generator");
  const double keep_scale = 1.0 / (1.0 - ratio);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (size_t i = 0; i < x.size(); ++i) {
    out.mask[i] = u(*rng) < ratio ? 0.0 : keep_scale;
    out.y[i] = x[i] * out.mask[i];
  }
  return out;
}

struct RmsPropConfig {
  double learning_rate = 0.001;
  double decay = 0.9;
  double epsilon = 1e-8;
};

class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig cfg = {}) : cfg_(cfg) {
    if (!(cfg_.decay > 0.0 && cfg_.decay < 1.0)) throw Error("rmsprop decay must lie in (0, 1)");
  }

  const RmsPropConfig& config() const { return cfg_; }
  const std::vector<Tensor>& accumulators() const { return acc_; }

  // acc <- rho*acc + (1-rho)*g^2; theta <- theta - lr*g/(sqrt(acc)+eps).
  // Gradients are zeroed afterwards.
  void step(ParamSet& params) {
    if (acc_.empty()) {
      for (const auto& p : params) acc_.emplace_back(p.value.shape());
    }
    if (acc_.size() != params.size()) throw Error("rmsprop: parameter count changed");
    for (size_t i = 0; i < params.size(); ++i) {
      Param& p = params[i];
      Tensor& acc = acc_[i];
      if (!acc.same_shape(p.value) || !p.grad.same_shape(p.value))
        throw Error("rmsprop: shape mismatch for parameter '" + p.name + "'");
      auto theta = p.value.values();
      auto g = p.grad.values();
      auto a = acc.values();
      for (size_t k = 0; k < theta.size(); ++k) {
        a[k] = cfg_.decay * a[k] + (1.0 - cfg_.decay) * g[k] * g[k];
        theta[k] -= cfg_.learning_rate * g[k] / (std::sqrt(a[k]) + cfg_.epsilon);
      }
      p.grad.fill(0.0);
    }
  }

 private:
  RmsPropConfig cfg_;
  std::vector<Tensor> acc_;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

struct GradCheckOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample per parameter.
  size_t coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  size_t checked = 0;
};

// `loss()` evaluates the deterministic objective at the current parameter
// values; `backward()` accumulates its analytic gradient into the (zeroed)
// gradient tensors of `params`.
template <class LossFn, class BackwardFn>
GradCheckResult grad_check(ParamSet& params, LossFn&& loss, BackwardFn&& backward, const GradCheckOptions& opts = {}) {
  params.zero_grad();
  backward();
  Rng rng(opts.seed);
  GradCheckResult res;
  for (auto& p : params) {
    std::vector<size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), size_t{0});
    if (opts.coords_per_param && opts.coords_per_param < coords.size()) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.coords_per_param);
    }
    for (size_t k : coords) {
      const double saved = p.value[k];
      p.value[k] = saved + opts.eps;
      const double up = loss();
      p.value[k] = saved - opts.eps;
      const double down = loss();
      p.value[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw Error("grad_check: non-finite loss at " + p.name + "[" + std::to_string(k) + "]");
      const double numeric = (up - down) / (2.0 * opts.eps);
      const double err = relative_error(p.grad[k], numeric);
      ++res.checked;
      if (res.worst_param.empty() || err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_param = p.name;
        res.worst_index = k;
      }
    }
  }
  return res;
}

}  // namespace evchain::nn
