// Copyright 2026 The dgad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// SEMLP: a two-layer perceptron (in -> hidden -> 1, leaky ReLU) that classifies
// single patch embeddings, trained from scratch with mini-batch gradient descent.

#ifndef DGAD_SEMLP_HPP_
#define DGAD_SEMLP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dgad/common.hpp"
#include "dgad/embedding.hpp"
#include "dgad/eval.hpp"
#include "dgad/random.hpp"
#include "dgad/scoring.hpp"

namespace dgad::semlp {

inline constexpr std::uint32_t kDefaultHidden = 32;
inline constexpr double kDefaultLeakyAlpha = 0.01;

template <typename Real>
struct BasicMlp {
  std::uint32_t in_dim = 0;
  std::uint32_t hidden = 0;
  Real alpha = static_cast<Real>(kDefaultLeakyAlpha);
  std::vector<Real> w1;  // [hidden][in_dim]
  std::vector<Real> b1;  // [hidden]
  std::vector<Real> w2;  // [hidden]
  std::vector<Real> b2;  // [1]

  static std::size_t parameter_count(std::size_t in_dim, std::size_t hidden) { return (in_dim + 1) * hidden + (hidden + 1); }
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // Zeroed network of the given shape (also serves as a gradient buffer).
  static BasicMlp zeros(std::uint32_t in_dim, std::uint32_t hidden, Real alpha = static_cast<Real>(kDefaultLeakyAlpha)) {
    BasicMlp m;
    m.in_dim = in_dim;
    m.hidden = hidden;
    m.alpha = alpha;
    m.w1.assign(static_cast<std::size_t>(hidden) * in_dim, Real(0));
    m.b1.assign(hidden, Real(0));
    m.w2.assign(hidden, Real(0));
    m.b2.assign(1, Real(0));
    return m;
  }

  // All parameters in file order: W1, b1, W2, b2.
  template <typename Fn>
  void for_each_param(Fn&& fn) {
    for (auto* v : {&w1, &b1, &w2, &b2})
      for (auto& p : *v) fn(p);
  }
  template <typename Fn>
  void for_each_param(Fn&& fn) const {
    for (const auto* v : {&w1, &b1, &w2, &b2})
      for (const auto& p : *v) fn(p);
  }

  Real leaky(Real z) const { return z >= Real(0) ? z : alpha * z; }

  template <typename In>
  Real logit(std::span<const In> x) const {
    if (x.size() != in_dim) throw DimensionError("MLP input has length " + std::to_string(x.size()) + ", expected " + std::to_string(in_dim));
    Real out = b2[0];
    for (std::uint32_t h = 0; h < hidden; ++h) {
      const Real* row = w1.data() + static_cast<std::size_t>(h) * in_dim;
      Real pre = b1[h];
      for (std::uint32_t i = 0; i < in_dim; ++i) pre += row[i] * static_cast<Real>(x[i]);
      out += w2[h] * leaky(pre);
    }
    return out;
  }

  template <typename Other>
  BasicMlp<Other> cast() const {
    BasicMlp<Other> m;
    m.in_dim = in_dim;
    m.hidden = hidden;
    m.alpha = static_cast<Other>(alpha);
    auto conv = [](const std::vector<Real>& v) { return std::vector<Other>(v.begin(), v.end()); };
    m.w1 = conv(w1);
    m.b1 = conv(b1);
    m.w2 = conv(w2);
    m.b2 = conv(b2);
    return m;
  }

  bool operator==(const BasicMlp&) const = default;
};

using Mlp = BasicMlp<float>;

template <typename Real>
Real sigmoid(Real z) {
  if (z >= Real(0)) return Real(1) / (Real(1) + std::exp(-z));
  const Real e = std::exp(z);
  return e / (Real(1) + e);
}

template <typename Real>
Real softplus(Real z) {
  return std::max(z, Real(0)) + std::log1p(std::exp(-std::abs(z)));
}

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, weights and biases alike.
template <typename Real = float>
BasicMlp<Real> mlp_init(std::uint32_t in_dim, std::uint32_t hidden, std::uint64_t seed,
                        Real alpha = static_cast<Real>(kDefaultLeakyAlpha)) {
  if (in_dim < 1 || hidden < 1) throw ValidationError("MLP dimensions must be >= 1");
  auto m = BasicMlp<Real>::zeros(in_dim, hidden, alpha);
  Rng rng(seed);
  const double k1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double k2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& w : m.w1) w = static_cast<Real>(rng.uniform(-k1, k1));
  for (auto& b : m.b1) b = static_cast<Real>(rng.uniform(-k1, k1));
  for (auto& w : m.w2) w = static_cast<Real>(rng.uniform(-k2, k2));
  m.b2[0] = static_cast<Real>(rng.uniform(-k2, k2));
  return m;
}

template <typename Real, typename In>
Real forward(const BasicMlp<Real>& mlp, std::span<const In> x) {
  return mlp.logit(x);
}

template <typename Real>
struct LossAndGrad {
  Real loss = 0;
  BasicMlp<Real> grad;
};

// Mean positive-weighted binary cross-entropy on sigmoid(logit) over a batch
// (inputs row-major [n][in_dim]) and its exact gradient.
template <typename Real, typename In>
LossAndGrad<Real> grad(const BasicMlp<Real>& mlp, std::span<const In> inputs, std::span<const int> labels,
                       Real pos_weight = Real(1)) {
  const std::size_t n = labels.size();
  if (n == 0) throw ValidationError("gradient of an empty batch");
  if (inputs.size() != n * mlp.in_dim) throw DimensionError("batch inputs do not match in_dim * batch size");
  LossAndGrad<Real> out{Real(0), BasicMlp<Real>::zeros(mlp.in_dim, mlp.hidden, mlp.alpha)};
  auto& g = out.grad;
  std::vector<Real> pre(mlp.hidden), act(mlp.hidden);
  const Real inv_n = Real(1) / static_cast<Real>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const int y = labels[s];
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
    const In* x = inputs.data() + s * mlp.in_dim;
    Real z = mlp.b2[0];
    for (std::uint32_t h = 0; h < mlp.hidden; ++h) {
      const Real* row = mlp.w1.data() + static_cast<std::size_t>(h) * mlp.in_dim;
      Real p = mlp.b1[h];
      for (std::uint32_t i = 0; i < mlp.in_dim; ++i) p += row[i] * static_cast<Real>(x[i]);
      pre[h] = p;
      act[h] = mlp.leaky(p);
      z += mlp.w2[h] * act[h];
    }
    const Real sig = sigmoid(z);
    Real dz;
    if (y == 1) {
      out.loss += pos_weight * softplus(-z) * inv_n;
      dz = pos_weight * (sig - Real(1)) * inv_n;
    } else {
      out.loss += softplus(z) * inv_n;
      dz = sig * inv_n;
    }
    g.b2[0] += dz;
    for (std::uint32_t h = 0; h < mlp.hidden; ++h) {
      g.w2[h] += dz * act[h];
      const Real dpre = dz * mlp.w2[h] * (pre[h] >= Real(0) ? Real(1) : mlp.alpha);
      g.b1[h] += dpre;
      Real* grow = g.w1.data() + static_cast<std::size_t>(h) * mlp.in_dim;
      for (std::uint32_t i = 0; i < mlp.in_dim; ++i) grow[i] += dpre * static_cast<Real>(x[i]);
    }
  }
  return out;
}

template <typename Real, typename In>
Real loss(const BasicMlp<Real>& mlp, std::span<const In> inputs, std::span<const int> labels, Real pos_weight = Real(1)) {
  const std::size_t n = labels.size();
  Real total = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const Real z = mlp.logit(std::span<const In>(inputs.data() + s * mlp.in_dim, mlp.in_dim));
    total += labels[s] == 1 ? pos_weight * softplus(-z) : softplus(z);
  }
  return total / static_cast<Real>(n);
}

// ---------------------------------------------------------------------------
// Training

enum class Optimizer { kSgd, kAdam };

inline Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::kSgd;
  if (s == "adam") return Optimizer::kAdam;
  throw ValidationError("unknown optimizer '" + std::string(s) + "'");
}

inline std::string_view to_string(Optimizer o) { return o == Optimizer::kSgd ? "sgd" : "adam"; }

struct TrainConfig {
  double learning_rate = 1e-3;
  std::uint32_t epochs = 20;
  std::uint32_t batch_size = 256;
  std::uint64_t seed = 0;
  double pos_weight = 0.0;  // <= 0: #negatives / #positives
  Optimizer optimizer = Optimizer::kAdam;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
    if (batch_size < 1) throw ValidationError("batch size must be positive");
  }
};

// Labelled patch embeddings.
struct PatchDataset {
  std::uint32_t dim = 0;
  std::vector<float> embeddings;  // [rows][dim]
  std::vector<int> labels;
  std::vector<std::string> domains;
  std::vector<std::string> image_ids;

  std::size_t size() const { return labels.size(); }
  std::span<const float> row(std::size_t i) const { return {embeddings.data() + i * dim, dim}; }
  std::size_t positives() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }

  void add(std::span<const float> x, int label, const std::string& domain, const std::string& image_id) {
    if (dim == 0) dim = static_cast<std::uint32_t>(x.size());
    if (x.size() != dim) throw DimensionError("patch embedding dimension mismatch");
    if (label != 0 && label != 1) throw ValidationError("patch label must be 0 or 1");
    if (!all_finite(x)) throw NonFiniteError("patch embedding contains non-finite values");
    embeddings.insert(embeddings.end(), x.begin(), x.end());
    labels.push_back(label);
    domains.push_back(domain);
    image_ids.push_back(image_id);
  }

  // Every patch of a grid; labels from `patch_labels` or all normal when null.
  void add_grid(const embedding::EmbeddingGrid& g, const embedding::PatchLabelGrid* patch_labels, const std::string& domain) {
    if (patch_labels && (patch_labels->height != g.height || patch_labels->width != g.width))
      throw DimensionError("patch label grid does not match the embedding grid");
    for (std::size_t p = 0; p < g.patch_count(); ++p) add(g.patch(p), patch_labels ? patch_labels->labels[p] : 0, domain, g.image_id);
  }
};

struct EpochLog {
  std::uint32_t epoch = 0;
  double loss = 0.0;
  double val_auroc = -1.0;  // -1 when no validation set is in use
};

struct TrainResult {
  Mlp model;
  std::vector<EpochLog> log;
  std::uint32_t best_epoch = 0;  // 0 = initial weights
};

// Patch-level AUROC of the network on a dataset.
inline double patch_auroc(const Mlp& mlp, const PatchDataset& data) {
  std::vector<double> s(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) s[i] = mlp.logit(data.row(i));
  return eval::auroc(s, data.labels);
}

// Mini-batch training. With a validation set holding both classes, the weights
// of the epoch with the best validation patch AUROC are returned.
inline TrainResult train(Mlp mlp, const PatchDataset& data, const TrainConfig& cfg, const PatchDataset* validation = nullptr) {
  cfg.validate();
  if (data.dim != mlp.in_dim && data.size() > 0) throw DimensionError("dataset dimension does not match the network");
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.size()) throw ValidationError("training data must contain both normal and anomalous patches");
  const bool use_val = validation && validation->size() > 0 && validation->positives() > 0 &&
                       validation->positives() < validation->size();

  const float pos_weight = static_cast<float>(cfg.pos_weight > 0.0 ? cfg.pos_weight
                                                                    : static_cast<double>(data.size() - pos) / static_cast<double>(pos));
  TrainResult result{mlp, {}, 0};
  double best_val = use_val ? patch_auroc(mlp, *validation) : 0.0;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto m1 = Mlp::zeros(mlp.in_dim, mlp.hidden, mlp.alpha), m2 = m1;
  std::uint64_t step = 0;
  std::vector<float> xs;
  std::vector<int> ys;
  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      xs.clear();
      ys.clear();
      for (std::size_t i = start; i < end; ++i) {
        auto r = data.row(order[i]);
        xs.insert(xs.end(), r.begin(), r.end());
        ys.push_back(data.labels[order[i]]);
      }
      auto lg = grad<float, float>(mlp, xs, ys, pos_weight);
      epoch_loss += static_cast<double>(lg.loss) * static_cast<double>(end - start);
      ++step;
      if (cfg.optimizer == Optimizer::kSgd) {
        auto apply = [&](std::vector<float>& p, const std::vector<float>& g) {
          for (std::size_t i = 0; i < p.size(); ++i) p[i] -= static_cast<float>(cfg.learning_rate) * g[i];
        };
        apply(mlp.w1, lg.grad.w1);
        apply(mlp.b1, lg.grad.b1);
        apply(mlp.w2, lg.grad.w2);
        apply(mlp.b2, lg.grad.b2);
      } else {
        constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        auto apply = [&](std::vector<float>& p, const std::vector<float>& g, std::vector<float>& m, std::vector<float>& v) {
          for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = static_cast<float>(kBeta1 * m[i] + (1.0 - kBeta1) * g[i]);
            v[i] = static_cast<float>(kBeta2 * v[i] + (1.0 - kBeta2) * static_cast<double>(g[i]) * g[i]);
            const double mhat = m[i] / c1, vhat = v[i] / c2;
            p[i] -= static_cast<float>(cfg.learning_rate * mhat / (std::sqrt(vhat) + kEps));
          }
        };
        apply(mlp.w1, lg.grad.w1, m1.w1, m2.w1);
        apply(mlp.b1, lg.grad.b1, m1.b1, m2.b1);
        apply(mlp.w2, lg.grad.w2, m1.w2, m2.w2);
        apply(mlp.b2, lg.grad.b2, m1.b2, m2.b2);
      }
    }
    EpochLog entry{epoch, epoch_loss / static_cast<double>(data.size()), -1.0};
    if (use_val) {
      entry.val_auroc = patch_auroc(mlp, *validation);
      if (entry.val_auroc > best_val) {
        best_val = entry.val_auroc;
        result.model = mlp;
        result.best_epoch = epoch;
      }
    }
    result.log.push_back(entry);
  }
  if (!use_val) {
    result.model = mlp;
    result.best_epoch = cfg.epochs;
  }
  return result;
}

// Per-patch anomaly probability; image score = max, so thresholding it at 0.5
// is the "any patch anomalous" rule.
inline scoring::ScoreMap score_image_mlp(const Mlp& mlp, const embedding::EmbeddingGrid& grid) {
  if (grid.dim != mlp.in_dim) throw DimensionError("embedding grid dimension does not match the network");
  scoring::ScoreMap out{grid.height, grid.width, {}, 0.0};
  out.scores.reserve(grid.patch_count());
  for (std::size_t p = 0; p < grid.patch_count(); ++p) out.scores.push_back(sigmoid(static_cast<double>(mlp.logit(grid.patch(p)))));
  out.image_score = out.scores.empty() ? 0.0 : *std::max_element(out.scores.begin(), out.scores.end());
  return out;
}

// ---------------------------------------------------------------------------
// `.mlp`: "SMLP", u32 version, u32 in_dim, u32 hidden, f32 alpha, then W1, b1,
// W2, b2 as little-endian f32.

inline constexpr std::string_view kMlpMagic = "SMLP";
inline constexpr std::uint32_t kMlpVersion = 1;

inline std::string encode_mlp(const Mlp& m) {
  io::Writer w;
  w.bytes(kMlpMagic);
  w.put<std::uint32_t>(kMlpVersion);
  w.put<std::uint32_t>(m.in_dim);
  w.put<std::uint32_t>(m.hidden);
  w.put<float>(m.alpha);
  w.floats(m.w1);
  w.floats(m.b1);
  w.floats(m.w2);
  w.floats(m.b2);
  return w.data();
}

inline Mlp decode_mlp(std::string bytes) {
  io::Reader r(std::move(bytes));
  if (r.remaining() < kMlpMagic.size() || r.bytes(kMlpMagic.size()) != kMlpMagic) throw FormatError("not a model file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kMlpVersion) throw VersionError("unsupported model file version " + std::to_string(version));
  Mlp m;
  m.in_dim = r.get<std::uint32_t>();
  m.hidden = r.get<std::uint32_t>();
  if (m.in_dim == 0 || m.hidden == 0) throw DimensionError("model declares a zero dimension");
  m.alpha = r.get<float>();
  m.w1 = r.floats(static_cast<std::uint64_t>(m.in_dim) * m.hidden);
  m.b1 = r.floats(m.hidden);
  m.w2 = r.floats(m.hidden);
  m.b2 = r.floats(1);
  if (r.remaining() != 0) throw TruncationError("model payload size does not match its declared shape");
  bool finite = std::isfinite(m.alpha);
  m.for_each_param([&](float p) { finite = finite && std::isfinite(p); });
  if (!finite) throw NonFiniteError("model contains non-finite parameters");
  return m;
}

inline void save_mlp(const Mlp& m, const std::filesystem::path& path) { io::write_file_atomic(path, encode_mlp(m)); }
inline Mlp load_mlp(const std::filesystem::path& path) { return decode_mlp(io::read_file(path)); }

}  // namespace dgad::semlp

#endif  // DGAD_SEMLP_HPP_
