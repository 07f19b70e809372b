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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "dgad/semlp.hpp"
#include "gradcheck.hpp"

namespace dgad::semlp {
namespace {

namespace fs = std::filesystem;

PatchDataset two_clusters(std::size_t per_class, std::uint32_t dim, double separation, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> n01;
  PatchDataset d;
  for (int label = 0; label < 2; ++label)
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<float> x(dim);
      for (auto& v : x) v = n01(gen);
      x[0] += static_cast<float>(label == 1 ? separation / 2 : -separation / 2);
      d.add(x, label, "d", "img" + std::to_string(i));
    }
  return d;
}

double accuracy(const Mlp& m, const PatchDataset& d) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) correct += (m.logit(d.row(i)) > 0.0f) == (d.labels[i] == 1);
  return static_cast<double>(correct) / static_cast<double>(d.size());
}

TEST(Mlp, ParameterCount) {
  EXPECT_EQ(mlp_init(1536, 32, 0).parameter_count(), 49217u);
  EXPECT_EQ(Mlp::parameter_count(1536, 32), 49217u);
  EXPECT_EQ(mlp_init(1, 1, 0).parameter_count(), 4u);
  for (std::uint32_t in = 1; in < 20; in += 3)
    for (std::uint32_t h = 1; h < 20; h += 4) EXPECT_EQ(mlp_init(in, h, 1).parameter_count(), (in + 1) * h + (h + 1));
}

TEST(Mlp, InitIsDeterministicAndBounded) {
  EXPECT_EQ(mlp_init(16, 8, 42), mlp_init(16, 8, 42));
  EXPECT_NE(mlp_init(16, 8, 42), mlp_init(16, 8, 43));
  const auto m = mlp_init(16, 8, 42);
  for (float w : m.w1) EXPECT_LE(std::abs(w), 0.25f);
  for (float w : m.w2) EXPECT_LE(std::abs(w), 1.0f / std::sqrt(8.0f));
  EXPECT_THROW(mlp_init(0, 4, 0), ValidationError);
  EXPECT_THROW(mlp_init(4, 0, 0), ValidationError);
}

TEST(Mlp, ForwardExamples) {
  const auto zero = Mlp::zeros(3, 4);
  const std::vector<float> x{1, 2, 3};
  EXPECT_EQ(forward(zero, std::span<const float>(x)), 0.0f);
  EXPECT_EQ(sigmoid(0.0), 0.5);

  auto id = Mlp::zeros(1, 1);
  id.w1[0] = 1;
  id.w2[0] = 1;
  const float neg = -2;
  EXPECT_FLOAT_EQ(id.logit(std::span<const float>(&neg, 1)), -0.02f);
  const float pos = 3;
  EXPECT_EQ(id.logit(std::span<const float>(&pos, 1)), 3.0f);

  const std::vector<float> wrong{1, 2};
  EXPECT_THROW(zero.logit(std::span<const float>(wrong)), DimensionError);
}

TEST(Mlp, StableSigmoidAndSoftplus) {
  EXPECT_NEAR(sigmoid(-10.0), 4.5397868702434395e-05, 1e-18);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(softplus(1000.0), 1000.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(7);
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) worst = std::max(worst, gradcheck::relative_error(gradcheck::random_case(gen)));
  EXPECT_LT(worst, 1e-6);
}

TEST(Gradient, SingleSample) {
  std::mt19937_64 gen(9);
  auto c = gradcheck::random_case(gen);
  c.inputs.resize(c.net.in_dim);
  c.labels.resize(1);
  EXPECT_LT(gradcheck::relative_error(c), 1e-6);
}

TEST(Gradient, SaturatedPredictionsVanish) {
  auto m = BasicMlp<double>::zeros(2, 1);
  m.b2[0] = 40.0;
  const std::vector<double> x{0.3, -0.2};
  const std::vector<int> y{1};
  const auto g = grad<double, double>(m, x, y, 1.0);
  double norm = 0.0;
  g.grad.for_each_param([&](double v) { norm += v * v; });
  EXPECT_LT(std::sqrt(norm), 1e-15);
}

TEST(Gradient, DuplicatedBatchHasSameMean) {
  std::mt19937_64 gen(11);
  const auto c = gradcheck::random_case(gen);
  auto inputs = c.inputs;
  inputs.insert(inputs.end(), c.inputs.begin(), c.inputs.end());
  auto labels = c.labels;
  labels.insert(labels.end(), c.labels.begin(), c.labels.end());
  const auto a = gradcheck::flatten(grad<double, double>(c.net, c.inputs, c.labels, c.pos_weight).grad);
  const auto b = gradcheck::flatten(grad<double, double>(c.net, inputs, labels, c.pos_weight).grad);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14 * std::max(1.0, std::abs(a[i])));
}

TEST(Gradient, Errors) {
  const auto m = BasicMlp<double>::zeros(2, 2);
  const std::vector<double> x{1, 2};
  EXPECT_THROW((grad<double, double>(m, x, std::vector<int>{2})), ValidationError);
  EXPECT_THROW((grad<double, double>(m, std::vector<double>{}, std::vector<int>{})), ValidationError);
  EXPECT_THROW((grad<double, double>(m, x, std::vector<int>{0, 1})), DimensionError);
}

TEST(Gradient, SmallStepDoesNotIncreaseLoss) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = gradcheck::random_case(gen);
    const auto lg = grad<double, double>(c.net, c.inputs, c.labels, c.pos_weight);
    auto p = gradcheck::flatten(c.net);
    const auto g = gradcheck::flatten(lg.grad);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= 1e-4 * g[i];
    const auto next = gradcheck::unflatten(c.net, p);
    EXPECT_LE((loss<double, double>(next, c.inputs, c.labels, c.pos_weight)), lg.loss);
  }
}

TEST(Train, SeparableClustersReachHighAccuracy) {
  const auto data = two_clusters(1000, 8, 6.0, 1);
  TrainConfig cfg;
  cfg.seed = 3;
  const auto result = train(mlp_init(8, 32, 3), data, cfg);
  EXPECT_GE(accuracy(result.model, data), 0.99);
  ASSERT_EQ(result.log.size(), 20u);
  EXPECT_LT(result.log.back().loss, result.log.front().loss);
}

TEST(Train, SgdAlsoLearns) {
  const auto data = two_clusters(300, 4, 6.0, 2);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 32;
  const auto result = train(mlp_init(4, 8, 1), data, cfg);
  EXPECT_GE(accuracy(result.model, data), 0.99);
}

TEST(Train, ZeroEpochsReturnsInitialNetwork) {
  const auto data = two_clusters(10, 3, 4.0, 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto init = mlp_init(3, 4, 9);
  const auto result = train(init, data, cfg);
  EXPECT_EQ(result.model, init);
  EXPECT_TRUE(result.log.empty());
}

TEST(Train, Deterministic) {
  const auto data = two_clusters(100, 5, 3.0, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 5;
  EXPECT_EQ(train(mlp_init(5, 6, 1), data, cfg).model, train(mlp_init(5, 6, 1), data, cfg).model);
}

TEST(Train, SingleClassIsAnError) {
  PatchDataset d;
  d.add(std::vector<float>{1, 2}, 0, "a", "x");
  d.add(std::vector<float>{2, 2}, 0, "a", "y");
  EXPECT_THROW(train(mlp_init(2, 2, 0), d, TrainConfig{}), ValidationError);
}

TEST(Train, ValidationSelectsBestEpoch) {
  const auto data = two_clusters(200, 4, 4.0, 6);
  const auto val = two_clusters(100, 4, 4.0, 7);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  const auto result = train(mlp_init(4, 8, 2), data, cfg, &val);
  ASSERT_EQ(result.log.size(), 5u);
  double best = patch_auroc(mlp_init(4, 8, 2), val);
  for (const auto& e : result.log) {
    EXPECT_GE(e.val_auroc, 0.0);
    best = std::max(best, e.val_auroc);
  }
  EXPECT_DOUBLE_EQ(patch_auroc(result.model, val), best);
}

TEST(ScoreImageMlp, Examples) {
  auto m = Mlp::zeros(1, 1);
  m.w1[0] = 1;
  m.w2[0] = 1;
  m.b2[0] = -10;
  embedding::EmbeddingGrid g;
  g.height = 1;
  g.width = 3;
  g.dim = 1;
  g.data = {0, 0, 0};
  auto s = score_image_mlp(m, g);
  EXPECT_NEAR(s.image_score, 4.54e-5, 1e-7);
  EXPECT_LT(s.image_score, 0.5);
  g.data = {0, 20, 0};
  s = score_image_mlp(m, g);
  EXPECT_GT(s.image_score, 0.5);
  EXPECT_EQ(s.image_score, s.scores[1]);
  EXPECT_EQ(score_image_mlp(Mlp::zeros(1, 1), g).image_score, 0.5);
  g.dim = 3;
  g.width = 1;
  EXPECT_THROW(score_image_mlp(m, g), DimensionError);
}

TEST(ScoreImageMlp, ThresholdCommutesWithMax) {
  std::mt19937 gen(4);
  std::normal_distribution<float> n01;
  const auto m = mlp_init(3, 5, 8);
  for (int trial = 0; trial < 200; ++trial) {
    embedding::EmbeddingGrid g;
    g.height = 2;
    g.width = 3;
    g.dim = 3;
    g.data.resize(18);
    for (auto& v : g.data) v = 3.0f * n01(gen);
    const auto s = score_image_mlp(m, g);
    const bool any = std::any_of(s.scores.begin(), s.scores.end(), [](double p) { return p > 0.5; });
    EXPECT_EQ(s.image_score > 0.5, any);
  }
}

TEST(ModelFile, RoundTrip) {
  const auto m = mlp_init(12, 7, 5);
  const auto dir = fs::temp_directory_path() / "dgad_semlp_test";
  save_mlp(m, dir / "model.mlp");
  const auto back = load_mlp(dir / "model.mlp");
  EXPECT_EQ(back, m);
  EXPECT_EQ(encode_mlp(back), encode_mlp(m));
}

TEST(ModelFile, DistinctErrors) {
  const auto good = encode_mlp(mlp_init(3, 2, 1));
  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(decode_mlp(magic), FormatError);
  auto version = good;
  version[4] = 2;
  EXPECT_THROW(decode_mlp(version), VersionError);
  EXPECT_THROW(decode_mlp(good.substr(0, good.size() - 2)), TruncationError);
  EXPECT_THROW(decode_mlp(good + "x"), TruncationError);
  auto nan = good;
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 20, &q, 4);
  EXPECT_THROW(decode_mlp(nan), NonFiniteError);
}

}  // namespace
}  // namespace dgad::semlp
