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

#include <filesystem>
#include <random>

#include "dgad/coreset.hpp"
#include "oracles.hpp"

namespace dgad::coreset {
namespace {

namespace fs = std::filesystem;

VectorSet line(std::initializer_list<float> xs) {
  VectorSet v(1);
  for (float x : xs) v.push_back(std::span<const float>(&x, 1));
  return v;
}

VectorSet random_set(std::mt19937& gen, std::size_t n, std::uint32_t dim, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> data(n * dim);
  for (auto& x : data) x = u(gen);
  return VectorSet(dim, std::move(data));
}

std::vector<oracle::Point> as_points(const VectorSet& v) {
  std::vector<oracle::Point> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i].begin(), v[i].end());
  return out;
}

// Index of each bank entry within `source` (first unused match).
std::vector<std::size_t> indices_in(const MemoryBank& bank, const VectorSet& source) {
  std::vector<std::size_t> out;
  std::vector<bool> used(source.size(), false);
  for (std::size_t i = 0; i < bank.count(); ++i) {
    for (std::size_t j = 0; j < source.size(); ++j) {
      if (!used[j] && std::equal(source[j].begin(), source[j].end(), bank.entry(i).begin())) {
        used[j] = true;
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "dgad_coreset_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Projection, DeterministicPerSeed) {
  EXPECT_EQ(make_projection(32, 8, 5), make_projection(32, 8, 5));
  EXPECT_NE(make_projection(32, 8, 5).matrix, make_projection(32, 8, 6).matrix);
  EXPECT_THROW(make_projection(8, 9, 0), ValidationError);
  EXPECT_THROW(make_projection(8, 0, 0), ValidationError);
}

TEST(Projection, IdentityPreservesDistances) {
  std::mt19937 gen(2);
  const auto v = random_set(gen, 10, 6);
  const auto psi = Projection::make_identity(6);
  const auto p = detail::project_all(v, psi);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      EXPECT_DOUBLE_EQ(std::sqrt(detail::squared_distance(&p[i * 6], &p[j * 6], 6)), l2(v[i], v[j]));
}

TEST(Projection, EntryVarianceIsOneOverOutDim) {
  const auto psi = make_projection(256, 64, 11);
  double sum = 0.0, sq = 0.0;
  for (double m : psi.matrix) {
    sum += m;
    sq += m * m;
  }
  const double n = static_cast<double>(psi.matrix.size());
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0 / 64.0, 0.1 / 64.0);
}

TEST(Projection, ApproximatelyPreservesDistances) {
  // 100 pairs at unit distance, 128 -> 64 dims.
  std::mt19937 gen(4);
  std::normal_distribution<double> n01;
  const auto psi = make_projection(128, 64, 99);
  double total = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    std::vector<float> a(128), dir(128), b(128);
    double norm = 0.0;
    for (int i = 0; i < 128; ++i) {
      a[i] = static_cast<float>(n01(gen));
      dir[i] = static_cast<float>(n01(gen));
      norm += static_cast<double>(dir[i]) * dir[i];
    }
    for (int i = 0; i < 128; ++i) b[i] = a[i] + static_cast<float>(dir[i] / std::sqrt(norm));
    std::vector<double> pa(64), pb(64);
    psi.apply(a, pa);
    psi.apply(b, pb);
    const double projected = std::sqrt(detail::squared_distance(pa.data(), pb.data(), 64));
    total += std::abs(projected / l2(a, b) - 1.0);
  }
  EXPECT_LT(total / 100.0, 0.25);
}

TEST(GreedyOffline, FullRatioKeepsEverythingInGreedyOrder) {
  const auto v = line({0, 1, 2, 10});
  const auto bank = greedy_offline(v, 1.0, Projection::make_identity(1), 1);
  ASSERT_EQ(bank.count(), 4u);
  // start 1, farthest is 10, then 0 ties... min dists: 0 ->1, 2 ->1: lowest index 0.
  EXPECT_EQ(indices_in(bank, v), (std::vector<std::size_t>{1, 3, 0, 2}));
}

TEST(GreedyOffline, LineExample) {
  const auto bank = greedy_offline(line({0, 1, 2, 10}), 0.5, Projection::make_identity(1), 0);
  ASSERT_EQ(bank.count(), 2u);
  EXPECT_EQ(bank.entry(0)[0], 0.0f);
  EXPECT_EQ(bank.entry(1)[0], 10.0f);
}

TEST(GreedyOffline, SinglePickIsStart) {
  std::mt19937 gen(6);
  const auto v = random_set(gen, 30, 3);
  const auto bank = greedy_offline(v, 0.01, Projection::make_identity(3), 17);
  ASSERT_EQ(bank.count(), 1u);
  EXPECT_TRUE(std::equal(v[17].begin(), v[17].end(), bank.entry(0).begin()));
}

TEST(GreedyOffline, Errors) {
  const auto psi = Projection::make_identity(1);
  EXPECT_THROW(greedy_offline(VectorSet(1), 0.5, psi), ValidationError);
  EXPECT_THROW(greedy_offline(line({1, 2}), 0.0, psi), ValidationError);
  EXPECT_THROW(greedy_offline(line({1, 2}), 1.5, psi), ValidationError);
  EXPECT_THROW(greedy_offline(line({1, 2}), 0.5, psi, 2), ValidationError);
  EXPECT_THROW(greedy_offline(line({1, 2}), 0.5, Projection::make_identity(2)), DimensionError);
}

TEST(GreedyOffline, SelectionCountUsesCeiling) {
  EXPECT_EQ(selection_count(10, 0.3), 3u);
  EXPECT_EQ(selection_count(10, 0.31), 4u);
  EXPECT_EQ(selection_count(7, 0.5), 4u);
  EXPECT_EQ(selection_count(3, 1e-6), 1u);
  EXPECT_EQ(selection_count(5, 1.0), 5u);
}

TEST(GreedyOffline, MatchesBruteForceOracle) {
  std::mt19937 gen(8);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + gen() % 40;
    const std::uint32_t dim = 1 + gen() % 6;
    const auto v = random_set(gen, n, dim);
    const double r = 0.05 + 0.95 * (gen() % 1000) / 1000.0;
    const std::size_t start = gen() % n;
    const auto bank = greedy_offline(v, r, Projection::make_identity(dim), start);
    EXPECT_EQ(indices_in(bank, v), oracle::greedy(as_points(v), selection_count(n, r), start));
  }
}

TEST(GreedyOffline, ReplayOrderAndCoverageMonotonicity) {
  std::mt19937 gen(10);
  const auto v = random_set(gen, 50, 4);
  const auto psi = make_projection(4, 3, 1);
  const auto bank = greedy_offline(v, 1.0, psi, 0);
  const auto order = indices_in(bank, v);
  const auto p = detail::project_all(v, psi);
  auto pd = [&](std::size_t a, std::size_t b) { return std::sqrt(detail::squared_distance(&p[a * 3], &p[b * 3], 3)); };
  double previous_radius = std::numeric_limits<double>::infinity();
  for (std::size_t step = 1; step < order.size(); ++step) {
    auto min_to_selected = [&](std::size_t i) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < step; ++s) m = std::min(m, pd(i, order[s]));
      return m;
    };
    const double chosen = min_to_selected(order[step]);
    double radius = 0.0;
    for (std::size_t u = step; u < order.size(); ++u) {
      EXPECT_GE(chosen, min_to_selected(order[u]));
      radius = std::max(radius, min_to_selected(order[u]));
    }
    EXPECT_LE(radius, previous_radius);
    previous_radius = radius;
  }
}

TEST(GreedyOffline, StoresUnprojectedEntries) {
  std::mt19937 gen(12);
  const auto v = random_set(gen, 40, 16);
  const auto bank = greedy_offline(v, 0.25, make_projection(16, 4, 3), 0);
  EXPECT_EQ(bank.dim(), 16u);
  EXPECT_EQ(indices_in(bank, v).size(), bank.count());
}

TEST(OnlineUpdate, FullRatioOnEmptyBankTakesAll) {
  std::mt19937 gen(14);
  const auto img = random_set(gen, 12, 3);
  const auto bank = online_update(MemoryBank{}, img, 1.0, Projection::make_identity(3));
  ASSERT_EQ(bank.count(), 12u);
  EXPECT_EQ(indices_in(bank, img).front(), 0u);
  EXPECT_EQ(bank.params.variant, Variant::kOnline);
}

TEST(OnlineUpdate, DuplicateImageStillAddsByTieBreak) {
  std::mt19937 gen(16);
  const auto img = random_set(gen, 8, 2);
  const auto psi = Projection::make_identity(2);
  auto bank = online_update(MemoryBank{}, img, 1.0, psi);
  OnlineBuilder builder(bank, psi);
  const auto picked = builder.add(img, 0.5);
  EXPECT_EQ(picked, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(builder.bank().count(), 12u);
}

TEST(OnlineUpdate, TwoFarClustersBothRepresented) {
  const auto a = line({0.0f, 0.1f, 0.2f, 0.3f});
  const auto b = line({100.0f, 100.1f, 100.2f, 100.3f});
  const auto psi = Projection::make_identity(1);
  auto bank = online_update(MemoryBank{}, a, 0.5, psi);
  bank = online_update(std::move(bank), b, 0.5, psi);
  ASSERT_EQ(bank.count(), 4u);
  // Trace: image a -> 0.0 (empty bank), then 0.3; image b -> 100.3 (farthest from 0.3), then 100.0.
  EXPECT_EQ(bank.entry(0)[0], 0.0f);
  EXPECT_EQ(bank.entry(1)[0], 0.3f);
  EXPECT_EQ(bank.entry(2)[0], 100.3f);
  EXPECT_EQ(bank.entry(3)[0], 100.0f);
}

TEST(OnlineUpdate, DimensionMismatch) {
  auto bank = online_update(MemoryBank{}, line({1, 2}), 1.0, Projection::make_identity(1));
  VectorSet two(2, {1, 2, 3, 4});
  EXPECT_THROW(online_update(bank, two, 1.0, Projection::make_identity(2)), DimensionError);
  EXPECT_THROW(online_update(bank, two, 1.0, Projection::make_identity(1)), DimensionError);
}

TEST(BatchUpdate, SingleImageBatchEqualsOnline) {
  std::mt19937 gen(18);
  const auto psi = make_projection(5, 3, 2);
  auto seed_bank = online_update(MemoryBank{}, random_set(gen, 10, 5), 0.3, psi);
  const auto img = random_set(gen, 15, 5);
  const auto online = online_update(seed_bank, img, 0.4, psi);
  const auto batch = batch_update(seed_bank, {img}, 0.4, psi);
  EXPECT_EQ(online.entries, batch.entries);
}

TEST(BatchUpdate, WholeDatasetEqualsOffline) {
  std::mt19937 gen(20);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint32_t dim = 1 + gen() % 5;
    std::vector<VectorSet> images;
    VectorSet all(dim);
    const std::size_t n_images = 1 + gen() % 6;
    for (std::size_t i = 0; i < n_images; ++i) {
      images.push_back(random_set(gen, 1 + gen() % 10, dim));
      all.append(images.back());
    }
    const double r = 0.1 + 0.9 * (gen() % 100) / 100.0;
    const auto psi = Projection::make_identity(dim);
    EXPECT_EQ(batch_update(MemoryBank{}, images, r, psi).entries, greedy_offline(all, r, psi, 0).entries);
  }
}

TEST(BatchUpdate, EmptyBatchLeavesBankUnchanged) {
  auto bank = online_update(MemoryBank{}, line({1, 2, 3}), 1.0, Projection::make_identity(1));
  EXPECT_EQ(batch_update(bank, {}, 0.5, Projection::make_identity(1)), bank);
}

TEST(EnforceFloor, SmallCandidateSetTakesAll) {
  std::mt19937 gen(22);
  const auto cand = random_set(gen, 50, 4);
  const auto psi = Projection::make_identity(4);
  const auto bank = enforce_floor(greedy_offline(cand, 0.1, psi, 0, Label::kAnomaly), 1000, cand, psi);
  EXPECT_EQ(bank.count(), 50u);
  auto idx = indices_in(bank, cand);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(idx[i], i);
}

TEST(EnforceFloor, AlreadyLargeEnough) {
  std::mt19937 gen(24);
  const auto cand = random_set(gen, 40, 2);
  const auto psi = Projection::make_identity(2);
  const auto bank = greedy_offline(cand, 0.5, psi, 0);
  const auto floored = enforce_floor(bank, 10, cand, psi);
  EXPECT_EQ(floored.entries, bank.entries);
}

TEST(EnforceFloor, ContinuesGreedySelection) {
  std::mt19937 gen(26);
  const auto cand = random_set(gen, 2000, 3);
  const auto psi = Projection::make_identity(3);
  const auto bank = greedy_offline(cand, 0.01, psi, 0);
  ASSERT_EQ(bank.count(), 20u);
  const auto floored = enforce_floor(bank, 1000, cand, psi);
  EXPECT_EQ(floored.count(), 1000u);
  // Continuing from 20 picks is the same as greedily picking 1000 in one go.
  EXPECT_EQ(floored.entries, greedy_offline(cand, 0.5, psi, 0).entries);
}

TEST(NnQuery, LineExample) {
  MemoryBank bank;
  bank.entries = line({0, 3, 10});
  const float q = 4;
  const auto res = nn_query(bank, std::span<const float>(&q, 1), 2);
  ASSERT_EQ(res.size(), 2u);
  EXPECT_EQ(res[0], (NnResult{1, 1.0}));
  EXPECT_EQ(res[1], (NnResult{0, 4.0}));
}

TEST(NnQuery, ExactEntryAndFullList) {
  std::mt19937 gen(28);
  MemoryBank bank;
  bank.entries = random_set(gen, 25, 7);
  const auto first = nn_query(bank, bank.entry(9), 1);
  EXPECT_EQ(first[0].index, 9u);
  EXPECT_EQ(first[0].distance, 0.0);
  const auto all = nn_query(bank, bank.entry(3), 25);
  ASSERT_EQ(all.size(), 25u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LE(all[i - 1].distance, all[i].distance);
}

TEST(NnQuery, TiesGoToLowestIndex) {
  MemoryBank bank;
  bank.entries = line({2, -2, 2, -2});
  const float q = 0;
  const auto res = nn_query(bank, std::span<const float>(&q, 1), 4);
  EXPECT_EQ(res[0].index, 0u);
  EXPECT_EQ(res[1].index, 1u);
  EXPECT_EQ(res[2].index, 2u);
  EXPECT_EQ(res[3].index, 3u);
}

TEST(NnQuery, MatchesLinearScan) {
  std::mt19937 gen(30);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t dim = 1 + gen() % 12;
    MemoryBank bank;
    bank.entries = random_set(gen, 1 + gen() % 60, dim);
    std::vector<std::vector<float>> rows;
    for (std::size_t i = 0; i < bank.count(); ++i) rows.emplace_back(bank.entry(i).begin(), bank.entry(i).end());
    const auto q = random_set(gen, 1, dim);
    const std::vector<float> qv(q[0].begin(), q[0].end());
    const std::size_t k = 1 + gen() % bank.count();
    const auto got = nn_query(bank, qv, k);
    const auto want = oracle::knn(rows, qv, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_EQ(got[i].index, want[i].first);
      EXPECT_EQ(got[i].distance, want[i].second);
    }
  }
}

TEST(NnQuery, Errors) {
  MemoryBank bank;
  bank.entries = line({1, 2});
  const float q = 0;
  EXPECT_THROW(nn_query(bank, std::span<const float>(&q, 1), 0), ValidationError);
  EXPECT_THROW(nn_query(bank, std::span<const float>(&q, 1), 3), ValidationError);
  const float q2[2] = {0, 0};
  EXPECT_THROW(nn_query(bank, q2, 1), DimensionError);
  EXPECT_THROW(nn_query(MemoryBank{}, std::span<const float>(&q, 1), 1), ValidationError);
}

TEST(BankFile, RoundTrip) {
  std::mt19937 gen(32);
  auto bank = greedy_offline(random_set(gen, 30, 6), 0.3, make_projection(6, 4, 77), 0, Label::kAnomaly);
  bank.params.floor = 1000;
  const auto path = temp_path("bank.cset");
  save_bank(bank, path);
  const auto back = load_bank(path);
  EXPECT_EQ(back, bank);
  EXPECT_EQ(encode_bank(back), encode_bank(bank));
  EXPECT_EQ(back.params.projection_seed, 77u);
  EXPECT_EQ(back.label, Label::kAnomaly);
}

TEST(BankFile, DistinctErrors) {
  std::mt19937 gen(34);
  const auto bank = greedy_offline(random_set(gen, 10, 3), 1.0, Projection::make_identity(3), 0);
  const auto good = encode_bank(bank);
  auto magic = good;
  magic[1] = 'Z';
  EXPECT_THROW(decode_bank(magic), FormatError);
  auto version = good;
  version[4] = 9;
  EXPECT_THROW(decode_bank(version), VersionError);
  // count field (offset 9) larger than the payload
  auto count = good;
  count[9] = 11;
  EXPECT_THROW(decode_bank(count), TruncationError);
  auto fewer = good;
  fewer[9] = 9;
  EXPECT_THROW(decode_bank(fewer), TruncationError);
  EXPECT_THROW(decode_bank(good.substr(0, good.size() - 1)), TruncationError);
  EXPECT_THROW(decode_bank(good, 4), DimensionError);
  EXPECT_NO_THROW(decode_bank(good, 3));
}

}  // namespace
}  // namespace dgad::coreset
