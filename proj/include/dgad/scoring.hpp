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

#ifndef DGAD_SCORING_HPP_
#define DGAD_SCORING_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "dgad/common.hpp"
#include "dgad/coreset.hpp"
#include "dgad/embedding.hpp"

namespace dgad::scoring {

inline constexpr std::size_t kDefaultNeighbors = 9;

struct ScoreMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> scores;
  double image_score = 0.0;
};

struct PatchDecision {
  Label label = Label::kNormal;
  double s_normal = 0.0;
  double s_anomaly = 0.0;
};

struct DualDecision {
  std::vector<PatchDecision> patches;
  Label image_label = Label::kNormal;
  double image_margin = 0.0;  // max over patches of (s_normal - s_anomaly)
};

// Nearest-bank distance s* reweighted by the softmax over the nearest entry's
// own b-neighbourhood N (which contains that entry):
//   s = (1 - exp(s*) / sum_{m in N} exp(|q - m|)) * s*
// With b = 1 the weight is degenerate and s* is returned as is.
inline double weighted_patch_score(const coreset::MemoryBank& bank, std::span<const float> query, std::size_t b_neighbors) {
  if (bank.count() == 0) throw ValidationError("weighted_patch_score: empty bank");
  if (b_neighbors < 1 || b_neighbors > bank.count()) throw ValidationError("weighted_patch_score: b_neighbors out of range");
  const auto nearest = coreset::nn_query(bank, query, 1).front();
  const double s_star = nearest.distance;
  if (b_neighbors == 1 || s_star == 0.0) return s_star;

  auto hood = coreset::nn_query(bank, bank.entry(nearest.index), b_neighbors);
  // Duplicates of m* with a lower index can push m* itself out of the list.
  if (std::none_of(hood.begin(), hood.end(), [&](const coreset::NnResult& r) { return r.index == nearest.index; }))
    hood.back() = {nearest.index, 0.0};

  std::vector<double> dist;
  dist.reserve(hood.size());
  for (const auto& h : hood) dist.push_back(h.index == nearest.index ? s_star : l2(query, bank.entry(h.index)));
  const double shift = *std::max_element(dist.begin(), dist.end());
  double denom = 0.0;
  for (double d : dist) denom += std::exp(d - shift);
  const double weight = std::exp(s_star - shift) / denom;
  return (1.0 - weight) * s_star;
}

inline void check_grid(const coreset::MemoryBank& bank, const embedding::EmbeddingGrid& grid) {
  if (bank.count() == 0) throw ValidationError("empty bank");
  if (grid.dim != bank.dim()) throw DimensionError("embedding grid dimension does not match the bank");
}

// Per-patch weighted scores, image score = max.
inline ScoreMap score_image(const coreset::MemoryBank& bank, const embedding::EmbeddingGrid& grid,
                            std::size_t b_neighbors = kDefaultNeighbors) {
  check_grid(bank, grid);
  ScoreMap out{grid.height, grid.width, {}, 0.0};
  out.scores.reserve(grid.patch_count());
  for (std::size_t p = 0; p < grid.patch_count(); ++p) out.scores.push_back(weighted_patch_score(bank, grid.patch(p), b_neighbors));
  out.image_score = out.scores.empty() ? 0.0 : *std::max_element(out.scores.begin(), out.scores.end());
  return out;
}

// Labeled (dual-bank) classification: each patch goes to the bank with the
// smaller weighted score, ties to normal; any anomalous patch makes the image
// anomalous.
inline DualDecision dual_classify(const coreset::MemoryBank& normal_bank, const coreset::MemoryBank& anomaly_bank,
                                  const embedding::EmbeddingGrid& grid, std::size_t b_neighbors = kDefaultNeighbors) {
  check_grid(normal_bank, grid);
  check_grid(anomaly_bank, grid);
  DualDecision out;
  out.patches.reserve(grid.patch_count());
  out.image_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.patch_count(); ++p) {
    PatchDecision d;
    d.s_normal = weighted_patch_score(normal_bank, grid.patch(p), std::min(b_neighbors, normal_bank.count()));
    d.s_anomaly = weighted_patch_score(anomaly_bank, grid.patch(p), std::min(b_neighbors, anomaly_bank.count()));
    d.label = d.s_anomaly < d.s_normal ? Label::kAnomaly : Label::kNormal;
    if (d.label == Label::kAnomaly) out.image_label = Label::kAnomaly;
    out.image_margin = std::max(out.image_margin, d.s_normal - d.s_anomaly);
    out.patches.push_back(d);
  }
  return out;
}

}  // namespace dgad::scoring

#endif  // DGAD_SCORING_HPP_
