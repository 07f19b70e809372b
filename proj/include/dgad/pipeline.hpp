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

// Composition of the modules into the leave-one-domain-out workflow: loading
// grids and patch labels for manifest records, building banks from the train
// split and scoring the test split.

#ifndef DGAD_PIPELINE_HPP_
#define DGAD_PIPELINE_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dgad/common.hpp"
#include "dgad/coreset.hpp"
#include "dgad/dataset.hpp"
#include "dgad/embedding.hpp"
#include "dgad/eval.hpp"
#include "dgad/png_io.hpp"
#include "dgad/scoring.hpp"
#include "dgad/semlp.hpp"
#include "dgad/synthetic.hpp"

namespace dgad::pipeline {

namespace fs = std::filesystem;

// Where grids and patch labels for a record come from.
struct Source {
  std::function<embedding::EmbeddingGrid(const dataset::ImageRecord&)> grid;
  std::function<embedding::PatchLabelGrid(const dataset::ImageRecord&, const embedding::EmbeddingGrid&)> labels;
};

inline embedding::PatchLabelGrid all_normal(const embedding::EmbeddingGrid& g, double threshold) {
  embedding::PatchLabelGrid l;
  l.height = g.height;
  l.width = g.width;
  l.threshold = threshold;
  l.labels.assign(g.patch_count(), 0);
  l.anomalous_fraction.assign(g.patch_count(), 0.0);
  return l;
}

// Reads `<dir>/<image_id>.semb`; when absent, gathers per-layer maps
// `<dir>/<image_id>.layer<j>.semb`, pools each and concatenates them.
inline embedding::EmbeddingGrid load_grid(const fs::path& dir, const std::string& id, const embedding::PoolingConfig& pooling) {
  const fs::path direct = dir / (id + ".semb");
  if (fs::exists(direct)) return embedding::read_embedding_file(direct);
  std::vector<embedding::FeatureMap> maps;
  embedding::EmbeddingMeta meta;
  const std::string prefix = id + ".layer";
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && e.path().extension() == ".semb") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto g = embedding::read_embedding_file(f);
      const std::string layer = f.stem().string().substr(prefix.size());
      int layer_id = 0;
      try {
        layer_id = std::stoi(layer);
      } catch (const std::logic_error&) {
        throw FormatError("cannot parse layer index from " + f.string());
      }
      meta.source_height = g.meta.source_height;
      meta.source_width = g.meta.source_width;
      meta.backbone = g.meta.backbone;
      maps.push_back(embedding::neighborhood_pool(embedding::as_feature_map(g, layer_id), pooling));
    }
  }
  if (maps.empty()) throw IoError("no embedding file for image '" + id + "' in " + dir.string());
  auto grid = embedding::align_and_concat(std::move(maps));
  meta.layers = grid.meta.layers;
  grid.meta = meta;
  grid.image_id = id;
  return grid;
}

inline Source disk_source(const fs::path& embeddings_dir, double threshold, embedding::PoolingConfig pooling = {}) {
  Source s;
  s.grid = [embeddings_dir, pooling](const dataset::ImageRecord& r) { return load_grid(embeddings_dir, dataset::image_id(r), pooling); };
  s.labels = [threshold](const dataset::ImageRecord& r, const embedding::EmbeddingGrid& g) {
    if (!r.mask_path) return all_normal(g, threshold);
    return embedding::mask_to_patch_labels(png::read_gray(*r.mask_path), g.height, g.width, threshold);
  };
  return s;
}

// Serves generated data by image path.
inline Source memory_source(const synthetic::SyntheticData& data) {
  auto index = std::make_shared<std::map<std::string, std::size_t>>();
  for (std::size_t i = 0; i < data.manifest.records.size(); ++i) (*index)[data.manifest.records[i].image_path] = i;
  Source s;
  s.grid = [&data, index](const dataset::ImageRecord& r) { return data.grids.at(index->at(r.image_path)); };
  s.labels = [&data, index](const dataset::ImageRecord& r, const embedding::EmbeddingGrid&) {
    return data.labels.at(index->at(r.image_path));
  };
  return s;
}

inline double default_ratio(std::size_t categories) { return 0.1 / static_cast<double>(std::max<std::size_t>(1, categories)); }

// Per-image patch sets for the normal bank: every patch of every normal image in `role`.
inline std::vector<coreset::VectorSet> normal_patches(const dataset::DatasetManifest& m, const Source& src,
                                                      dataset::SplitRole role = dataset::SplitRole::kTrain) {
  std::vector<coreset::VectorSet> out;
  for (const auto& r : m.records)
    if (!r.anomalous && r.split_role == role) out.push_back(coreset::VectorSet::from_grid(src.grid(r)));
  return out;
}

// Per-image patch sets for the anomaly bank: only the anomalous patches of
// anomalous images in `role`; their good patches are dropped.
inline std::vector<coreset::VectorSet> anomalous_patches(const dataset::DatasetManifest& m, const Source& src,
                                                         dataset::SplitRole role = dataset::SplitRole::kTrain) {
  std::vector<coreset::VectorSet> out;
  for (const auto& r : m.records) {
    if (!r.anomalous || r.split_role != role) continue;
    const auto g = src.grid(r);
    const auto labels = src.labels(r, g);
    if (labels.height != g.height || labels.width != g.width) throw DimensionError("patch labels do not match grid for " + g.image_id);
    coreset::VectorSet v(g.dim);
    for (std::size_t p = 0; p < g.patch_count(); ++p)
      if (labels.labels[p]) v.push_back(g.patch(p));
    if (!v.empty()) out.push_back(std::move(v));
  }
  return out;
}

struct BankOptions {
  double ratio = 0.01;
  coreset::Variant variant = coreset::Variant::kOffline;
  std::uint32_t batch_size = 1;
  std::uint32_t projection_dim = 128;  // clamped to the embedding dim; 0 = identity
  std::uint64_t projection_seed = 0;
  std::size_t floor = 0;
  Label label = Label::kNormal;
};

inline coreset::Projection projection_for(std::uint32_t dim, const BankOptions& o) {
  if (o.projection_dim == 0) return coreset::Projection::make_identity(dim);
  return coreset::make_projection(dim, std::min(dim, o.projection_dim), o.projection_seed);
}

inline coreset::MemoryBank build_bank(const std::vector<coreset::VectorSet>& images, const BankOptions& o) {
  coreset::VectorSet all;
  for (const auto& v : images) all.append(v);
  if (all.empty()) throw ValidationError("no embeddings to build a " + std::string(to_string(o.label)) + " bank from");
  const auto psi = projection_for(all.dim(), o);
  coreset::MemoryBank bank;
  bank.label = o.label;
  switch (o.variant) {
    case coreset::Variant::kOffline:
      bank = coreset::greedy_offline(all, o.ratio, psi, 0, o.label);
      break;
    case coreset::Variant::kOnline: {
      coreset::OnlineBuilder builder(bank, psi);
      for (const auto& v : images) builder.add(v, o.ratio);
      bank = builder.release();
      bank.params = coreset::params_for(psi, o.ratio, coreset::Variant::kOnline);
      break;
    }
    case coreset::Variant::kBatch: {
      const std::size_t b = std::max<std::uint32_t>(1, o.batch_size);
      for (std::size_t k = 0; k < images.size(); k += b) {
        std::vector<coreset::VectorSet> batch(images.begin() + static_cast<std::ptrdiff_t>(k),
                                              images.begin() + static_cast<std::ptrdiff_t>(std::min(images.size(), k + b)));
        bank = coreset::batch_update(std::move(bank), batch, o.ratio, psi);
      }
      bank.params = coreset::params_for(psi, o.ratio, coreset::Variant::kBatch, static_cast<std::uint32_t>(b));
      break;
    }
  }
  bank.label = o.label;
  if (o.floor > 0) bank = coreset::enforce_floor(std::move(bank), o.floor, all, psi);
  return bank;
}

struct RunInfo {
  std::string method;
  std::string backbone;
  std::uint64_t seed = 0;
};

inline eval::ScoredRow scored_row(const dataset::DatasetManifest& m, const dataset::ImageRecord& r, double score, const RunInfo& run) {
  return {dataset::image_id(r), m.dataset, m.target_domain.value_or(""), r.anomalous ? 1 : 0, score, run.method, run.backbone, run.seed};
}

inline std::vector<const dataset::ImageRecord*> records_in(const dataset::DatasetManifest& m, dataset::SplitRole role) {
  std::vector<const dataset::ImageRecord*> out;
  for (const auto& r : m.records)
    if (r.split_role == role) out.push_back(&r);
  return out;
}

inline eval::ScoredSet score_patchcore(const dataset::DatasetManifest& m, const Source& src, const coreset::MemoryBank& bank,
                                       std::size_t b_neighbors, const RunInfo& run, unsigned workers = 1,
                                       dataset::SplitRole role = dataset::SplitRole::kTest) {
  const auto recs = records_in(m, role);
  eval::ScoredSet out(recs.size());
  parallel_for(recs.size(), workers, [&](std::size_t i) {
    const auto g = src.grid(*recs[i]);
    out[i] = scored_row(m, *recs[i], scoring::score_image(bank, g, std::min(b_neighbors, bank.count())).image_score, run);
  });
  return out;
}

struct DualResult {
  eval::ScoredSet scores;           // image_margin as the continuous score
  std::vector<Label> decisions;     // parallel to scores
};

inline DualResult score_dual(const dataset::DatasetManifest& m, const Source& src, const coreset::MemoryBank& normal,
                             const coreset::MemoryBank& anomaly, std::size_t b_neighbors, const RunInfo& run,
                             unsigned workers = 1, dataset::SplitRole role = dataset::SplitRole::kTest) {
  const auto recs = records_in(m, role);
  DualResult out{eval::ScoredSet(recs.size()), std::vector<Label>(recs.size())};
  parallel_for(recs.size(), workers, [&](std::size_t i) {
    const auto g = src.grid(*recs[i]);
    const auto d = scoring::dual_classify(normal, anomaly, g, b_neighbors);
    out.scores[i] = scored_row(m, *recs[i], d.image_margin, run);
    out.decisions[i] = d.image_label;
  });
  return out;
}

// Every patch of every image in `role`, labelled from masks (normal images all 0).
inline semlp::PatchDataset patch_dataset(const dataset::DatasetManifest& m, const Source& src, dataset::SplitRole role) {
  semlp::PatchDataset data;
  for (const auto& r : m.records) {
    if (r.split_role != role) continue;
    const auto g = src.grid(r);
    const auto labels = src.labels(r, g);
    data.add_grid(g, &labels, r.category);
  }
  return data;
}

inline eval::ScoredSet score_semlp(const dataset::DatasetManifest& m, const Source& src, const semlp::Mlp& mlp, const RunInfo& run,
                                   unsigned workers = 1, dataset::SplitRole role = dataset::SplitRole::kTest) {
  const auto recs = records_in(m, role);
  eval::ScoredSet out(recs.size());
  parallel_for(recs.size(), workers, [&](std::size_t i) {
    out[i] = scored_row(m, *recs[i], semlp::score_image_mlp(mlp, src.grid(*recs[i])).image_score, run);
  });
  return out;
}

}  // namespace dgad::pipeline

#endif  // DGAD_PIPELINE_HPP_
