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

// Gaussian-cluster embedding generator used as a desk-scale stand-in for
// backbone features. Produces grids, patch labels and an MVTec-shaped manifest.

#ifndef DGAD_SYNTHETIC_HPP_
#define DGAD_SYNTHETIC_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgad/common.hpp"
#include "dgad/dataset.hpp"
#include "dgad/embedding.hpp"
#include "dgad/png_io.hpp"
#include "dgad/random.hpp"

namespace dgad::synthetic {

// Axis-aligned Gaussian.
struct Cluster {
  std::vector<double> mean;
  std::vector<double> scale;  // per-dimension standard deviation
};

struct DomainSpec {
  std::string name;
  std::string defect_type = "defect";
  Cluster normal;
  Cluster anomaly;
};

struct SyntheticSpec {
  std::string dataset = "synthetic";
  std::string root = "synthetic";  // prefix of the (virtual) image paths
  std::uint32_t grid_h = 8;
  std::uint32_t grid_w = 8;
  std::uint32_t dim = 16;
  std::uint32_t images_per_domain = 40;
  double anomaly_fraction = 0.4;     // share of each domain's images that carry an anomaly
  double good_train_fraction = 0.6;  // share of good images in the original train split
  std::uint32_t block_h = 2;         // anomalous patch block size
  std::uint32_t block_w = 2;
  std::vector<DomainSpec> domains;

  void validate() const {
    if (grid_h == 0 || grid_w == 0 || dim == 0) throw ValidationError("synthetic grid and dim must be positive");
    if (domains.empty()) throw ValidationError("synthetic spec has no domains");
    if (!(anomaly_fraction >= 0.0 && anomaly_fraction <= 1.0)) throw ValidationError("anomaly_fraction must be in [0, 1]");
    if (!(good_train_fraction >= 0.0 && good_train_fraction <= 1.0)) throw ValidationError("good_train_fraction must be in [0, 1]");
    if (block_h == 0 || block_w == 0 || block_h > grid_h || block_w > grid_w) throw ValidationError("anomaly block does not fit the grid");
    for (const auto& d : domains) {
      for (const Cluster* c : {&d.normal, &d.anomaly}) {
        if (c->mean.size() != dim || c->scale.size() != dim)
          throw DimensionError("cluster of domain '" + d.name + "' does not have " + std::to_string(dim) + " dimensions");
        for (double s : c->scale)
          if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("degenerate covariance in domain '" + d.name + "'");
      }
      if (d.defect_type == dataset::kGood) throw ValidationError("defect type must not be 'good'");
    }
  }
};

struct SyntheticData {
  std::vector<embedding::EmbeddingGrid> grids;
  std::vector<embedding::PatchLabelGrid> labels;
  dataset::DatasetManifest manifest;  // records parallel to grids
};

namespace detail {
inline std::vector<double> random_unit(Rng& rng, std::uint32_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}
}  // namespace detail

// Normal clusters near the origin, each domain shifted by `domain_shift` along
// its own random direction; anomaly clusters at distance `separation` along a
// shared direction, shifted per domain by half the domain shift.
inline SyntheticSpec two_cluster_spec(const std::vector<std::string>& domains, std::uint32_t dim, double separation,
                                      double domain_shift, double spread, std::uint64_t seed,
                                      const std::vector<std::string>& defect_types = {}) {
  SyntheticSpec spec;
  spec.dim = dim;
  Rng rng(seed ^ 0x5eed5eedULL);
  const auto anomaly_dir = detail::random_unit(rng, dim);
  for (std::size_t k = 0; k < domains.size(); ++k) {
    DomainSpec d;
    d.name = domains[k];
    if (k < defect_types.size()) d.defect_type = defect_types[k];
    const auto shift = detail::random_unit(rng, dim);
    const auto ashift = detail::random_unit(rng, dim);
    d.normal.mean.resize(dim);
    d.anomaly.mean.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      d.normal.mean[i] = domain_shift * shift[i];
      d.anomaly.mean[i] = separation * anomaly_dir[i] + 0.5 * domain_shift * ashift[i];
    }
    d.normal.scale.assign(dim, spread);
    d.anomaly.scale.assign(dim, spread);
    spec.domains.push_back(std::move(d));
  }
  return spec;
}

inline SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticData out;
  out.manifest.dataset = spec.dataset;
  Rng rng(seed);
  const std::size_t patches = static_cast<std::size_t>(spec.grid_h) * spec.grid_w;

  for (const auto& domain : spec.domains) {
    const auto n_anom = static_cast<std::uint32_t>(std::llround(spec.images_per_domain * spec.anomaly_fraction));
    const std::uint32_t n_good = spec.images_per_domain - n_anom;
    const auto n_train = static_cast<std::uint32_t>(std::llround(n_good * spec.good_train_fraction));
    for (std::uint32_t img = 0; img < spec.images_per_domain; ++img) {
      const bool anomalous = img >= n_good;
      const bool train = img < n_train;
      const std::uint32_t local = anomalous ? img - n_good : (train ? img : img - n_train);
      const std::string defect = anomalous ? domain.defect_type : std::string(dataset::kGood);
      const std::string stem = strprintf("%03u", local);

      dataset::ImageRecord rec;
      rec.category = domain.name;
      rec.defect_type = defect;
      rec.split_role = train ? dataset::SplitRole::kTrain : dataset::SplitRole::kTest;
      rec.anomalous = anomalous;
      rec.image_path = (std::filesystem::path(spec.root) / domain.name / (train ? "train" : "test") / defect / (stem + ".png")).string();
      if (anomalous)
        rec.mask_path = (std::filesystem::path(spec.root) / domain.name / "ground_truth" / defect / (stem + "_mask.png")).string();

      embedding::PatchLabelGrid labels;
      labels.height = spec.grid_h;
      labels.width = spec.grid_w;
      labels.threshold = 0.1;
      labels.labels.assign(patches, 0);
      labels.anomalous_fraction.assign(patches, 0.0);
      if (anomalous) {
        const auto r0 = static_cast<std::uint32_t>(rng.below(spec.grid_h - spec.block_h + 1));
        const auto c0 = static_cast<std::uint32_t>(rng.below(spec.grid_w - spec.block_w + 1));
        for (std::uint32_t r = r0; r < r0 + spec.block_h; ++r)
          for (std::uint32_t c = c0; c < c0 + spec.block_w; ++c) {
            labels.labels[static_cast<std::size_t>(r) * spec.grid_w + c] = 1;
            labels.anomalous_fraction[static_cast<std::size_t>(r) * spec.grid_w + c] = 1.0;
          }
      }

      embedding::EmbeddingGrid g;
      g.height = spec.grid_h;
      g.width = spec.grid_w;
      g.dim = spec.dim;
      g.image_id = dataset::image_id(rec);
      g.meta = {spec.grid_h, spec.grid_w, "synthetic", {0}};
      g.data.resize(patches * spec.dim);
      for (std::size_t p = 0; p < patches; ++p) {
        const Cluster& c = labels.labels[p] ? domain.anomaly : domain.normal;
        for (std::uint32_t k = 0; k < spec.dim; ++k) g.data[p * spec.dim + k] = static_cast<float>(rng.normal(c.mean[k], c.scale[k]));
      }
      out.grids.push_back(std::move(g));
      out.labels.push_back(std::move(labels));
      out.manifest.records.push_back(std::move(rec));
    }
  }
  return out;
}

// Writes an MVTec-shaped tree for generated data: a grid-resolution placeholder
// PNG per image, a mask PNG (255 on anomalous patches) per anomalous image and a
// `.semb` file per image under `embeddings_dir`. Record paths must already point
// below the desired root.
inline void write_tree(const SyntheticData& data, const std::filesystem::path& embeddings_dir) {
  for (std::size_t i = 0; i < data.grids.size(); ++i) {
    const auto& rec = data.manifest.records[i];
    const auto& lab = data.labels[i];
    embedding::MaskImage img{lab.height, lab.width, std::vector<std::uint8_t>(lab.labels.size(), 128)};
    png::write_gray(img, rec.image_path);
    if (rec.mask_path) {
      embedding::MaskImage mask{lab.height, lab.width, {}};
      mask.pixels.reserve(lab.labels.size());
      for (auto l : lab.labels) mask.pixels.push_back(l ? 255 : 0);
      png::write_gray(mask, *rec.mask_path);
    }
    embedding::write_embedding_file(data.grids[i], embeddings_dir / (data.grids[i].image_id + ".semb"));
  }
}

}  // namespace dgad::synthetic

#endif  // DGAD_SYNTHETIC_HPP_
