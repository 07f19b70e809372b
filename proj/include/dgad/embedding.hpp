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

// Patch embeddings: neighborhood pooling of backbone feature maps, multi-layer
// alignment and concatenation, pixel-mask to patch-label conversion and the
// `.semb` binary container shared with the feature extractor.

#ifndef DGAD_EMBEDDING_HPP_
#define DGAD_EMBEDDING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgad/common.hpp"

namespace dgad::embedding {

// One backbone layer's output for one image, row-major [height][width][channels].
struct FeatureMap {
  int layer_id = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;
  std::string image_id;

  std::span<const float> cell(std::uint32_t row, std::uint32_t col) const {
    return {data.data() + (static_cast<std::size_t>(row) * width + col) * channels, channels};
  }

  void validate() const {
    if (height == 0 || width == 0 || channels == 0) throw ValidationError("feature map has a zero dimension");
    if (data.size() != static_cast<std::size_t>(height) * width * channels)
      throw DimensionError("feature map data length does not match height*width*channels");
    if (!all_finite(data)) throw NonFiniteError("feature map contains non-finite values");
  }
};

struct EmbeddingMeta {
  std::uint32_t source_height = 0;
  std::uint32_t source_width = 0;
  std::string backbone;
  std::vector<int> layers;

  bool operator==(const EmbeddingMeta&) const = default;
};

// H x W grid of dim-dimensional patch embeddings for one image.
struct EmbeddingGrid {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t dim = 0;
  std::vector<float> data;
  std::string image_id;
  EmbeddingMeta meta;

  std::size_t patch_count() const { return static_cast<std::size_t>(height) * width; }

  std::span<const float> patch(std::size_t index) const { return {data.data() + index * dim, dim}; }
  std::span<float> patch(std::size_t index) { return {data.data() + index * dim, dim}; }

  void validate() const {
    if (height == 0 || width == 0 || dim == 0) throw ValidationError("embedding grid has a zero dimension");
    if (data.size() != patch_count() * dim)
      throw DimensionError("embedding grid data length does not match height*width*dim");
    if (!all_finite(data)) throw NonFiniteError("embedding grid contains non-finite values");
  }

  // Bit-exact comparison of the payload.
  friend bool operator==(const EmbeddingGrid& a, const EmbeddingGrid& b) {
    return a.height == b.height && a.width == b.width && a.dim == b.dim && a.image_id == b.image_id &&
           a.meta == b.meta && a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
  }
};

struct PatchLabelGrid {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  double threshold = 0.1;
  std::vector<std::uint8_t> labels;          // 1 = anomalous patch
  std::vector<double> anomalous_fraction;    // per cell, in [0, 1]

  bool label(std::uint32_t row, std::uint32_t col) const { return labels[static_cast<std::size_t>(row) * width + col] != 0; }
  std::size_t anomalous_count() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
};

struct PoolingConfig {
  int neighborhood = 3;
  int stride = 1;

  void validate() const {
    if (neighborhood < 1 || neighborhood % 2 == 0) throw ValidationError("pooling neighborhood must be a positive odd integer");
    if (stride < 1) throw ValidationError("pooling stride must be >= 1");
  }
};

// 8-bit single channel pixel mask; nonzero = anomalous.
struct MaskImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> pixels;

  bool at(std::uint32_t row, std::uint32_t col) const { return pixels[static_cast<std::size_t>(row) * width + col] != 0; }
};

// Mean over the p x p window centered on each output cell. Windows are clipped
// at the borders and averaged over the in-bounds cells only.
inline FeatureMap neighborhood_pool(const FeatureMap& fm, const PoolingConfig& cfg) {
  fm.validate();
  cfg.validate();
  const std::int64_t h = fm.height, w = fm.width, c = fm.channels;
  const std::int64_t half = cfg.neighborhood / 2, s = cfg.stride;
  FeatureMap out;
  out.layer_id = fm.layer_id;
  out.image_id = fm.image_id;
  out.channels = fm.channels;
  out.height = static_cast<std::uint32_t>((h - 1) / s + 1);
  out.width = static_cast<std::uint32_t>((w - 1) / s + 1);
  out.data.resize(static_cast<std::size_t>(out.height) * out.width * c);
  std::vector<double> acc(static_cast<std::size_t>(c));
  for (std::int64_t oi = 0; oi < out.height; ++oi) {
    for (std::int64_t oj = 0; oj < out.width; ++oj) {
      const std::int64_t ci = oi * s, cj = oj * s;
      const std::int64_t r0 = std::max<std::int64_t>(0, ci - half), r1 = std::min(h - 1, ci + half);
      const std::int64_t c0 = std::max<std::int64_t>(0, cj - half), c1 = std::min(w - 1, cj + half);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t r = r0; r <= r1; ++r) {
        for (std::int64_t q = c0; q <= c1; ++q) {
          auto v = fm.cell(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(q));
          for (std::int64_t k = 0; k < c; ++k) acc[k] += v[k];
        }
      }
      const double n = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      float* dst = out.data.data() + (oi * out.width + oj) * c;
      for (std::int64_t k = 0; k < c; ++k) dst[k] = static_cast<float>(acc[k] / n);
    }
  }
  return out;
}

// Bilinear resize with half-pixel centers (align_corners = false), source
// coordinates clamped to the valid range.
inline FeatureMap resize_bilinear(const FeatureMap& fm, std::uint32_t height, std::uint32_t width) {
  if (fm.height == height && fm.width == width) return fm;
  FeatureMap out;
  out.layer_id = fm.layer_id;
  out.image_id = fm.image_id;
  out.channels = fm.channels;
  out.height = height;
  out.width = width;
  out.data.resize(static_cast<std::size_t>(height) * width * fm.channels);
  const double sy = static_cast<double>(fm.height) / height;
  const double sx = static_cast<double>(fm.width) / width;
  auto source = [](double dst, double scale, std::uint32_t n, std::uint32_t& i0, std::uint32_t& i1, double& frac) {
    double src = (dst + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<std::uint32_t>(std::floor(src));
    i1 = std::min(i0 + 1, n - 1);
    frac = src - i0;
  };
  for (std::uint32_t i = 0; i < height; ++i) {
    std::uint32_t y0, y1;
    double fy;
    source(i, sy, fm.height, y0, y1, fy);
    for (std::uint32_t j = 0; j < width; ++j) {
      std::uint32_t x0, x1;
      double fx;
      source(j, sx, fm.width, x0, x1, fx);
      auto a = fm.cell(y0, x0), b = fm.cell(y0, x1), c = fm.cell(y1, x0), d = fm.cell(y1, x1);
      float* dst = out.data.data() + (static_cast<std::size_t>(i) * width + j) * fm.channels;
      for (std::uint32_t k = 0; k < fm.channels; ++k) {
        const double top = a[k] + (static_cast<double>(b[k]) - a[k]) * fx;
        const double bottom = c[k] + (static_cast<double>(d[k]) - c[k]) * fx;
        dst[k] = static_cast<float>(top + (bottom - top) * fy);
      }
    }
  }
  return out;
}

// Resamples every map onto the grid of the shallowest layer and concatenates
// channels in ascending layer order.
inline EmbeddingGrid align_and_concat(std::vector<FeatureMap> maps) {
  if (maps.empty()) throw ValidationError("align_and_concat: no feature maps");
  for (const auto& m : maps) {
    m.validate();
    if (m.image_id != maps.front().image_id)
      throw ValidationError("align_and_concat: maps come from different images ('" + maps.front().image_id + "' vs '" +
                            m.image_id + "')");
  }
  std::stable_sort(maps.begin(), maps.end(), [](const FeatureMap& a, const FeatureMap& b) { return a.layer_id < b.layer_id; });

  EmbeddingGrid grid;
  grid.height = maps.front().height;
  grid.width = maps.front().width;
  grid.image_id = maps.front().image_id;
  for (const auto& m : maps) {
    grid.dim += m.channels;
    grid.meta.layers.push_back(m.layer_id);
  }
  grid.data.resize(grid.patch_count() * grid.dim);
  std::uint32_t offset = 0;
  for (const auto& m : maps) {
    const FeatureMap aligned = resize_bilinear(m, grid.height, grid.width);
    for (std::size_t p = 0; p < grid.patch_count(); ++p) {
      std::copy_n(aligned.data.data() + p * m.channels, m.channels, grid.data.data() + p * grid.dim + offset);
    }
    offset += m.channels;
  }
  return grid;
}

// Views a grid as a single feature map (e.g. to pool a pre-concatenated grid).
inline FeatureMap as_feature_map(const EmbeddingGrid& g, int layer_id = 0) {
  return FeatureMap{layer_id, g.height, g.width, g.dim, g.data, g.image_id};
}

namespace detail {
// Cell edge k of n cells over `extent` pixels: round(k * extent / n), halves up.
inline std::uint32_t cell_edge(std::uint32_t k, std::uint32_t extent, std::uint32_t n) {
  return static_cast<std::uint32_t>((2ull * k * extent + n) / (2ull * n));
}
}  // namespace detail

// Partitions the mask into grid_h x grid_w rectangles and marks each cell whose
// anomalous pixel share reaches `threshold`.
inline PatchLabelGrid mask_to_patch_labels(const MaskImage& mask, std::uint32_t grid_h, std::uint32_t grid_w,
                                           double threshold = 0.1) {
  if (mask.height == 0 || mask.width == 0 || mask.pixels.empty()) throw ValidationError("mask is empty");
  if (mask.pixels.size() != static_cast<std::size_t>(mask.height) * mask.width)
    throw DimensionError("mask pixel count does not match its dimensions");
  if (grid_h == 0 || grid_w == 0) throw ValidationError("patch grid dimensions must be positive");
  if (grid_h > mask.height || grid_w > mask.width)
    throw ValidationError("patch grid is finer than the mask resolution");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("patch label threshold must be in (0, 1]");

  PatchLabelGrid out;
  out.height = grid_h;
  out.width = grid_w;
  out.threshold = threshold;
  out.labels.assign(static_cast<std::size_t>(grid_h) * grid_w, 0);
  out.anomalous_fraction.assign(out.labels.size(), 0.0);
  for (std::uint32_t gi = 0; gi < grid_h; ++gi) {
    const std::uint32_t r0 = detail::cell_edge(gi, mask.height, grid_h), r1 = detail::cell_edge(gi + 1, mask.height, grid_h);
    for (std::uint32_t gj = 0; gj < grid_w; ++gj) {
      const std::uint32_t c0 = detail::cell_edge(gj, mask.width, grid_w), c1 = detail::cell_edge(gj + 1, mask.width, grid_w);
      std::uint64_t hits = 0;
      for (std::uint32_t r = r0; r < r1; ++r)
        for (std::uint32_t c = c0; c < c1; ++c) hits += mask.at(r, c) ? 1 : 0;
      const double area = static_cast<double>(r1 - r0) * (c1 - c0);
      const std::size_t idx = static_cast<std::size_t>(gi) * grid_w + gj;
      out.anomalous_fraction[idx] = static_cast<double>(hits) / area;
      out.labels[idx] = out.anomalous_fraction[idx] >= threshold ? 1 : 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// `.semb` container: "SEMB", u32 version, u32 H, u32 W, u32 C, u32 meta length,
// JSON metadata, then H*W*C little-endian f32 values.

inline constexpr std::string_view kSembMagic = "SEMB";
inline constexpr std::uint32_t kSembVersion = 1;

inline std::string encode_embedding(const EmbeddingGrid& grid) {
  grid.validate();
  nlohmann::json meta = {{"image_id", grid.image_id},
                         {"backbone", grid.meta.backbone},
                         {"layers", grid.meta.layers},
                         {"source_size", {grid.meta.source_height, grid.meta.source_width}}};
  const std::string blob = meta.dump();
  io::Writer w;
  w.bytes(kSembMagic);
  w.put<std::uint32_t>(kSembVersion);
  w.put<std::uint32_t>(grid.height);
  w.put<std::uint32_t>(grid.width);
  w.put<std::uint32_t>(grid.dim);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blob.size()));
  w.bytes(blob);
  w.floats(grid.data);
  return w.data();
}

inline EmbeddingGrid decode_embedding(std::string bytes) {
  io::Reader r(std::move(bytes));
  if (r.remaining() < kSembMagic.size() || r.bytes(kSembMagic.size()) != kSembMagic)
    throw FormatError("not an embedding file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kSembVersion) throw VersionError("unsupported embedding file version " + std::to_string(version));
  EmbeddingGrid g;
  g.height = r.get<std::uint32_t>();
  g.width = r.get<std::uint32_t>();
  g.dim = r.get<std::uint32_t>();
  const auto meta_len = r.get<std::uint32_t>();
  const auto blob = r.bytes(meta_len);
  try {
    const auto meta = nlohmann::json::parse(blob);
    g.image_id = meta.at("image_id").get<std::string>();
    g.meta.backbone = meta.value("backbone", std::string{});
    g.meta.layers = meta.value("layers", std::vector<int>{});
    if (meta.contains("source_size")) {
      g.meta.source_height = meta["source_size"].at(0).get<std::uint32_t>();
      g.meta.source_width = meta["source_size"].at(1).get<std::uint32_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("embedding metadata is not valid: ") + e.what());
  }
  g.data = r.floats(static_cast<std::uint64_t>(g.height) * g.width * g.dim);
  if (!all_finite(g.data)) throw NonFiniteError("embedding payload contains non-finite values");
  g.validate();
  return g;
}

inline void write_embedding_file(const EmbeddingGrid& grid, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_embedding(grid));
}

inline EmbeddingGrid read_embedding_file(const std::filesystem::path& path) {
  return decode_embedding(io::read_file(path));
}

}  // namespace dgad::embedding

#endif  // DGAD_EMBEDDING_HPP_
