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

// Memory banks: greedy k-center coreset selection (offline, per-image online and
// batch-wise online), the random projection used inside selection, exact
// nearest-neighbour search and the `.cset` bank file.

#ifndef DGAD_CORESET_HPP_
#define DGAD_CORESET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgad/common.hpp"
#include "dgad/embedding.hpp"
#include "dgad/random.hpp"

namespace dgad::coreset {

// A contiguous list of dim-dimensional float vectors.
class VectorSet {
 public:
  VectorSet() = default;
  explicit VectorSet(std::uint32_t dim) : dim_(dim) {}
  VectorSet(std::uint32_t dim, std::vector<float> data) : dim_(dim), data_(std::move(data)) {
    if (dim_ == 0 || data_.size() % dim_ != 0) throw DimensionError("vector data is not a multiple of dim");
  }

  static VectorSet from_grid(const embedding::EmbeddingGrid& g) { return VectorSet(g.dim, g.data); }

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return dim_ ? data_.size() / dim_ : 0; }
  bool empty() const { return data_.empty(); }
  std::span<const float> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }

  void push_back(std::span<const float> v) {
    if (dim_ == 0) dim_ = static_cast<std::uint32_t>(v.size());
    if (v.size() != dim_) throw DimensionError("vector has length " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
    data_.insert(data_.end(), v.begin(), v.end());
  }
  void append(const VectorSet& other) {
    if (other.empty()) return;
    if (dim_ == 0) dim_ = other.dim_;
    if (other.dim_ != dim_) throw DimensionError("vector sets differ in dimension");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
  }

  friend bool operator==(const VectorSet&, const VectorSet&) = default;

 private:
  std::uint32_t dim_ = 0;
  std::vector<float> data_;
};

// Linear map used only to compare candidates during selection.
struct Projection {
  std::uint32_t in_dim = 0;
  std::uint32_t out_dim = 0;
  std::uint64_t seed = 0;
  bool identity = false;
  std::vector<double> matrix;  // [out_dim][in_dim]; empty when identity

  static Projection make_identity(std::uint32_t dim) { return {dim, dim, 0, true, {}}; }

  void apply(std::span<const float> x, std::span<double> out) const {
    if (identity) {
      std::copy(x.begin(), x.end(), out.begin());
      return;
    }
    for (std::uint32_t o = 0; o < out_dim; ++o) {
      const double* row = matrix.data() + static_cast<std::size_t>(o) * in_dim;
      double acc = 0.0;
      for (std::uint32_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
      out[o] = acc;
    }
  }

  friend bool operator==(const Projection&, const Projection&) = default;
};

// Gaussian random projection, entries i.i.d. N(0, 1/out_dim).
inline Projection make_projection(std::uint32_t in_dim, std::uint32_t out_dim, std::uint64_t seed) {
  if (in_dim == 0 || out_dim == 0) throw ValidationError("projection dimensions must be positive");
  if (out_dim > in_dim) throw ValidationError("projection output dimension exceeds input dimension");
  Projection p{in_dim, out_dim, seed, false, {}};
  p.matrix.resize(static_cast<std::size_t>(in_dim) * out_dim);
  Rng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (auto& m : p.matrix) m = rng.normal(0.0, stddev);
  return p;
}

enum class Variant { kOffline, kOnline, kBatch };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kOffline: return "offline";
    case Variant::kOnline: return "online";
    case Variant::kBatch: return "batch";
  }
  return "offline";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "offline") return Variant::kOffline;
  if (s == "online") return Variant::kOnline;
  if (s == "batch") return Variant::kBatch;
  throw ValidationError("unknown coreset variant '" + std::string(s) + "'");
}

struct BuildParams {
  double ratio = 1.0;
  std::uint64_t projection_seed = 0;
  std::uint32_t projection_dim = 0;  // 0 = identity
  Variant variant = Variant::kOffline;
  std::uint32_t floor = 0;
  std::uint32_t batch_size = 1;

  bool operator==(const BuildParams&) const = default;
};

// A labelled coreset. Entries are stored in the original (unprojected) space.
struct MemoryBank {
  Label label = Label::kNormal;
  VectorSet entries;
  BuildParams params;

  std::uint32_t dim() const { return entries.dim(); }
  std::size_t count() const { return entries.size(); }
  std::span<const float> entry(std::size_t i) const { return entries[i]; }

  bool operator==(const MemoryBank&) const = default;
};

struct NnResult {
  std::size_t index = 0;
  double distance = 0.0;

  bool operator==(const NnResult&) const = default;
};

// ceil(n * r), clamped to [1, n] for n >= 1. A relative slack absorbs products
// like 10 * 0.3 landing just above an integer.
inline std::size_t selection_count(std::size_t n, double r) {
  if (n == 0) return 0;
  const double exact = static_cast<double>(n) * r;
  auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::clamp<std::size_t>(k, 1, n);
}

inline void check_ratio(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw ValidationError("coreset ratio must be in (0, 1]");
}

namespace detail {

inline std::vector<double> project_all(const VectorSet& v, const Projection& psi) {
  if (!v.empty() && v.dim() != psi.in_dim) throw DimensionError("projection input dimension does not match vectors");
  std::vector<double> out(v.size() * psi.out_dim);
  for (std::size_t i = 0; i < v.size(); ++i) psi.apply(v[i], {out.data() + i * psi.out_dim, psi.out_dim});
  return out;
}

inline double squared_distance(const double* a, const double* b, std::uint32_t n) {
  double acc = 0.0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Greedy max-min selection over `candidates` against an existing selected set.
// Holds, for each candidate, the squared projected distance to the nearest
// selected point (+inf while nothing is selected).
class GreedySelector {
 public:
  GreedySelector(const VectorSet& candidates, const Projection& psi, std::span<const double> projected_selected)
      : psi_(psi), projected_(project_all(candidates, psi)), taken_(candidates.size(), 0) {
    const std::uint32_t d = psi.out_dim;
    min_dist_.assign(candidates.size(), std::numeric_limits<double>::infinity());
    const std::size_t existing = projected_selected.size() / d;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double* p = projected_.data() + i * d;
      double best = min_dist_[i];
      for (std::size_t s = 0; s < existing; ++s) best = std::min(best, squared_distance(p, projected_selected.data() + s * d, d));
      min_dist_[i] = best;
    }
  }

  std::size_t remaining() const { return remaining_; }

  // Unselected candidate with the largest min-distance; ties to lowest index.
  std::size_t next() const {
    std::size_t best = taken_.size();
    double best_val = -1.0;
    for (std::size_t i = 0; i < taken_.size(); ++i) {
      if (!taken_[i] && min_dist_[i] > best_val) {
        best_val = min_dist_[i];
        best = i;
      }
    }
    return best;
  }

  void take(std::size_t idx) {
    taken_[idx] = 1;
    --remaining_;
    const std::uint32_t d = psi_.out_dim;
    const double* p = projected_.data() + idx * d;
    for (std::size_t i = 0; i < taken_.size(); ++i) {
      if (taken_[i]) continue;
      const double dist = squared_distance(projected_.data() + i * d, p, d);
      if (dist < min_dist_[i]) min_dist_[i] = dist;
    }
  }

  // Current covering radius (max over unselected of the min projected distance).
  double covering_radius() const {
    double r = 0.0;
    for (std::size_t i = 0; i < taken_.size(); ++i)
      if (!taken_[i]) r = std::max(r, min_dist_[i]);
    return std::sqrt(r);
  }

  std::span<const double> projected(std::size_t idx) const { return {projected_.data() + idx * psi_.out_dim, psi_.out_dim}; }
  bool taken(std::size_t idx) const { return taken_[idx] != 0; }

 private:
  const Projection& psi_;
  std::vector<double> projected_;
  std::vector<std::uint8_t> taken_;
  std::vector<double> min_dist_;
  std::size_t remaining_ = taken_.size();
};

inline void check_input(const VectorSet& v, const Projection& psi) {
  if (!all_finite(v.data())) throw NonFiniteError("embeddings contain non-finite values");
  if (!v.empty() && v.dim() != psi.in_dim) throw DimensionError("embedding dimension does not match the projection");
}

}  // namespace detail

// Incremental bank builder. Keeps the projected bank so that successive
// images do not re-project existing entries.
class OnlineBuilder {
 public:
  OnlineBuilder(MemoryBank bank, Projection psi) : bank_(std::move(bank)), psi_(std::move(psi)) {
    if (bank_.count() > 0) {
      if (bank_.dim() != psi_.in_dim) throw DimensionError("bank dimension does not match the projection");
      projected_ = detail::project_all(bank_.entries, psi_);
    }
  }

  // Adds ceil(|m| * r) vectors of `m`, each the farthest (in projected space)
  // from the current bank. Returns the chosen indices into `m` in order.
  std::vector<std::size_t> add(const VectorSet& m, double r) {
    check_ratio(r);
    if (m.empty()) return {};
    detail::check_input(m, psi_);
    if (bank_.count() > 0 && m.dim() != bank_.dim()) throw DimensionError("embedding dimension does not match the bank");
    return select(m, selection_count(m.size(), r));
  }

  // Continues selection from `m` until the bank holds `target` entries or `m`
  // is exhausted. Entries of `m` already present in the bank (by value, with
  // multiplicity) count as selected.
  std::vector<std::size_t> top_up(const VectorSet& m, std::size_t target) {
    if (m.empty() || bank_.count() >= target) return {};
    detail::check_input(m, psi_);
    std::map<std::vector<float>, std::size_t> present;
    for (std::size_t i = 0; i < bank_.count(); ++i) {
      auto e = bank_.entry(i);
      ++present[std::vector<float>(e.begin(), e.end())];
    }
    VectorSet rest(m.dim());
    std::vector<std::size_t> rest_index;
    for (std::size_t i = 0; i < m.size(); ++i) {
      auto it = present.find(std::vector<float>(m[i].begin(), m[i].end()));
      if (it != present.end() && it->second > 0) {
        --it->second;
        continue;
      }
      rest.push_back(m[i]);
      rest_index.push_back(i);
    }
    auto picked = select(rest, std::min(rest.size(), target - bank_.count()));
    for (auto& p : picked) p = rest_index[p];
    return picked;
  }

  const MemoryBank& bank() const { return bank_; }
  MemoryBank release() { return std::move(bank_); }

 private:
  std::vector<std::size_t> select(const VectorSet& m, std::size_t k) {
    detail::GreedySelector sel(m, psi_, projected_);
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (std::size_t i = 0; i < k && sel.remaining() > 0; ++i) {
      const std::size_t idx = sel.next();
      sel.take(idx);
      bank_.entries.push_back(m[idx]);
      auto proj = sel.projected(idx);
      projected_.insert(projected_.end(), proj.begin(), proj.end());
      picked.push_back(idx);
    }
    return picked;
  }

  MemoryBank bank_;
  Projection psi_;
  std::vector<double> projected_;
};

inline BuildParams params_for(const Projection& psi, double r, Variant variant, std::uint32_t batch = 1) {
  BuildParams p;
  p.ratio = r;
  p.projection_seed = psi.seed;
  p.projection_dim = psi.identity ? 0 : psi.out_dim;
  p.variant = variant;
  p.batch_size = batch;
  return p;
}

// Offline greedy coreset over all embeddings: ceil(N*r) picks, first pick = `start`.
inline MemoryBank greedy_offline(const VectorSet& embeddings, double r, const Projection& psi, std::size_t start = 0,
                                 Label label = Label::kNormal) {
  if (embeddings.empty()) throw ValidationError("greedy_offline: no embeddings");
  check_ratio(r);
  if (start >= embeddings.size()) throw ValidationError("greedy_offline: start index out of range");
  detail::check_input(embeddings, psi);

  MemoryBank bank;
  bank.label = label;
  bank.params = params_for(psi, r, Variant::kOffline);
  bank.entries = VectorSet(embeddings.dim());
  const std::size_t k = selection_count(embeddings.size(), r);
  detail::GreedySelector sel(embeddings, psi, {});
  std::size_t idx = start;
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0) idx = sel.next();
    sel.take(idx);
    bank.entries.push_back(embeddings[idx]);
  }
  return bank;
}

// One image's embeddings added to the bank against its current contents.
inline MemoryBank online_update(MemoryBank bank, const VectorSet& grid_embeddings, double r, const Projection& psi) {
  if (bank.count() == 0) bank.params = params_for(psi, r, Variant::kOnline);
  OnlineBuilder builder(std::move(bank), psi);
  builder.add(grid_embeddings, r);
  return builder.release();
}

// Several images pooled into one candidate set, then selected as in online_update.
inline MemoryBank batch_update(MemoryBank bank, const std::vector<VectorSet>& batch, double r, const Projection& psi) {
  check_ratio(r);
  VectorSet pooled;
  for (const auto& g : batch) pooled.append(g);
  if (pooled.empty()) return bank;
  if (bank.count() == 0) bank.params = params_for(psi, r, Variant::kBatch, static_cast<std::uint32_t>(batch.size()));
  OnlineBuilder builder(std::move(bank), psi);
  builder.add(pooled, r);
  return builder.release();
}

// Grows the bank by continued greedy selection over `all_candidates` until it
// holds min(floor, |all_candidates|) entries.
inline MemoryBank enforce_floor(MemoryBank bank, std::size_t floor, const VectorSet& all_candidates, const Projection& psi) {
  bank.params.floor = static_cast<std::uint32_t>(floor);
  const std::size_t target = std::min(floor, all_candidates.size());
  if (bank.count() >= target) return bank;
  if (bank.count() == 0) bank.entries = VectorSet(all_candidates.dim());
  OnlineBuilder builder(std::move(bank), psi);
  builder.top_up(all_candidates, target);
  return builder.release();
}

// Exact k nearest entries by Euclidean distance in the original space,
// ascending, ties broken by lowest index.
inline std::vector<NnResult> nn_query(const MemoryBank& bank, std::span<const float> query, std::size_t k) {
  if (bank.count() == 0) throw ValidationError("nn_query: empty bank");
  if (k < 1 || k > bank.count()) throw ValidationError("nn_query: k out of range");
  if (query.size() != bank.dim()) throw DimensionError("nn_query: query dimension does not match the bank");
  const std::size_t n = bank.count();
  std::vector<NnResult> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = {i, l2(query, bank.entry(i))};
  auto less = [](const NnResult& a, const NnResult& b) { return a.distance < b.distance || (a.distance == b.distance && a.index < b.index); };
  if (k == 1) return {*std::min_element(all.begin(), all.end(), less)};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
  all.resize(k);
  return all;
}

// ---------------------------------------------------------------------------
// `.cset`: "CSET", u32 version, u8 label, u32 count, u32 dim, u32 params length,
// JSON params, then count*dim little-endian f32.

inline constexpr std::string_view kCsetMagic = "CSET";
inline constexpr std::uint32_t kCsetVersion = 1;

inline std::string encode_bank(const MemoryBank& bank) {
  if (bank.count() == 0) throw ValidationError("refusing to save an empty bank");
  const nlohmann::json params = {{"r", bank.params.ratio},
                                 {"seed", bank.params.projection_seed},
                                 {"proj_dim", bank.params.projection_dim},
                                 {"variant", to_string(bank.params.variant)},
                                 {"floor", bank.params.floor},
                                 {"b", bank.params.batch_size}};
  const std::string blob = params.dump();
  io::Writer w;
  w.bytes(kCsetMagic);
  w.put<std::uint32_t>(kCsetVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(bank.label));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(bank.count()));
  w.put<std::uint32_t>(bank.dim());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(blob.size()));
  w.bytes(blob);
  w.floats(bank.entries.data());
  return w.data();
}

inline MemoryBank decode_bank(std::string bytes, std::uint32_t expected_dim = 0) {
  io::Reader r(std::move(bytes));
  if (r.remaining() < kCsetMagic.size() || r.bytes(kCsetMagic.size()) != kCsetMagic)
    throw FormatError("not a bank file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kCsetVersion) throw VersionError("unsupported bank file version " + std::to_string(version));
  const auto label = r.get<std::uint8_t>();
  if (label > 1) throw FormatError("bank label byte must be 0 or 1");
  const auto count = r.get<std::uint32_t>();
  const auto dim = r.get<std::uint32_t>();
  if (dim == 0 || (expected_dim != 0 && dim != expected_dim))
    throw DimensionError("bank dimension " + std::to_string(dim) + " does not match expected " + std::to_string(expected_dim));
  if (count == 0) throw FormatError("bank file declares zero entries");
  const auto blob = r.bytes(r.get<std::uint32_t>());
  MemoryBank bank;
  bank.label = static_cast<Label>(label);
  try {
    const auto p = nlohmann::json::parse(blob);
    bank.params.ratio = p.at("r").get<double>();
    bank.params.projection_seed = p.at("seed").get<std::uint64_t>();
    bank.params.projection_dim = p.value("proj_dim", 0u);
    bank.params.variant = parse_variant(p.at("variant").get<std::string>());
    bank.params.floor = p.value("floor", 0u);
    bank.params.batch_size = p.value("b", 1u);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bank parameters are not valid: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  auto data = r.floats(static_cast<std::uint64_t>(count) * dim);
  if (r.remaining() != 0) throw TruncationError("bank payload size does not match its declared count");
  if (!all_finite(data)) throw NonFiniteError("bank contains non-finite values");
  bank.entries = VectorSet(dim, std::move(data));
  return bank;
}

inline void save_bank(const MemoryBank& bank, const std::filesystem::path& path) { io::write_file_atomic(path, encode_bank(bank)); }

inline MemoryBank load_bank(const std::filesystem::path& path, std::uint32_t expected_dim = 0) {
  return decode_bank(io::read_file(path), expected_dim);
}

}  // namespace dgad::coreset

#endif  // DGAD_CORESET_HPP_
