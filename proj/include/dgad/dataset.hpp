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

// MVTec AD ingestion, regrouping into the hole / cut / color datasets,
// leave-one-domain-out splits and the JSON Lines manifest.

#ifndef DGAD_DATASET_HPP_
#define DGAD_DATASET_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dgad/common.hpp"
#include "dgad/random.hpp"

namespace dgad::dataset {

namespace fs = std::filesystem;

inline constexpr std::array<std::string_view, 15> kMvtecCategories = {
    "bottle", "cable", "capsule", "carpet", "grid", "hazelnut", "leather", "metal_nut",
    "pill", "screw", "tile", "toothbrush", "transistor", "wood", "zipper"};

inline constexpr std::string_view kGood = "good";

enum class SplitRole { kTrain, kVal, kTest, kExcluded };

inline std::string_view to_string(SplitRole r) {
  switch (r) {
    case SplitRole::kTrain: return "train";
    case SplitRole::kVal: return "val";
    case SplitRole::kTest: return "test";
    case SplitRole::kExcluded: return "excluded";
  }
  return "train";
}

inline SplitRole parse_split_role(std::string_view s) {
  if (s == "train") return SplitRole::kTrain;
  if (s == "val") return SplitRole::kVal;
  if (s == "test") return SplitRole::kTest;
  if (s == "excluded") return SplitRole::kExcluded;
  throw ValidationError("unknown split role '" + std::string(s) + "'");
}

struct ImageRecord {
  std::string image_path;
  std::optional<std::string> mask_path;
  std::string category;
  std::string defect_type;
  SplitRole split_role = SplitRole::kTrain;
  bool anomalous = false;

  bool operator==(const ImageRecord&) const = default;

  void validate() const {
    const bool defect = defect_type != kGood;
    if (defect != anomalous || anomalous != mask_path.has_value())
      throw ValidationError("record " + image_path + ": label, defect type and mask disagree");
  }
};

// Stable identifier used to name embedding files: the last four path
// components (category, split, defect, stem) joined by '_'.
inline std::string image_id(const ImageRecord& r) {
  const fs::path p(r.image_path);
  std::vector<std::string> parts;
  for (const auto& c : p) parts.push_back(c.string());
  std::vector<std::string> tail;
  if (!parts.empty()) tail.push_back(fs::path(parts.back()).stem().string());
  for (std::size_t k = 2; k <= 4 && k <= parts.size(); ++k) tail.push_back(parts[parts.size() - k]);
  std::string id;
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
    if (it->empty() || *it == "/") continue;
    if (!id.empty()) id += '_';
    id += *it;
  }
  return id;
}

struct DatasetManifest {
  std::string dataset;
  std::optional<std::string> target_domain;
  std::optional<std::uint64_t> seed;
  std::vector<ImageRecord> records;

  bool operator==(const DatasetManifest&) const = default;

  std::vector<std::string> categories() const {
    std::set<std::string> s;
    for (const auto& r : records) s.insert(r.category);
    return {s.begin(), s.end()};
  }
};

// ---------------------------------------------------------------------------
// Scanning

// Walks <root>/<category>/{train,test}/<defect>/*.png and pairs each defect
// image with <root>/<category>/ground_truth/<defect>/<stem>_mask.png.
inline std::vector<ImageRecord> scan_mvtec(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("MVTec root " + root.string() + " is not a directory");
  std::vector<ImageRecord> out;
  std::vector<std::string> missing;
  for (const auto& cat_entry : fs::directory_iterator(root)) {
    if (!cat_entry.is_directory()) continue;
    const std::string category = cat_entry.path().filename().string();
    for (const char* split : {"train", "test"}) {
      const fs::path split_dir = cat_entry.path() / split;
      if (!fs::is_directory(split_dir)) continue;
      for (const auto& defect_entry : fs::directory_iterator(split_dir)) {
        if (!defect_entry.is_directory()) continue;
        const std::string defect = defect_entry.path().filename().string();
        for (const auto& img : fs::directory_iterator(defect_entry.path())) {
          if (!img.is_regular_file() || img.path().extension() != ".png") continue;
          ImageRecord r;
          r.image_path = img.path().string();
          r.category = category;
          r.defect_type = defect;
          r.split_role = split == std::string_view("train") ? SplitRole::kTrain : SplitRole::kTest;
          r.anomalous = defect != kGood;
          if (r.anomalous) {
            const fs::path mask = cat_entry.path() / "ground_truth" / defect / (img.path().stem().string() + "_mask.png");
            if (!fs::is_regular_file(mask)) {
              missing.push_back(img.path().string());
              continue;
            }
            r.mask_path = mask.string();
          }
          out.push_back(std::move(r));
        }
      }
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string msg = "missing ground-truth mask for:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw IoError(msg);
  }
  std::sort(out.begin(), out.end(), [](const ImageRecord& a, const ImageRecord& b) { return a.image_path < b.image_path; });
  return out;
}

// ---------------------------------------------------------------------------
// Regrouping

struct RegroupSpec {
  std::string name;
  std::vector<std::pair<std::string, std::string>> rows;  // (category, anomaly type)

  std::set<std::string> categories() const {
    std::set<std::string> s;
    for (const auto& [c, t] : rows) s.insert(c);
    return s;
  }
};

// The three regrouped datasets: similar-looking anomaly types merged across categories.
inline RegroupSpec regroup_spec(std::string_view name) {
  if (name == "hole")
    return {"hole", {{"cable", "poke_insulation"}, {"carpet", "hole"}, {"hazelnut", "hole"}, {"leather", "poke"}, {"wood", "hole"}}};
  if (name == "cut")
    return {"cut",
            {{"cable", "cut_inner_insulation"},
             {"cable", "cut_outer_insulation"},
             {"carpet", "cut"},
             {"hazelnut", "cut"},
             {"leather", "cut"},
             {"tile", "crack"}}};
  if (name == "color")
    return {"color",
            {{"carpet", "color"},
             {"hazelnut", "print"},
             {"leather", "color"},
             {"metal_nut", "color"},
             {"pill", "color"},
             {"tile", "gray_stroke"},
             {"tile", "oil"},
             {"wood", "color"}}};
  throw ValidationError("unknown dataset '" + std::string(name) + "' (expected hole, cut or color)");
}

// All good images of the listed categories plus only the listed anomaly types.
inline DatasetManifest regroup(const std::vector<ImageRecord>& records, const RegroupSpec& spec) {
  DatasetManifest m;
  m.dataset = spec.name;
  const std::set<std::pair<std::string, std::string>> wanted(spec.rows.begin(), spec.rows.end());
  for (const auto& row : spec.rows) {
    const bool found = std::any_of(records.begin(), records.end(), [&](const ImageRecord& r) {
      return r.category == row.first && r.defect_type == row.second;
    });
    if (!found) throw ValidationError("regroup: no images for category '" + row.first + "' anomaly type '" + row.second + "'");
  }
  const auto cats = spec.categories();
  for (const auto& r : records) {
    if (!cats.count(r.category)) continue;
    if (r.defect_type == kGood || wanted.count({r.category, r.defect_type})) m.records.push_back(r);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Leave-one-domain-out split

struct SplitConfig {
  std::string target_domain;
  std::uint64_t seed = 0;
};

// Source anomalies: per domain, seeded shuffle then half to train (the extra
// one on odd counts) and half to val. Target anomalies and target good test
// images: test. Source good: original train -> train, original test -> val.
// Target good train images are excluded.
inline DatasetManifest make_split(const DatasetManifest& manifest, const SplitConfig& cfg) {
  if (manifest.target_domain) throw ValidationError("manifest is already split (target '" + *manifest.target_domain + "')");
  const auto cats = manifest.categories();
  if (!std::binary_search(cats.begin(), cats.end(), cfg.target_domain))
    throw ValidationError("target domain '" + cfg.target_domain + "' is not part of dataset '" + manifest.dataset + "'");
  DatasetManifest out = manifest;
  out.target_domain = cfg.target_domain;
  out.seed = cfg.seed;

  std::map<std::string, std::vector<std::size_t>> source_anomalies;
  std::size_t target_anomalies = 0;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    auto& r = out.records[i];
    r.validate();
    if (r.split_role != SplitRole::kTrain && r.split_role != SplitRole::kTest)
      throw ValidationError("record " + r.image_path + " has split role '" + std::string(to_string(r.split_role)) +
                            "'; expected the original train/test split");
    const bool target = r.category == cfg.target_domain;
    if (r.anomalous) {
      if (target) {
        r.split_role = SplitRole::kTest;
        ++target_anomalies;
      } else {
        source_anomalies[r.category].push_back(i);
      }
    } else if (target) {
      r.split_role = r.split_role == SplitRole::kTest ? SplitRole::kTest : SplitRole::kExcluded;
    } else {
      r.split_role = r.split_role == SplitRole::kTrain ? SplitRole::kTrain : SplitRole::kVal;
    }
  }
  if (target_anomalies == 0) throw ValidationError("target domain '" + cfg.target_domain + "' has no anomalous images");

  Rng rng(cfg.seed);
  for (auto& [domain, idx] : source_anomalies) {
    rng.shuffle(idx);
    const std::size_t n_train = (idx.size() + 1) / 2;
    for (std::size_t k = 0; k < idx.size(); ++k) out.records[idx[k]].split_role = k < n_train ? SplitRole::kTrain : SplitRole::kVal;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON Lines manifest

inline std::string render_manifest(const DatasetManifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    nlohmann::ordered_json j;
    j["image_path"] = r.image_path;
    j["mask_path"] = r.mask_path ? nlohmann::ordered_json(*r.mask_path) : nlohmann::ordered_json(nullptr);
    j["category"] = r.category;
    j["defect_type"] = r.defect_type;
    j["split_role"] = to_string(r.split_role);
    j["label"] = r.anomalous ? "anomalous" : "normal";
    j["dataset"] = m.dataset;
    j["target_domain"] = m.target_domain ? nlohmann::ordered_json(*m.target_domain) : nlohmann::ordered_json(nullptr);
    j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ImageRecord r;
      r.image_path = j.at("image_path").get<std::string>();
      if (!j.at("mask_path").is_null()) r.mask_path = j.at("mask_path").get<std::string>();
      r.category = j.at("category").get<std::string>();
      r.defect_type = j.at("defect_type").get<std::string>();
      r.split_role = parse_split_role(j.at("split_role").get<std::string>());
      const auto label = j.at("label").get<std::string>();
      if (label != "normal" && label != "anomalous") throw ParseError("label must be 'normal' or 'anomalous'", n);
      r.anomalous = label == "anomalous";
      r.validate();
      const auto dataset = j.at("dataset").get<std::string>();
      std::optional<std::string> target;
      if (!j.at("target_domain").is_null()) target = j.at("target_domain").get<std::string>();
      std::optional<std::uint64_t> seed;
      if (!j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
      if (first) {
        m.dataset = dataset;
        m.target_domain = target;
        m.seed = seed;
        first = false;
      } else if (dataset != m.dataset || target != m.target_domain || seed != m.seed) {
        throw ParseError("dataset / target_domain / seed differ from earlier lines", n);
      }
      m.records.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed manifest record: ") + e.what(), n);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return m;
}

inline void write_manifest(const DatasetManifest& m, const fs::path& path) { io::write_file_atomic(path, render_manifest(m)); }
inline DatasetManifest read_manifest(const fs::path& path) { return parse_manifest(io::read_file(path)); }

// Copies the manifest's images (and masks) into an MVTec-style tree under
// `out` using each record's split role as the split directory; excluded
// records are skipped. Returns the manifest rewritten to the copied paths.
inline DatasetManifest materialize(const DatasetManifest& m, const fs::path& out) {
  DatasetManifest copy = m;
  copy.records.clear();
  for (const auto& r : m.records) {
    if (r.split_role == SplitRole::kExcluded) continue;
    ImageRecord c = r;
    const fs::path src(r.image_path);
    const fs::path dst = out / r.category / std::string(to_string(r.split_role)) / r.defect_type / src.filename();
    fs::create_directories(dst.parent_path());
    fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    c.image_path = dst.string();
    if (r.mask_path) {
      const fs::path msrc(*r.mask_path);
      const fs::path mdst = out / r.category / "ground_truth" / r.defect_type / msrc.filename();
      fs::create_directories(mdst.parent_path());
      fs::copy_file(msrc, mdst, fs::copy_options::overwrite_existing);
      c.mask_path = mdst.string();
    }
    copy.records.push_back(std::move(c));
  }
  write_manifest(copy, out / "manifest.jsonl");
  return copy;
}

}  // namespace dgad::dataset

#endif  // DGAD_DATASET_HPP_
