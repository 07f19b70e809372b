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

// Small on-disk tree in the MVTec AD layout.

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "dgad/dataset.hpp"
#include "dgad/png_io.hpp"

namespace fixture {

namespace fs = std::filesystem;

struct MvtecCounts {
  int good_train = 3;
  int good_test = 2;
  int per_defect = 7;
};

// Every category gets the anomaly types named by the three regrouped datasets
// plus an unrelated "scratch" type that regrouping must drop.
inline std::map<std::string, std::set<std::string>> defect_types() {
  std::map<std::string, std::set<std::string>> out;
  for (auto c : dgad::dataset::kMvtecCategories) out[std::string(c)].insert("scratch");
  for (const char* name : {"hole", "cut", "color"})
    for (const auto& [c, t] : dgad::dataset::regroup_spec(name).rows) out[c].insert(t);
  return out;
}

inline void write_png(const fs::path& path, std::uint8_t value) {
  dgad::embedding::MaskImage img{4, 4, std::vector<std::uint8_t>(16, value)};
  dgad::png::write_gray(img, path);
}

inline std::string stem(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", i);
  return buf;
}

inline void write_mvtec(const fs::path& root, const MvtecCounts& counts = {}) {
  fs::remove_all(root);
  for (const auto& [cat, defects] : defect_types()) {
    const fs::path c = root / cat;
    for (int i = 0; i < counts.good_train; ++i) write_png(c / "train" / "good" / (stem(i) + ".png"), 128);
    for (int i = 0; i < counts.good_test; ++i) write_png(c / "test" / "good" / (stem(i) + ".png"), 128);
    for (const auto& d : defects)
      for (int i = 0; i < counts.per_defect; ++i) {
        write_png(c / "test" / d / (stem(i) + ".png"), 64);
        write_png(c / "ground_truth" / d / (stem(i) + "_mask.png"), 255);
      }
  }
}

}  // namespace fixture
