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

// Image-level metrics (AUROC, max-F1), aggregation over seeds and target
// domains, and the report / score / metric CSV files.

#ifndef DGAD_EVAL_HPP_
#define DGAD_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <iterator>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dgad/common.hpp"

namespace dgad::eval {

struct ScoredRow {
  std::string image_id;
  std::string dataset;
  std::string target_domain;
  int label = 0;  // 1 = anomalous
  double score = 0.0;
  std::string method;
  std::string backbone;
  std::uint64_t seed = 0;

  bool operator==(const ScoredRow&) const = default;
};

using ScoredSet = std::vector<ScoredRow>;

namespace detail {

inline void check_two_classes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw NonFiniteError("scores must be finite");
    pos += labels[i] == 1;
  }
  if (pos == 0 || pos == labels.size()) throw ValidationError("metric needs both classes present");
}

inline std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

}  // namespace detail

// P(score_pos > score_neg) + 0.5 * P(tie), by one pass over tie groups in
// ascending score order.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  detail::check_two_classes(scores, labels);
  const auto idx = detail::order_by_score(scores);
  double wins = 0.0;
  std::uint64_t neg_below = 0, pos_total = 0, neg_total = 0;
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t e = g;
    std::uint64_t pos = 0, neg = 0;
    while (e < idx.size() && scores[idx[e]] == scores[idx[g]]) {
      (labels[idx[e]] == 1 ? pos : neg) += 1;
      ++e;
    }
    wins += static_cast<double>(pos) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg));
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    g = e;
  }
  return wins / (static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

struct F1Result {
  double f1 = 0.0;
  double threshold = 0.0;  // predict anomalous iff score >= threshold
};

inline double f1_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (pred && labels[i] == 1) ++tp;
    else if (pred) ++fp;
    else if (labels[i] == 1) ++fn;
  }
  return tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

// Best F1 over thresholds at every distinct score; lowest threshold on ties.
inline F1Result f1_max(std::span<const double> scores, std::span<const int> labels) {
  detail::check_two_classes(scores, labels);
  auto idx = detail::order_by_score(scores);
  std::reverse(idx.begin(), idx.end());
  const auto positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  F1Result best{-1.0, 0.0};
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t g = 0; g < idx.size();) {
    const double t = scores[idx[g]];
    while (g < idx.size() && scores[idx[g]] == t) {
      (labels[idx[g]] == 1 ? tp : fp) += 1;
      ++g;
    }
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + (positives - tp));
    if (f1 >= best.f1) best = {f1, t};
  }
  return best;
}

inline std::pair<std::vector<double>, std::vector<int>> columns(const ScoredSet& set) {
  std::vector<double> s;
  std::vector<int> l;
  s.reserve(set.size());
  l.reserve(set.size());
  for (const auto& r : set) {
    s.push_back(r.score);
    l.push_back(r.label);
  }
  return {std::move(s), std::move(l)};
}

inline double auroc(const ScoredSet& set) {
  auto [s, l] = columns(set);
  return auroc(s, l);
}

inline F1Result f1_max(const ScoredSet& set) {
  auto [s, l] = columns(set);
  return f1_max(s, l);
}

// ---------------------------------------------------------------------------
// Aggregation

// Metrics of one (method, backbone, dataset, target, seed) run, as fractions.
struct RunMetrics {
  std::string method;
  std::string backbone;
  std::string dataset;
  std::string target_domain;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  double f1 = 0.0;
  double f1_threshold = 0.0;

  bool operator==(const RunMetrics&) const = default;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1); 0 for a single value
};

inline MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

struct CellReport {
  std::string method, backbone, dataset, target_domain;
  MeanStd auroc, f1;
  std::size_t runs = 0;
};

// Average over the target domains of one dataset (target_domain empty), or over
// every target domain of every dataset (dataset and target_domain empty).
// The mean is the mean of the cell means; the std is the sample std over seeds
// of the per-seed average, using the seeds shared by all contributing cells.
struct AverageReport {
  std::string method, backbone, dataset;
  MeanStd auroc, f1;
  std::size_t cells = 0;
};

struct MetricReport {
  std::vector<CellReport> cells;
  std::vector<AverageReport> dataset_averages;
  std::vector<AverageReport> grand_averages;

  bool empty() const { return cells.empty(); }
};

namespace detail {

using CellKey = std::tuple<std::string, std::string, std::string, std::string>;

inline AverageReport average_of(const std::vector<const std::vector<RunMetrics>*>& cells, std::string method,
                                std::string backbone, std::string dataset) {
  AverageReport avg{std::move(method), std::move(backbone), std::move(dataset), {}, {}, cells.size()};
  std::vector<double> au_means, f1_means;
  std::set<std::uint64_t> shared;
  bool first = true;
  for (const auto* runs : cells) {
    std::vector<double> a, f;
    std::set<std::uint64_t> seeds;
    for (const auto& r : *runs) {
      a.push_back(r.auroc);
      f.push_back(r.f1);
      seeds.insert(r.seed);
    }
    au_means.push_back(mean_std(a).mean);
    f1_means.push_back(mean_std(f).mean);
    if (first) {
      shared = seeds;
      first = false;
    } else {
      std::set<std::uint64_t> keep;
      std::set_intersection(shared.begin(), shared.end(), seeds.begin(), seeds.end(), std::inserter(keep, keep.end()));
      shared = std::move(keep);
    }
  }
  avg.auroc.mean = mean_std(au_means).mean;
  avg.f1.mean = mean_std(f1_means).mean;
  if (shared.size() >= 2) {
    std::vector<double> au_seed, f1_seed;
    for (auto seed : shared) {
      std::vector<double> a, f;
      for (const auto* runs : cells) {
        std::vector<double> ca, cf;
        for (const auto& r : *runs)
          if (r.seed == seed) {
            ca.push_back(r.auroc);
            cf.push_back(r.f1);
          }
        a.push_back(mean_std(ca).mean);
        f.push_back(mean_std(cf).mean);
      }
      au_seed.push_back(mean_std(a).mean);
      f1_seed.push_back(mean_std(f).mean);
    }
    avg.auroc.std = mean_std(au_seed).std;
    avg.f1.std = mean_std(f1_seed).std;
  }
  return avg;
}

}  // namespace detail

inline MetricReport aggregate(const std::vector<RunMetrics>& runs) {
  std::map<detail::CellKey, std::vector<RunMetrics>> by_cell;
  for (const auto& r : runs) by_cell[{r.method, r.backbone, r.dataset, r.target_domain}].push_back(r);

  MetricReport report;
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const std::vector<RunMetrics>*>> by_dataset;
  std::map<std::pair<std::string, std::string>, std::vector<const std::vector<RunMetrics>*>> by_method;
  for (const auto& [key, cell_runs] : by_cell) {
    const auto& [method, backbone, dataset, target] = key;
    std::vector<double> a, f;
    for (const auto& r : cell_runs) {
      a.push_back(r.auroc);
      f.push_back(r.f1);
    }
    report.cells.push_back({method, backbone, dataset, target, mean_std(a), mean_std(f), cell_runs.size()});
    by_dataset[{method, backbone, dataset}].push_back(&cell_runs);
    by_method[{method, backbone}].push_back(&cell_runs);
  }
  for (const auto& [key, cells] : by_dataset)
    report.dataset_averages.push_back(detail::average_of(cells, std::get<0>(key), std::get<1>(key), std::get<2>(key)));
  for (const auto& [key, cells] : by_method)
    report.grand_averages.push_back(detail::average_of(cells, key.first, key.second, ""));
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

inline constexpr std::string_view kReportCsvHeader = "method,backbone,dataset,target_domain,metric,mean,std,runs";

// CSV with one row per (cell | dataset average | grand average) and metric,
// values in percent. Averages use target_domain "average"; the grand average
// uses dataset "all".
inline std::string render_csv(const MetricReport& report) {
  std::ostringstream out;
  out << kReportCsvHeader << '\n';
  auto row = [&](const std::string& method, const std::string& backbone, const std::string& dataset,
                 const std::string& target, const char* metric, const MeanStd& ms, std::size_t n) {
    out << method << ',' << backbone << ',' << dataset << ',' << target << ',' << metric << ','
        << strprintf("%.3f", 100.0 * ms.mean) << ',' << strprintf("%.3f", 100.0 * ms.std) << ',' << n << '\n';
  };
  for (const auto& c : report.cells) {
    row(c.method, c.backbone, c.dataset, c.target_domain, "auroc", c.auroc, c.runs);
    row(c.method, c.backbone, c.dataset, c.target_domain, "f1", c.f1, c.runs);
  }
  for (const auto& a : report.dataset_averages) {
    row(a.method, a.backbone, a.dataset, "average", "auroc", a.auroc, a.cells);
    row(a.method, a.backbone, a.dataset, "average", "f1", a.f1, a.cells);
  }
  for (const auto& a : report.grand_averages) {
    row(a.method, a.backbone, "all", "average", "auroc", a.auroc, a.cells);
    row(a.method, a.backbone, "all", "average", "f1", a.f1, a.cells);
  }
  return out.str();
}

namespace detail {
inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}
inline std::string cell_text(const MeanStd& ms) { return strprintf("%.1f +- %.1f", 100.0 * ms.mean, 100.0 * ms.std); }
}  // namespace detail

// Plain-text tables: a summary per backbone and metric (methods as rows,
// datasets plus the all-target average as columns) followed by the per-target
// breakdown.
inline std::string render_text(const MetricReport& report) {
  std::ostringstream out;
  out << "Image-level metrics in %\n";
  if (report.empty()) return out.str();

  std::set<std::string> backbones, datasets;
  for (const auto& c : report.cells) {
    backbones.insert(c.backbone);
    datasets.insert(c.dataset);
  }
  constexpr std::size_t kCol = 16;
  for (const char* metric : {"auroc", "f1"}) {
    const bool is_auroc = std::string_view(metric) == "auroc";
    for (const auto& bb : backbones) {
      out << '\n' << (is_auroc ? "AUROC" : "F1") << " (" << bb << ")\n";
      out << detail::pad("Method", 24);
      for (const auto& d : datasets) out << detail::pad(d, kCol);
      out << "Avg.\n";
      for (const auto& g : report.grand_averages) {
        if (g.backbone != bb) continue;
        out << detail::pad(g.method, 24);
        for (const auto& d : datasets) {
          auto it = std::find_if(report.dataset_averages.begin(), report.dataset_averages.end(), [&](const AverageReport& a) {
            return a.method == g.method && a.backbone == bb && a.dataset == d;
          });
          out << detail::pad(it == report.dataset_averages.end() ? "-" : detail::cell_text(is_auroc ? it->auroc : it->f1), kCol);
        }
        out << strprintf("%.1f", 100.0 * (is_auroc ? g.auroc.mean : g.f1.mean)) << '\n';
      }
    }
  }
  out << '\n' << detail::pad("Method", 24) << detail::pad("Backbone", 12) << detail::pad("Dataset", 10)
      << detail::pad("Target", 14) << detail::pad("AUROC", kCol) << detail::pad("F1", kCol) << "Runs\n";
  for (const auto& c : report.cells) {
    out << detail::pad(c.method, 24) << detail::pad(c.backbone, 12) << detail::pad(c.dataset, 10)
        << detail::pad(c.target_domain, 14) << detail::pad(detail::cell_text(c.auroc), kCol)
        << detail::pad(detail::cell_text(c.f1), kCol) << c.runs << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// CSV files exchanged between CLI subcommands.

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos) throw ValidationError("CSV field contains a separator: '" + s + "'");
}

inline double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError("bad number '" + s + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad number '" + s + "'", line);
  }
}

inline std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw ParseError("bad integer '" + s + "'", line);
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("bad integer '" + s + "'", line);
  }
}

template <typename Row>
std::vector<Row> read_csv(const std::string& text, std::string_view header, Row (*parse)(const std::vector<std::string>&, std::size_t)) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  std::vector<Row> rows;
  const std::size_t columns = split_csv(std::string(header)).size();
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != header) throw ParseError("unexpected CSV header '" + line + "'", n);
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != columns) throw ParseError("expected " + std::to_string(columns) + " fields", n);
    rows.push_back(parse(f, n));
  }
  return rows;
}

}  // namespace detail

inline constexpr std::string_view kScoresHeader = "image_id,dataset,target_domain,label,score,method,backbone,seed";
inline constexpr std::string_view kMetricsHeader = "method,backbone,dataset,target_domain,seed,auroc,f1,f1_threshold";

inline std::string render_scores(const ScoredSet& set) {
  std::ostringstream out;
  out << kScoresHeader << '\n';
  for (const auto& r : set) {
    for (const auto* s : {&r.image_id, &r.dataset, &r.target_domain, &r.method, &r.backbone}) detail::check_field(*s);
    out << r.image_id << ',' << r.dataset << ',' << r.target_domain << ',' << r.label << ',' << strprintf("%.17g", r.score)
        << ',' << r.method << ',' << r.backbone << ',' << r.seed << '\n';
  }
  return out.str();
}

inline ScoredSet parse_scores(const std::string& text) {
  return detail::read_csv<ScoredRow>(text, kScoresHeader, [](const std::vector<std::string>& f, std::size_t n) {
    ScoredRow r{f[0], f[1], f[2], static_cast<int>(detail::parse_u64(f[3], n)), detail::parse_double(f[4], n), f[5], f[6],
                detail::parse_u64(f[7], n)};
    if (r.label != 0 && r.label != 1) throw ParseError("label must be 0 or 1", n);
    return r;
  });
}

inline std::string render_metrics(const std::vector<RunMetrics>& runs) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& r : runs) {
    out << r.method << ',' << r.backbone << ',' << r.dataset << ',' << r.target_domain << ',' << r.seed << ','
        << strprintf("%.17g", r.auroc) << ',' << strprintf("%.17g", r.f1) << ',' << strprintf("%.17g", r.f1_threshold) << '\n';
  }
  return out.str();
}

inline std::vector<RunMetrics> parse_metrics(const std::string& text) {
  return detail::read_csv<RunMetrics>(text, kMetricsHeader, [](const std::vector<std::string>& f, std::size_t n) {
    return RunMetrics{f[0], f[1], f[2], f[3], detail::parse_u64(f[4], n), detail::parse_double(f[5], n),
                      detail::parse_double(f[6], n), detail::parse_double(f[7], n)};
  });
}

// Splits scored rows into runs keyed by (method, backbone, dataset, target, seed)
// and computes AUROC and max-F1 for each.
inline std::vector<RunMetrics> evaluate(const ScoredSet& set) {
  std::map<std::tuple<std::string, std::string, std::string, std::string, std::uint64_t>, ScoredSet> groups;
  for (const auto& r : set) groups[{r.method, r.backbone, r.dataset, r.target_domain, r.seed}].push_back(r);
  std::vector<RunMetrics> out;
  for (const auto& [key, rows] : groups) {
    const auto f1 = f1_max(rows);
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<4>(key), auroc(rows),
                   f1.f1, f1.threshold});
  }
  return out;
}

}  // namespace dgad::eval

#endif  // DGAD_EVAL_HPP_
