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

// `dgad` command line: every subcommand composes the library operations, takes
// its randomness from --seed, and records the fully resolved configuration in
// a run file next to its output.

#ifndef DGAD_CLI_HPP_
#define DGAD_CLI_HPP_

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgad/common.hpp"
#include "dgad/coreset.hpp"
#include "dgad/dataset.hpp"
#include "dgad/embedding.hpp"
#include "dgad/eval.hpp"
#include "dgad/pipeline.hpp"
#include "dgad/scoring.hpp"
#include "dgad/semlp.hpp"
#include "dgad/synthetic.hpp"

namespace dgad::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kMissingInput = 3,
  kInvalidConfig = 4,
  kBadFormat = 5,
};

struct RunConfig {
  std::string subcommand;
  std::string dataset = "hole";
  std::string target;
  std::string backbone;
  std::string method;
  int pool = 3;
  double ratio = 0.0;  // 0: 0.1 / #categories
  std::size_t b_neighbors = scoring::kDefaultNeighbors;
  std::uint32_t proj_dim = 128;
  std::uint64_t seed = 0;
  std::size_t floor = 1000;
  double threshold = 0.1;
  std::string variant = "offline";
  std::uint32_t batch_images = 8;
  std::string label = "normal";
  double lr = 1e-3;
  std::uint32_t epochs = 20;
  std::uint32_t batch_size = 256;
  double pos_weight = 0.0;
  std::string optimizer = "adam";
  std::uint32_t hidden = semlp::kDefaultHidden;
  unsigned workers = 1;
  // synth
  std::uint32_t domains = 5;
  std::uint32_t images_per_domain = 40;
  std::uint32_t grid = 8;
  std::uint32_t dim = 16;
  double separation = 8.0;
  double domain_shift = 1.0;
  double spread = 0.1;
  double anomaly_fraction = 0.4;
  // paths
  std::string mvtec_root, manifest, embeddings, bank, normal_bank, anomaly_bank, model, out;
  std::vector<std::string> scores, metrics;

  NLOHMANN_DEFINE_TYPE_INTRUSIVE_WITH_DEFAULT(RunConfig, subcommand, dataset, target, backbone, method, pool, ratio, b_neighbors,
                                              proj_dim, seed, floor, threshold, variant, batch_images, label, lr, epochs, batch_size,
                                              pos_weight, optimizer, hidden, workers, domains, images_per_domain, grid, dim, separation,
                                              domain_shift, spread, anomaly_fraction, mvtec_root, manifest, embeddings, bank,
                                              normal_bank, anomaly_bank, model, out, scores, metrics)
};

namespace detail {

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string(what) + " not given");
  if (!fs::exists(path)) throw IoError(std::string("missing input file: ") + what + " '" + path + "'");
}

inline void write_run_record(const RunConfig& cfg, const fs::path& path) {
  io::write_file_atomic(path, nlohmann::json(cfg).dump(2) + "\n");
}

inline fs::path sidecar(const fs::path& output) { return fs::path(output.string() + ".run.json"); }

inline std::string backbone_of(const RunConfig& cfg, const pipeline::Source& src, const dataset::DatasetManifest& m) {
  if (!cfg.backbone.empty()) return cfg.backbone;
  for (const auto& r : m.records) return src.grid(r).meta.backbone;
  return "";
}

inline std::uint64_t run_seed(const RunConfig& cfg, const dataset::DatasetManifest& m) { return m.seed.value_or(cfg.seed); }

inline embedding::PoolingConfig pooling(const RunConfig& cfg) {
  embedding::PoolingConfig p{cfg.pool, 1};
  p.validate();
  return p;
}

inline void cmd_regroup(const RunConfig& cfg, std::ostream& out) {
  if (!fs::is_directory(cfg.mvtec_root)) throw IoError("missing input directory: MVTec root '" + cfg.mvtec_root + "'");
  const auto spec = dataset::regroup_spec(cfg.dataset);
  const auto m = dataset::regroup(dataset::scan_mvtec(cfg.mvtec_root), spec);
  dataset::write_manifest(m, cfg.out);
  write_run_record(cfg, sidecar(cfg.out));
  out << "regrouped " << m.records.size() << " images from " << m.categories().size() << " categories into '" << m.dataset << "'\n";
}

inline void cmd_split(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  const auto m = dataset::make_split(dataset::read_manifest(cfg.manifest), {cfg.target, cfg.seed});
  dataset::write_manifest(m, cfg.out);
  write_run_record(cfg, sidecar(cfg.out));
  std::size_t counts[4] = {};
  for (const auto& r : m.records) ++counts[static_cast<int>(r.split_role)];
  out << "target " << cfg.target << ": train " << counts[0] << ", val " << counts[1] << ", test " << counts[2] << ", excluded "
      << counts[3] << "\n";
}

inline void cmd_materialize(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  const auto m = dataset::materialize(dataset::read_manifest(cfg.manifest), cfg.out);
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  out << "copied " << m.records.size() << " images to " << cfg.out << "\n";
}

inline void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  std::vector<std::string> domains, defects;
  if (cfg.dataset == "hole" || cfg.dataset == "cut" || cfg.dataset == "color") {
    for (const auto& [cat, type] : dataset::regroup_spec(cfg.dataset).rows) {
      if (std::find(domains.begin(), domains.end(), cat) != domains.end()) continue;
      domains.push_back(cat);
      defects.push_back(type);
    }
  } else {
    for (std::uint32_t k = 0; k < cfg.domains; ++k) domains.push_back(strprintf("domain%u", k));
  }
  auto spec = synthetic::two_cluster_spec(domains, cfg.dim, cfg.separation, cfg.domain_shift, cfg.spread, cfg.seed, defects);
  spec.dataset = cfg.dataset;
  spec.root = (fs::path(cfg.out) / "mvtec").string();
  spec.grid_h = spec.grid_w = cfg.grid;
  spec.images_per_domain = cfg.images_per_domain;
  spec.anomaly_fraction = cfg.anomaly_fraction;
  spec.block_h = spec.block_w = std::min<std::uint32_t>(2, cfg.grid);
  const auto data = synthetic::generate_synthetic(spec, cfg.seed);
  synthetic::write_tree(data, fs::path(cfg.out) / "embeddings");
  dataset::write_manifest(data.manifest, fs::path(cfg.out) / "manifest.jsonl");
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  out << "generated " << data.grids.size() << " images over " << domains.size() << " domains in " << cfg.out << "\n";
}

inline void cmd_build_bank(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  const std::string path = cfg.bank.empty() ? cfg.out : cfg.bank;
  const auto m = dataset::read_manifest(cfg.manifest);
  const auto src = pipeline::disk_source(cfg.embeddings, cfg.threshold, pooling(cfg));
  pipeline::BankOptions o;
  o.label = cfg.label == "anomaly" ? Label::kAnomaly : Label::kNormal;
  if (cfg.label != "anomaly" && cfg.label != "normal") throw ValidationError("--label must be normal or anomaly");
  o.ratio = cfg.ratio > 0.0 ? cfg.ratio : pipeline::default_ratio(m.categories().size());
  coreset::check_ratio(o.ratio);
  o.variant = coreset::parse_variant(cfg.variant);
  o.batch_size = cfg.batch_images;
  o.projection_dim = cfg.proj_dim;
  o.projection_seed = cfg.seed;
  o.floor = o.label == Label::kAnomaly ? cfg.floor : 0;
  const auto images = o.label == Label::kAnomaly ? pipeline::anomalous_patches(m, src) : pipeline::normal_patches(m, src);
  const auto bank = pipeline::build_bank(images, o);
  coreset::save_bank(bank, path);
  RunConfig resolved = cfg;
  resolved.ratio = o.ratio;
  write_run_record(resolved, sidecar(path));
  out << to_string(bank.label) << " bank: " << bank.count() << " entries of dim " << bank.dim() << " (ratio " << o.ratio << ")\n";
}

inline void write_scores(const eval::ScoredSet& s, const RunConfig& cfg, std::ostream& out) {
  io::write_file_atomic(fs::path(cfg.out) / "scores.csv", eval::render_scores(s));
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  out << "scored " << s.size() << " images -> " << (fs::path(cfg.out) / "scores.csv").string() << "\n";
}

inline void cmd_score(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  require_file(cfg.bank, "bank");
  const auto m = dataset::read_manifest(cfg.manifest);
  const auto src = pipeline::disk_source(cfg.embeddings, cfg.threshold, pooling(cfg));
  const auto bank = coreset::load_bank(cfg.bank);
  if (cfg.b_neighbors < 1) throw ValidationError("--b-neighbors must be >= 1");
  const pipeline::RunInfo run{cfg.method.empty() ? "patchcore" : cfg.method, backbone_of(cfg, src, m), run_seed(cfg, m)};
  write_scores(pipeline::score_patchcore(m, src, bank, cfg.b_neighbors, run, cfg.workers), cfg, out);
}

inline void cmd_dual_score(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  require_file(cfg.normal_bank, "normal bank");
  require_file(cfg.anomaly_bank, "anomaly bank");
  const auto m = dataset::read_manifest(cfg.manifest);
  const auto src = pipeline::disk_source(cfg.embeddings, cfg.threshold, pooling(cfg));
  const auto normal = coreset::load_bank(cfg.normal_bank);
  const auto anomaly = coreset::load_bank(cfg.anomaly_bank, normal.dim());
  const pipeline::RunInfo run{cfg.method.empty() ? "labeled_patchcore" : cfg.method, backbone_of(cfg, src, m), run_seed(cfg, m)};
  const auto res = pipeline::score_dual(m, src, normal, anomaly, cfg.b_neighbors, run, cfg.workers);
  std::string decisions = "image_id,label,decision\n";
  std::size_t correct = 0;
  for (std::size_t i = 0; i < res.scores.size(); ++i) {
    const int d = res.decisions[i] == Label::kAnomaly ? 1 : 0;
    correct += d == res.scores[i].label;
    decisions += res.scores[i].image_id + "," + std::to_string(res.scores[i].label) + "," + std::to_string(d) + "\n";
  }
  io::write_file_atomic(fs::path(cfg.out) / "decisions.csv", decisions);
  write_scores(res.scores, cfg, out);
  if (!res.scores.empty())
    out << "image accuracy " << strprintf("%.4f", static_cast<double>(correct) / static_cast<double>(res.scores.size())) << "\n";
}

inline void cmd_train_semlp(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  const auto m = dataset::read_manifest(cfg.manifest);
  const auto src = pipeline::disk_source(cfg.embeddings, cfg.threshold, pooling(cfg));
  const auto train = pipeline::patch_dataset(m, src, dataset::SplitRole::kTrain);
  const auto val = pipeline::patch_dataset(m, src, dataset::SplitRole::kVal);
  if (train.size() == 0) throw ValidationError("manifest has no training images");
  semlp::TrainConfig tc;
  tc.learning_rate = cfg.lr;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.pos_weight = cfg.pos_weight;
  tc.optimizer = semlp::parse_optimizer(cfg.optimizer);
  const auto init = semlp::mlp_init<float>(train.dim, cfg.hidden, cfg.seed);
  const auto result = semlp::train(init, train, tc, &val);
  semlp::save_mlp(result.model, fs::path(cfg.out) / "model.mlp");
  std::string log = "epoch,loss,val_patch_auroc\n";
  for (const auto& e : result.log) log += strprintf("%u,%.9g,%.9g\n", e.epoch, e.loss, e.val_auroc);
  io::write_file_atomic(fs::path(cfg.out) / "train_log.csv", log);
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  out << "trained SEMLP (" << result.model.parameter_count() << " parameters) on " << train.size() << " patches; selected epoch "
      << result.best_epoch << "\n";
}

inline void cmd_score_semlp(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.manifest, "manifest");
  require_file(cfg.model, "model");
  const auto m = dataset::read_manifest(cfg.manifest);
  const auto src = pipeline::disk_source(cfg.embeddings, cfg.threshold, pooling(cfg));
  const auto mlp = semlp::load_mlp(cfg.model);
  const pipeline::RunInfo run{cfg.method.empty() ? "semlp" : cfg.method, backbone_of(cfg, src, m), run_seed(cfg, m)};
  write_scores(pipeline::score_semlp(m, src, mlp, run, cfg.workers), cfg, out);
}

inline void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.scores.empty()) throw ValidationError("--scores not given");
  eval::ScoredSet all;
  for (const auto& s : cfg.scores) {
    require_file(s, "scores");
    auto part = eval::parse_scores(io::read_file(s));
    all.insert(all.end(), part.begin(), part.end());
  }
  const auto metrics = eval::evaluate(all);
  io::write_file_atomic(fs::path(cfg.out) / "metrics.csv", eval::render_metrics(metrics));
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  for (const auto& r : metrics)
    out << r.method << ' ' << r.dataset << '/' << r.target_domain << " seed " << r.seed << ": AUROC " << strprintf("%.4f", r.auroc)
        << " F1 " << strprintf("%.4f", r.f1) << "\n";
}

inline void cmd_report(const RunConfig& cfg, std::ostream& out) {
  if (cfg.metrics.empty()) throw ValidationError("--metrics not given");
  std::vector<eval::RunMetrics> runs;
  for (const auto& p : cfg.metrics) {
    require_file(p, "metrics");
    auto part = eval::parse_metrics(io::read_file(p));
    runs.insert(runs.end(), part.begin(), part.end());
  }
  const auto report = eval::aggregate(runs);
  const auto text = eval::render_text(report);
  io::write_file_atomic(fs::path(cfg.out) / "report.csv", eval::render_csv(report));
  io::write_file_atomic(fs::path(cfg.out) / "report.txt", text);
  write_run_record(cfg, fs::path(cfg.out) / "run.json");
  out << text;
}

// Finds `--config <path>` (or `--config=<path>`) ahead of full parsing so
// that the file supplies defaults which explicit flags then override.
inline std::optional<std::string> find_config(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return std::string(a.substr(9));
  }
  return std::nullopt;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    if (auto path = detail::find_config(argc, argv)) {
      if (!fs::exists(*path)) {
        err << "error: missing input file: config '" << *path << "'\n";
        return kMissingInput;
      }
      cfg = nlohmann::json::parse(io::read_file(*path)).get<RunConfig>();
    }
  } catch (const nlohmann::json::exception& e) {
    err << "error: config file is not valid: " << e.what() << "\n";
    return kBadFormat;
  }

  CLI::App app{"dgad: domain-generalized anomaly detection on patch embeddings"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration; flags override its values");

  auto paths_in = [&](CLI::App* s, bool embeddings) {
    s->add_option("--manifest", cfg.manifest, "JSON Lines manifest");
    if (embeddings) {
      s->add_option("--embeddings", cfg.embeddings, "directory of <image_id>.semb files");
      s->add_option("--pool", cfg.pool, "neighbourhood size for raw per-layer maps");
      s->add_option("--threshold", cfg.threshold, "anomalous pixel share for a patch to count as anomalous");
      s->add_option("--backbone", cfg.backbone, "backbone tag for reports (default: from embedding metadata)");
    }
  };
  auto workers = [&](CLI::App* s) { s->add_option("--workers", cfg.workers, "worker threads"); };

  auto* regroup = app.add_subcommand("regroup", "regroup MVTec AD into the hole / cut / color dataset");
  regroup->add_option("--mvtec-root", cfg.mvtec_root, "MVTec AD root directory");
  regroup->add_option("--dataset", cfg.dataset, "hole, cut or color");
  regroup->add_option("--out", cfg.out, "output manifest (.jsonl)");

  auto* split = app.add_subcommand("split", "assign a leave-one-domain-out split");
  paths_in(split, false);
  split->add_option("--target", cfg.target, "held-out target domain");
  split->add_option("--seed", cfg.seed, "split seed");
  split->add_option("--out", cfg.out, "output manifest (.jsonl)");

  auto* materialize = app.add_subcommand("materialize", "copy a manifest's files into a regrouped tree");
  paths_in(materialize, false);
  materialize->add_option("--out", cfg.out, "output directory");

  auto* synth = app.add_subcommand("synth", "generate a synthetic MVTec-shaped dataset with embeddings");
  synth->add_option("--out", cfg.out, "output directory");
  synth->add_option("--seed", cfg.seed, "generator seed");
  synth->add_option("--dataset", cfg.dataset, "hole, cut or color names domains after that dataset; anything else uses --domains");
  synth->add_option("--domains", cfg.domains, "number of generic domains");
  synth->add_option("--images-per-domain", cfg.images_per_domain, "images per domain");
  synth->add_option("--grid", cfg.grid, "patch grid side");
  synth->add_option("--dim", cfg.dim, "embedding dimension");
  synth->add_option("--separation", cfg.separation, "distance of the anomaly cluster");
  synth->add_option("--domain-shift", cfg.domain_shift, "per-domain shift of the normal cluster");
  synth->add_option("--spread", cfg.spread, "per-dimension cluster standard deviation");
  synth->add_option("--anomaly-fraction", cfg.anomaly_fraction, "share of anomalous images per domain");

  auto* build = app.add_subcommand("build-bank", "build a normal or anomaly coreset from the train split");
  paths_in(build, true);
  build->add_option("--out", cfg.out, "output bank (.cset)");
  build->add_option("--bank", cfg.bank, "same as --out");
  build->add_option("--label", cfg.label, "normal or anomaly");
  build->add_option("--ratio", cfg.ratio, "coreset ratio (default 0.1 / #categories)");
  build->add_option("--floor", cfg.floor, "minimum anomaly bank size");
  build->add_option("--proj-dim", cfg.proj_dim, "random projection dimension (0 = none)");
  build->add_option("--seed", cfg.seed, "projection seed");
  build->add_option("--variant", cfg.variant, "offline, online or batch");
  build->add_option("--batch-images", cfg.batch_images, "images per batch for the batch variant");

  auto* score = app.add_subcommand("score", "score test images against a normal bank");
  paths_in(score, true);
  score->add_option("--bank", cfg.bank, "normal bank (.cset)");
  score->add_option("--b-neighbors", cfg.b_neighbors, "neighbourhood size of the reweighting");
  score->add_option("--method", cfg.method, "method tag");
  score->add_option("--seed", cfg.seed, "run seed when the manifest has none");
  score->add_option("--out", cfg.out, "output directory");
  workers(score);

  auto* dual = app.add_subcommand("dual-score", "classify test images with normal and anomaly banks");
  paths_in(dual, true);
  dual->add_option("--normal-bank", cfg.normal_bank, "normal bank (.cset)");
  dual->add_option("--anomaly-bank", cfg.anomaly_bank, "anomaly bank (.cset)");
  dual->add_option("--b-neighbors", cfg.b_neighbors, "neighbourhood size of the reweighting");
  dual->add_option("--method", cfg.method, "method tag");
  dual->add_option("--seed", cfg.seed, "run seed when the manifest has none");
  dual->add_option("--out", cfg.out, "output directory");
  workers(dual);

  auto* train = app.add_subcommand("train-semlp", "train the patch MLP on the train split");
  paths_in(train, true);
  train->add_option("--out", cfg.out, "output directory");
  train->add_option("--epochs", cfg.epochs, "epochs");
  train->add_option("--lr", cfg.lr, "learning rate");
  train->add_option("--batch-size", cfg.batch_size, "patches per mini-batch");
  train->add_option("--hidden", cfg.hidden, "hidden units");
  train->add_option("--optimizer", cfg.optimizer, "adam or sgd");
  train->add_option("--pos-weight", cfg.pos_weight, "positive class weight (0 = #neg/#pos)");
  train->add_option("--seed", cfg.seed, "initialisation and shuffling seed");

  auto* score_mlp = app.add_subcommand("score-semlp", "score test images with a trained patch MLP");
  paths_in(score_mlp, true);
  score_mlp->add_option("--model", cfg.model, "model (.mlp)");
  score_mlp->add_option("--method", cfg.method, "method tag");
  score_mlp->add_option("--seed", cfg.seed, "run seed when the manifest has none");
  score_mlp->add_option("--out", cfg.out, "output directory");
  workers(score_mlp);

  auto* ev = app.add_subcommand("eval", "image-level AUROC and max-F1 per run");
  ev->add_option("--scores", cfg.scores, "scores.csv files")->expected(1, -1);
  ev->add_option("--out", cfg.out, "output directory");

  auto* report = app.add_subcommand("report", "aggregate runs into tables");
  report->add_option("--metrics", cfg.metrics, "metrics.csv files")->expected(1, -1);
  report->add_option("--out", cfg.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto* sub = app.get_subcommands().front();
  cfg.subcommand = sub->get_name();
  try {
    if (cfg.subcommand == "build-bank" && cfg.out.empty()) cfg.out = cfg.bank;
    if (cfg.out.empty()) throw ValidationError("--out not given");
    if (cfg.workers < 1) throw ValidationError("--workers must be >= 1");
    const std::string& name = cfg.subcommand;
    if (name == "regroup") detail::cmd_regroup(cfg, out);
    else if (name == "split") detail::cmd_split(cfg, out);
    else if (name == "materialize") detail::cmd_materialize(cfg, out);
    else if (name == "synth") detail::cmd_synth(cfg, out);
    else if (name == "build-bank") detail::cmd_build_bank(cfg, out);
    else if (name == "score") detail::cmd_score(cfg, out);
    else if (name == "dual-score") detail::cmd_dual_score(cfg, out);
    else if (name == "train-semlp") detail::cmd_train_semlp(cfg, out);
    else if (name == "score-semlp") detail::cmd_score_semlp(cfg, out);
    else if (name == "eval") detail::cmd_eval(cfg, out);
    else if (name == "report") detail::cmd_report(cfg, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFormat;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace dgad::cli

#endif  // DGAD_CLI_HPP_
