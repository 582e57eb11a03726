// cpath: color-feature patch classification from the command line.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 bench finished with
// failed cells (reports are still written).

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpath/bench.hpp"
#include "cpath/error.hpp"
#include "cpath/evaluation.hpp"
#include "cpath/feature_cache.hpp"
#include "cpath/manifest.hpp"
#include "cpath/model.hpp"
#include "cpath/pathmnist.hpp"

namespace fs = std::filesystem;
using namespace cpath;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

struct TrainArgs {
  std::string cache, output, clf = "rf", manifest, split = "stratified";
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  int k = 5;
  std::string kernel = "rbf";
  double c = 1.0, gamma = 0.0, tol = 1e-3;
  int trees = 100, max_features = 0, max_depth = 0;
  int rounds = 100, gbt_depth = 3;
  double learning_rate = 0.1, lambda = 1.0;
};

struct EvalArgs {
  std::string model, cache, manifest, split;
};

std::vector<std::string> class_names_for(const FeatureCache& cache, const std::string& manifest_path) {
  if (!manifest_path.empty()) return load_manifest(manifest_path).class_names();
  std::uint32_t top = 0;
  for (auto l : cache.labels) top = std::max(top, l);
  return default_class_names(static_cast<int>(top) + 1);
}

std::vector<int> int_labels(const FeatureCache& cache) { return {cache.labels.begin(), cache.labels.end()}; }

SplitIndices rebuild_split(const SplitProvenance& prov, const FeatureCache& cache, int num_classes,
                           const std::string& manifest_path) {
  switch (prov.mode) {
    case SplitProvenance::Mode::All: {
      SplitIndices all;
      for (std::size_t i = 0; i < cache.size(); ++i) all.train.push_back(i);
      return all;
    }
    case SplitProvenance::Mode::RandomStratified:
      return stratified_split_indices(int_labels(cache), num_classes, prov.train_fraction, prov.seed);
    case SplitProvenance::Mode::ManifestProvided: {
      if (manifest_path.empty())
        throw Error(Errc::ConfigInvalid, "model was trained on the manifest split; pass --manifest");
      const auto m = load_manifest(manifest_path);
      if (m.size() != cache.size()) throw Error(Errc::ConfigInvalid, "manifest and cache differ in row count");
      return manifest_split_indices(m);
    }
  }
  return {};
}

int run_manifest(const std::string& root, const std::string& output) {
  const auto m = manifest_from_directory(root);
  DatasetManifest out = m;
  const auto out_dir = fs::absolute(fs::path(output)).parent_path();
  for (auto& r : out.records) r.path = fs::proximate(fs::absolute(m.resolve(r)), out_dir).generic_string();
  save_manifest(out, output);
  std::printf("%zu records, %zu classes -> %s\n", out.size(), out.class_names().size(), output.c_str());
  return kExitOk;
}

int run_relabel(const std::string& input, const std::string& mapping, const std::string& output) {
  if (mapping != "pathmnist-binary") throw Error(Errc::ConfigInvalid, "unknown mapping '" + mapping + "'");
  const auto m = load_manifest(input);
  auto mapped = map_binary_labels(m, pathmnist_binary_mapping());
  const auto out_dir = fs::absolute(fs::path(output)).parent_path();
  for (auto& r : mapped.records) r.path = fs::proximate(fs::absolute(m.resolve(r)), out_dir).generic_string();
  save_manifest(mapped, output);
  std::printf("%zu records relabeled with %s -> %s\n", mapped.size(), mapping.c_str(), output.c_str());
  return kExitOk;
}

int run_extract(const std::string& manifest_path, const std::string& method, int bins, const std::string& output) {
  const auto m = load_manifest(manifest_path);
  const auto cache = build_cache(m, parse_extractor(method), bins, output);
  std::printf("%zu rows x %zu features (%s) -> %s\n", cache.size(), cache.features.cols(), method.c_str(),
              output.c_str());
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  const auto cache = read_cache(a.cache);
  const auto names = class_names_for(cache, a.manifest);
  const auto all = to_training_set(cache, names);

  SplitProvenance prov;
  prov.seed = a.seed;
  if (a.split == "all") {
    prov.mode = SplitProvenance::Mode::All;
  } else if (a.split == "stratified") {
    prov.mode = SplitProvenance::Mode::RandomStratified;
    prov.train_fraction = a.train_fraction;
  } else if (a.split == "manifest") {
    prov.mode = SplitProvenance::Mode::ManifestProvided;
  } else {
    throw Error(Errc::ConfigInvalid, "--split must be all, stratified or manifest");
  }
  const auto split = rebuild_split(prov, cache, all.num_classes(), a.manifest);

  ClassifierConfig cfg;
  cfg.knn.k = a.k;
  cfg.svm.kernel = parse_kernel(a.kernel);
  cfg.svm.c = a.c;
  cfg.svm.gamma = a.gamma;
  cfg.svm.tol = a.tol;
  cfg.rf.trees = a.trees;
  cfg.rf.max_features = a.max_features;
  cfg.rf.max_depth = a.max_depth;
  cfg.rf.seed = a.seed;
  cfg.gbt.rounds = a.rounds;
  cfg.gbt.learning_rate = a.learning_rate;
  cfg.gbt.max_depth = a.gbt_depth;
  cfg.gbt.lambda = a.lambda;

  auto model = fit(all.subset(split.train), parse_classifier(a.clf), cfg);
  model.provenance = prov;
  save_model(model, a.output);
  std::printf("%s trained on %zu of %zu rows, %d classes -> %s\n", a.clf.c_str(), split.train.size(), cache.size(),
              model.num_classes(), a.output.c_str());
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  const auto model = load_model(a.model);
  const auto cache = read_cache(a.cache);
  if (cache.features.cols() != model.dim())
    throw Error(Errc::DimensionMismatch, "cache has " + std::to_string(cache.features.cols()) +
                                             " features, model expects " + std::to_string(model.dim()));

  std::string which = a.split;
  if (which.empty()) which = model.provenance.mode == SplitProvenance::Mode::All ? "all" : "test";
  std::vector<std::size_t> rows;
  if (which == "all") {
    for (std::size_t i = 0; i < cache.size(); ++i) rows.push_back(i);
  } else if (which == "train" || which == "test") {
    if (model.provenance.mode == SplitProvenance::Mode::All)
      throw Error(Errc::ConfigInvalid, "model was trained on all rows; there is no held-out split");
    const auto split = rebuild_split(model.provenance, cache, model.num_classes(), a.manifest);
    rows = which == "train" ? split.train : split.test;
  } else {
    throw Error(Errc::ConfigInvalid, "--split must be all, train or test");
  }

  const auto x = cache.features.select_rows(rows);
  std::vector<int> truth;
  for (auto i : rows) {
    if (cache.labels[i] >= static_cast<std::uint32_t>(model.num_classes()))
      throw Error(Errc::InvalidArgument, "cache label outside the model's classes");
    truth.push_back(static_cast<int>(cache.labels[i]));
  }
  const auto pred = predict_batch(model, x);
  const auto cm = confusion(truth, pred, model.num_classes());

  std::printf("split: %s (%zu rows)\n", which.c_str(), rows.size());
  try {
    const auto recall = per_class_recall(cm);
    std::printf("balanced_accuracy: %.6f\n", balanced_accuracy(cm));
    for (int c = 0; c < cm.num_classes; ++c)
      std::printf("recall[%s]: %.6f\n", model.class_names[c].c_str(), recall[c]);
  } catch (const Error& e) {
    std::printf("balanced_accuracy: undefined (%s)\n", e.what());
  }
  std::printf("accuracy: %.6f\n", accuracy(cm));
  std::printf("confusion (rows = true, columns = predicted):\n");
  for (int t = 0; t < cm.num_classes; ++t) {
    std::printf("  %-28s", model.class_names[t].c_str());
    for (int p = 0; p < cm.num_classes; ++p) std::printf(" %6llu", static_cast<unsigned long long>(cm.at(t, p)));
    std::printf("\n");
  }
  return kExitOk;
}

int run_bench(const std::string& config_path, std::string output, int threads) {
  auto cfg = load_bench_config(config_path);
  if (threads > 0) cfg.threads = threads;
  if (!output.empty()) cfg.output_dir = output;
  if (cfg.output_dir.empty()) throw Error(Errc::ConfigInvalid, "no output directory (-o or output_dir)");
  const auto report = run_grid(cfg);
  write_report_bundle(report, cfg.output_dir);
  std::fputs(format_report_markdown(report).c_str(), stdout);
  std::printf("\nreports written to %s\n", cfg.output_dir.string().c_str());
  return report.has_failures() ? kExitPartial : kExitOk;
}

int run_plot(const std::string& manifest_path, const std::string& method, int bins, const std::string& output) {
  const auto files = plot_class_histograms(load_manifest(manifest_path), parse_extractor(method), output, bins);
  for (const auto& f : files) std::printf("%s\n", f.string().c_str());
  return kExitOk;
}

int run_import(const std::string& npz, const std::string& output, std::size_t max_per_split) {
  PathMnistImport opts;
  opts.max_per_split = max_per_split;
  const auto m = import_pathmnist(npz, output, opts);
  std::printf("%zu patches -> %s\n", m.size(), (fs::path(output) / "manifest.csv").string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Color-statistics classification of histopathology patches"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP worker threads (0: runtime default)");

  std::string root, output, input, method = "rgb-hist", mapping = "pathmnist-binary";
  int bins = kDefaultBins;
  std::size_t max_per_split = 0;

  auto* manifest_cmd = app.add_subcommand("manifest", "Build a manifest from a <root>/<class>/<image> layout");
  manifest_cmd->add_option("root", root, "Dataset root")->required();
  manifest_cmd->add_option("-o,--output", output, "Manifest CSV to write")->required();

  auto* relabel_cmd = app.add_subcommand("relabel", "Apply a label mapping to a manifest");
  relabel_cmd->add_option("manifest", input, "Input manifest")->required();
  relabel_cmd->add_option("--mapping", mapping, "Mapping name")->check(CLI::IsMember({"pathmnist-binary"}));
  relabel_cmd->add_option("-o,--output", output, "Manifest CSV to write")->required();

  auto* extract_cmd = app.add_subcommand("extract", "Extract features into a cache file");
  extract_cmd->add_option("manifest", input, "Manifest CSV")->required();
  extract_cmd->add_option("--method", method, "moments | rgb-hist | hsv-hist")
      ->check(CLI::IsMember({"moments", "rgb-hist", "hsv-hist"}));
  extract_cmd->add_option("--bins", bins, "Histogram bins per channel")->check(CLI::Range(1, kMaxBins));
  extract_cmd->add_option("-o,--output", output, "Cache file to write")->required();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Fit a classifier on cached features");
  train_cmd->add_option("cache", ta.cache, "Feature cache")->required();
  train_cmd->add_option("--clf", ta.clf, "knn | svm | rf | gbt")->check(CLI::IsMember({"knn", "svm", "rf", "gbt"}));
  train_cmd->add_option("--seed", ta.seed, "Seed for the split and the forest");
  train_cmd->add_option("--manifest", ta.manifest, "Manifest the cache was built from (class names, split tags)");
  train_cmd->add_option("--split", ta.split, "all | stratified | manifest")
      ->check(CLI::IsMember({"all", "stratified", "manifest"}));
  train_cmd->add_option("--train-fraction", ta.train_fraction, "Per-class training fraction")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--k", ta.k, "KNN neighbours");
  train_cmd->add_option("--kernel", ta.kernel, "SVM kernel: rbf | linear");
  train_cmd->add_option("--c", ta.c, "SVM box constraint");
  train_cmd->add_option("--gamma", ta.gamma, "RBF gamma (0: 1 / (d * variance))");
  train_cmd->add_option("--tol", ta.tol, "SMO KKT tolerance");
  train_cmd->add_option("--trees", ta.trees, "Random forest size");
  train_cmd->add_option("--max-features", ta.max_features, "Candidate features per node (0: ceil(sqrt(d)))");
  train_cmd->add_option("--max-depth", ta.max_depth, "Forest depth limit (0: grow until pure)");
  train_cmd->add_option("--rounds", ta.rounds, "Boosting rounds");
  train_cmd->add_option("--learning-rate", ta.learning_rate, "Boosting shrinkage");
  train_cmd->add_option("--gbt-depth", ta.gbt_depth, "Boosted tree depth");
  train_cmd->add_option("--lambda", ta.lambda, "Boosting L2 leaf penalty");
  train_cmd->add_option("-o,--output", ta.output, "Model file to write")->required();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Balanced accuracy and confusion matrix of a model");
  eval_cmd->add_option("model", ea.model, "Model file")->required();
  eval_cmd->add_option("cache", ea.cache, "Feature cache")->required();
  eval_cmd->add_option("--split", ea.split, "all | train | test (default: test if the model holds a split)")
      ->check(CLI::IsMember({"all", "train", "test"}));
  eval_cmd->add_option("--manifest", ea.manifest, "Manifest, needed for models trained on its split tags");

  std::string config;
  auto* bench_cmd = app.add_subcommand("bench", "Run the full benchmark grid");
  bench_cmd->add_option("config", config, "JSON config")->required();
  bench_cmd->add_option("-o,--output", output, "Report directory");

  auto* plot_cmd = app.add_subcommand("plot", "Per-class mean histogram SVGs");
  plot_cmd->add_option("manifest", input, "Manifest CSV")->required();
  plot_cmd->add_option("--method", method, "rgb-hist | hsv-hist")->check(CLI::IsMember({"rgb-hist", "hsv-hist"}));
  plot_cmd->add_option("--bins", bins, "Histogram bins per channel")->check(CLI::Range(1, kMaxBins));
  plot_cmd->add_option("-o,--output", output, "Output directory")->required();

  auto* import_cmd = app.add_subcommand("import-pathmnist", "Unpack pathmnist.npz into PNGs and a manifest");
  import_cmd->add_option("npz", input, "pathmnist.npz")->required();
  import_cmd->add_option("-o,--output", output, "Output directory")->required();
  import_cmd->add_option("--max-per-split", max_per_split, "Keep only the first N patches of each split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*manifest_cmd) return run_manifest(root, output);
    if (*relabel_cmd) return run_relabel(input, mapping, output);
    if (*extract_cmd) return run_extract(input, method, bins, output);
    if (*train_cmd) return run_train(ta);
    if (*eval_cmd) return run_eval(ea);
    if (*bench_cmd) return run_bench(config, output, threads);
    if (*plot_cmd) return run_plot(input, method, bins, output);
    if (*import_cmd) return run_import(input, output, max_per_split);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
