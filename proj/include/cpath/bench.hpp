#pragma once

// Benchmark grid over (task x feature method x classifier).
//
// Config is a JSON document:
//   {
//     "seed": 0, "bins": 16, "threads": 0,
//     "methods": ["moments", "rgb-hist", "hsv-hist"],
//     "classifiers": ["knn", "svm", "rf", "gbt"],
//     "tasks": [
//       {"name": "pathmnist-2", "manifest": "data/manifest.csv",
//        "mapping": "pathmnist-binary", "category": "Diagnostic Class",
//        "split": {"mode": "manifest"}},
//       {"name": "toy", "manifest": "toy.csv",
//        "split": {"mode": "stratified", "train_fraction": 0.8}}
//     ],
//     "knn": {"k": 5},
//     "svm": {"kernel": "rbf", "c": 1.0, "gamma": "auto", "tol": 1e-3},
//     "rf": {"trees": 100, "max_features": 0, "max_depth": 0},
//     "gbt": {"rounds": 100, "learning_rate": 0.1, "max_depth": 3, "lambda": 1.0},
//     "cache_dir": "caches"
//   }
// Relative paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpath/evaluation.hpp"
#include "cpath/features.hpp"
#include "cpath/model.hpp"

namespace cpath {

struct BenchTask {
  std::string name;
  std::filesystem::path manifest;
  std::optional<LabelMapping> mapping;
  std::string category;
  SplitSpec split;
};

struct BenchConfig {
  std::vector<BenchTask> tasks;
  std::vector<Extractor> methods;
  std::vector<ClassifierKind> classifiers;
  ClassifierConfig hyper;
  int bins = kDefaultBins;
  std::uint64_t seed = 0;
  int threads = 0;  // <= 0: OpenMP default
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;  // empty: features are recomputed every run

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Throws ConfigInvalid on malformed JSON, unknown keys or bad values.
BenchConfig parse_bench_config(std::string_view json, const std::filesystem::path& base_dir);
BenchConfig load_bench_config(const std::filesystem::path& path);

struct CellResult {
  std::string task;
  Extractor method = Extractor::Moments;
  ClassifierKind classifier = ClassifierKind::Knn;
  bool ok = false;
  std::string error;

  std::vector<std::string> class_names;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double balanced_accuracy = 0.0;
  std::vector<double> recalls;
  ConfusionMatrix confusion;

  double extract_seconds = 0.0;
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct AggregateCell {
  Extractor method = Extractor::Moments;
  ClassifierKind classifier = ClassifierKind::Knn;
  std::size_t tasks = 0;  // successful cells that entered the statistic
  double mean = 0.0;
  double stddev = 0.0;    // population
};

struct TaskInfo {
  std::string name;
  std::string category;
  int num_classes = 0;
};

/// Cells are ordered task-major, then method, then classifier, in config order.
struct BenchmarkReport {
  std::vector<TaskInfo> tasks;
  std::vector<Extractor> methods;
  std::vector<ClassifierKind> classifiers;
  std::vector<CellResult> cells;

  const CellResult& cell(std::size_t task, std::size_t method, std::size_t classifier) const;
  bool has_failures() const;

  /// One entry per (method, classifier), classifier-major like the markdown columns.
  std::vector<AggregateCell> aggregate() const;
};

/// Runs the grid. Each task is split once and the split is shared by all of
/// its cells. Failures are recorded per cell; only an invalid config throws.
BenchmarkReport run_grid(const BenchConfig& config);

enum class ReportFormat { Csv, Markdown };

/// Deterministic; timings are left out (see format_timings_csv).
std::string format_report_csv(const BenchmarkReport& report);
std::string format_report_markdown(const BenchmarkReport& report);
std::string format_timings_csv(const BenchmarkReport& report);
/// Best cell per task, chosen by argmax over test-set balanced accuracy.
std::string format_best_markdown(const BenchmarkReport& report);

void emit_report(const BenchmarkReport& report, ReportFormat format, const std::filesystem::path& path);

/// Writes report.csv, report.md, best.md and timings.csv into dir.
void write_report_bundle(const BenchmarkReport& report, const std::filesystem::path& dir);

/// Integer percent, rounded half-up: 0.87 -> "87%", 0.865 -> "87%".
std::string format_percent(double fraction);

/// Writes <method>_<channel>.svg for each of the three channels and returns
/// the paths. Only histogram methods are accepted.
std::vector<std::filesystem::path> plot_class_histograms(const DatasetManifest& manifest, Extractor method,
                                                         const std::filesystem::path& output_dir,
                                                         int bins = kDefaultBins);

}  // namespace cpath
