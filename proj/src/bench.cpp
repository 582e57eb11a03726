#include "cpath/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"
#include "cpath/feature_cache.hpp"

namespace cpath {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& detail) { throw Error(Errc::ConfigInvalid, detail); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key + " has the wrong type");
  }
}

fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

SplitSpec parse_split(const json& j, std::uint64_t default_seed) {
  SplitSpec spec;
  spec.seed = default_seed;
  if (j.is_null()) return spec;
  check_keys(j, "split", {"mode", "train_fraction", "seed"});
  const auto mode = get_as<std::string>(j, "mode", "split", "stratified");
  if (mode == "stratified" || mode == "random") spec.mode = SplitSpec::Mode::RandomStratified;
  else if (mode == "manifest") spec.mode = SplitSpec::Mode::ManifestProvided;
  else config_error("split.mode must be 'stratified' or 'manifest', got '" + mode + "'");
  spec.train_fraction = get_as<double>(j, "train_fraction", "split", spec.train_fraction);
  spec.seed = get_as<std::uint64_t>(j, "seed", "split", default_seed);
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) config_error("split.train_fraction must lie in (0, 1)");
  return spec;
}

std::optional<LabelMapping> parse_mapping(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    if (j.get<std::string>() == "pathmnist-binary") return pathmnist_binary_mapping();
    config_error("unknown named mapping '" + j.get<std::string>() + "'");
  }
  if (!j.is_object()) config_error("mapping must be a name or an object of label -> label");
  LabelMapping m;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) config_error("mapping target for '" + key + "' must be a string");
    m[key] = value.get<std::string>();
  }
  return m;
}

void parse_hyper(const json& root, ClassifierConfig& h, std::uint64_t seed) {
  if (root.contains("knn")) {
    const auto& j = root["knn"];
    check_keys(j, "knn", {"k"});
    h.knn.k = get_as<int>(j, "k", "knn", h.knn.k);
  }
  if (root.contains("svm")) {
    const auto& j = root["svm"];
    check_keys(j, "svm", {"kernel", "c", "gamma", "tol", "max_iter"});
    if (j.contains("kernel")) {
      try {
        h.svm.kernel = parse_kernel(get_as<std::string>(j, "kernel", "svm", "rbf"));
      } catch (const Error& e) {
        config_error(e.detail());
      }
    }
    h.svm.c = get_as<double>(j, "c", "svm", h.svm.c);
    if (j.contains("gamma")) {
      if (j["gamma"].is_string()) {
        if (j["gamma"].get<std::string>() != "auto") config_error("svm.gamma must be a number or \"auto\"");
        h.svm.gamma = 0.0;
      } else {
        h.svm.gamma = get_as<double>(j, "gamma", "svm", 0.0);
        if (!(h.svm.gamma > 0.0)) config_error("svm.gamma must be positive");
      }
    }
    h.svm.tol = get_as<double>(j, "tol", "svm", h.svm.tol);
    h.svm.max_iter = get_as<std::int64_t>(j, "max_iter", "svm", h.svm.max_iter);
  }
  h.rf.seed = seed;
  if (root.contains("rf")) {
    const auto& j = root["rf"];
    check_keys(j, "rf", {"trees", "max_features", "max_depth", "min_samples_split", "bootstrap", "seed"});
    h.rf.trees = get_as<int>(j, "trees", "rf", h.rf.trees);
    h.rf.max_features = get_as<int>(j, "max_features", "rf", h.rf.max_features);
    h.rf.max_depth = get_as<int>(j, "max_depth", "rf", h.rf.max_depth);
    h.rf.min_samples_split = get_as<int>(j, "min_samples_split", "rf", h.rf.min_samples_split);
    h.rf.bootstrap = get_as<bool>(j, "bootstrap", "rf", h.rf.bootstrap);
    h.rf.seed = get_as<std::uint64_t>(j, "seed", "rf", seed);
  }
  if (root.contains("gbt")) {
    const auto& j = root["gbt"];
    check_keys(j, "gbt", {"rounds", "learning_rate", "max_depth", "lambda", "min_child_weight"});
    h.gbt.rounds = get_as<int>(j, "rounds", "gbt", h.gbt.rounds);
    h.gbt.learning_rate = get_as<double>(j, "learning_rate", "gbt", h.gbt.learning_rate);
    h.gbt.max_depth = get_as<int>(j, "max_depth", "gbt", h.gbt.max_depth);
    h.gbt.lambda = get_as<double>(j, "lambda", "gbt", h.gbt.lambda);
    h.gbt.min_child_weight = get_as<double>(j, "min_child_weight", "gbt", h.gbt.min_child_weight);
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string file_stem_for(std::string_view name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

FeatureCache obtain_features(const BenchConfig& cfg, const BenchTask& task, const DatasetManifest& manifest,
                             Extractor method) {
  if (cfg.cache_dir.empty()) return compute_cache(manifest, method, cfg.bins);
  fs::create_directories(cfg.cache_dir);
  const auto path = cfg.cache_dir / (file_stem_for(task.name) + "." + std::string(extractor_name(method)) + ".b" +
                                     std::to_string(cfg.bins) + ".cfc");
  const auto labels = manifest.label_indices();
  if (fs::exists(path)) {
    try {
      auto cache = read_cache(path);
      const bool fits = cache.tag == method && cache.size() == manifest.size() &&
                        std::equal(cache.labels.begin(), cache.labels.end(), labels.begin(), labels.end(),
                                   [](std::uint32_t a, int b) { return static_cast<int>(a) == b; });
      if (fits && (method == Extractor::Moments || cache.bins == cfg.bins)) return cache;
    } catch (const Error&) {
      // unreadable cache: rebuild below
    }
  }
  return build_cache(manifest, method, cfg.bins, path);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, std::string_view sep, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += f(items[i]);
  }
  return out;
}

long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5 + 1e-9)); }

std::string fixed1_half_up(double x) {
  const long tenths = round_half_up(x * 10.0);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%ld.%ld", tenths / 10, std::labs(tenths % 10));
  return buf;
}

std::string_view method_short(Extractor e) {
  switch (e) {
    case Extractor::Moments: return "Mom.";
    case Extractor::RgbHist: return "RGB";
    case Extractor::HsvHist: return "HSV";
  }
  return "?";
}

std::string classifier_upper(ClassifierKind k) {
  std::string s(classifier_name(k));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::string md_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct ThreadCountGuard {
  int saved;
  explicit ThreadCountGuard(int threads) : saved(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadCountGuard() { omp_set_num_threads(saved); }
};

}  // namespace

void BenchConfig::validate() const {
  if (tasks.empty()) config_error("config lists no tasks");
  if (methods.empty()) config_error("config lists no feature methods");
  if (classifiers.empty()) config_error("config lists no classifiers");
  if (bins < 1 || bins > kMaxBins) config_error("bins must lie in [1, 256]");
  std::set<std::string> names;
  for (const auto& t : tasks) {
    if (t.name.empty()) config_error("task without a name");
    if (!names.insert(t.name).second) config_error("task name '" + t.name + "' appears twice");
    if (t.manifest.empty()) config_error("task '" + t.name + "' has no manifest");
  }
  if (std::set<Extractor>(methods.begin(), methods.end()).size() != methods.size())
    config_error("feature methods repeat");
  if (std::set<ClassifierKind>(classifiers.begin(), classifiers.end()).size() != classifiers.size())
    config_error("classifiers repeat");
  if (hyper.knn.k < 1) config_error("knn.k must be at least 1");
  if (!(hyper.svm.c > 0.0)) config_error("svm.c must be positive");
  if (!(hyper.svm.tol > 0.0)) config_error("svm.tol must be positive");
  if (hyper.rf.trees < 1) config_error("rf.trees must be at least 1");
  if (hyper.gbt.rounds < 1) config_error("gbt.rounds must be at least 1");
  if (!(hyper.gbt.learning_rate > 0.0)) config_error("gbt.learning_rate must be positive");
  if (hyper.gbt.max_depth < 1) config_error("gbt.max_depth must be at least 1");
  if (!(hyper.gbt.lambda >= 0.0)) config_error("gbt.lambda must be non-negative");
}

BenchConfig parse_bench_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, "config", {"seed", "bins", "threads", "methods", "classifiers", "tasks", "knn", "svm", "rf", "gbt",
                              "cache_dir", "output_dir"});
  BenchConfig cfg;
  cfg.seed = get_as<std::uint64_t>(root, "seed", "config", 0);
  cfg.bins = get_as<int>(root, "bins", "config", kDefaultBins);
  cfg.threads = get_as<int>(root, "threads", "config", 0);

  const auto methods = get_as<std::vector<std::string>>(root, "methods", "config", {"moments", "rgb-hist", "hsv-hist"});
  const auto classifiers = get_as<std::vector<std::string>>(root, "classifiers", "config", {"knn", "svm", "rf", "gbt"});
  try {
    for (const auto& m : methods) cfg.methods.push_back(parse_extractor(m));
    for (const auto& c : classifiers) cfg.classifiers.push_back(parse_classifier(c));
  } catch (const Error& e) {
    config_error(e.detail());
  }

  if (!root.contains("tasks") || !root["tasks"].is_array()) config_error("config needs a 'tasks' array");
  for (const auto& t : root["tasks"]) {
    check_keys(t, "task", {"name", "manifest", "mapping", "category", "split"});
    BenchTask task;
    task.name = get_as<std::string>(t, "name", "task", "");
    const auto manifest = get_as<std::string>(t, "manifest", "task", "");
    if (manifest.empty()) config_error("task '" + task.name + "' has no manifest");
    task.manifest = resolve_path(manifest, base_dir);
    task.mapping = parse_mapping(t.contains("mapping") ? t["mapping"] : json());
    task.category = get_as<std::string>(t, "category", "task", "");
    task.split = parse_split(t.contains("split") ? t["split"] : json(), cfg.seed);
    cfg.tasks.push_back(std::move(task));
  }
  parse_hyper(root, cfg.hyper, cfg.seed);
  if (root.contains("cache_dir")) cfg.cache_dir = resolve_path(get_as<std::string>(root, "cache_dir", "config", ""), base_dir);
  if (root.contains("output_dir"))
    cfg.output_dir = resolve_path(get_as<std::string>(root, "output_dir", "config", ""), base_dir);
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path.string());
  } catch (const Error& e) {
    config_error(e.detail());
  }
  return parse_bench_config(text, path.parent_path());
}

const CellResult& BenchmarkReport::cell(std::size_t task, std::size_t method, std::size_t classifier) const {
  return cells.at((task * methods.size() + method) * classifiers.size() + classifier);
}

bool BenchmarkReport::has_failures() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; });
}

std::vector<AggregateCell> BenchmarkReport::aggregate() const {
  std::vector<AggregateCell> out;
  for (std::size_t ci = 0; ci < classifiers.size(); ++ci) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      AggregateCell a;
      a.method = methods[mi];
      a.classifier = classifiers[ci];
      std::vector<double> values;
      for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        const auto& c = cell(ti, mi, ci);
        if (c.ok) values.push_back(c.balanced_accuracy);
      }
      a.tasks = values.size();
      if (!values.empty()) {
        double sum = 0.0;
        for (double v : values) sum += v;
        a.mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(values.size()));
      }
      out.push_back(a);
    }
  }
  return out;
}

BenchmarkReport run_grid(const BenchConfig& config) {
  config.validate();
  ThreadCountGuard threads(config.threads);

  BenchmarkReport report;
  report.methods = config.methods;
  report.classifiers = config.classifiers;
  const std::size_t per_task = config.methods.size() * config.classifiers.size();

  for (const auto& task : config.tasks) {
    TaskInfo info{task.name, task.category, 0};
    const std::size_t first = report.cells.size();
    for (auto m : config.methods)
      for (auto k : config.classifiers) {
        CellResult c;
        c.task = task.name;
        c.method = m;
        c.classifier = k;
        report.cells.push_back(std::move(c));
      }
    auto cell_at = [&](std::size_t mi, std::size_t ki) -> CellResult& {
      return report.cells[first + mi * config.classifiers.size() + ki];
    };
    auto fail_range = [&](std::size_t from, std::size_t to, const std::string& why) {
      for (std::size_t i = first + from; i < first + to; ++i) {
        report.cells[i].ok = false;
        report.cells[i].error = why;
      }
    };

    DatasetManifest manifest;
    std::vector<std::string> class_names;
    SplitIndices split;
    try {
      manifest = load_manifest(task.manifest);
      if (task.mapping) manifest = map_binary_labels(manifest, *task.mapping);
      class_names = manifest.class_names();
      info.num_classes = static_cast<int>(class_names.size());
      split = split_indices(manifest, task.split);
    } catch (const std::exception& e) {
      fail_range(0, per_task, e.what());
      report.tasks.push_back(info);
      continue;
    }
    report.tasks.push_back(info);

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const auto method = config.methods[mi];
      FeatureCache cache;
      double extract_seconds = 0.0;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        cache = obtain_features(config, task, manifest, method);
        extract_seconds = seconds_since(t0);
      } catch (const std::exception& e) {
        fail_range(mi * config.classifiers.size(), (mi + 1) * config.classifiers.size(), e.what());
        continue;
      }

      TrainingSet train;
      Matrix test_rows;
      std::vector<int> test_labels;
      try {
        const auto all = to_training_set(cache, class_names);
        train = all.subset(split.train);
        test_rows = all.features.select_rows(split.test);
        for (auto i : split.test) test_labels.push_back(all.labels[i]);
      } catch (const std::exception& e) {
        fail_range(mi * config.classifiers.size(), (mi + 1) * config.classifiers.size(), e.what());
        continue;
      }

      for (std::size_t ki = 0; ki < config.classifiers.size(); ++ki) {
        auto& cell = cell_at(mi, ki);
        cell.class_names = class_names;
        cell.n_train = train.size();
        cell.n_test = test_labels.size();
        cell.extract_seconds = extract_seconds;
        try {
          auto t0 = std::chrono::steady_clock::now();
          const auto model = fit(train, config.classifiers[ki], config.hyper);
          cell.train_seconds = seconds_since(t0);
          t0 = std::chrono::steady_clock::now();
          const auto predicted = predict_batch(model, test_rows);
          cell.predict_seconds = seconds_since(t0);
          cell.confusion = confusion(test_labels, predicted, info.num_classes);
          cell.recalls = per_class_recall(cell.confusion);
          cell.balanced_accuracy = balanced_accuracy(cell.confusion);
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
      }
    }
  }
  return report;
}

std::string format_report_csv(const BenchmarkReport& report) {
  std::string out =
      "task,method,classifier,status,balanced_accuracy,n_train,n_test,classes,per_class_recall,confusion,error\n";
  for (const auto& c : report.cells) {
    out += csv_field(c.task) + ',' + std::string(extractor_name(c.method)) + ',' +
           std::string(classifier_name(c.classifier)) + ',';
    if (c.ok) {
      std::string matrix;
      const int n = c.confusion.num_classes;
      for (int t = 0; t < n; ++t) {
        if (t) matrix += ';';
        for (int p = 0; p < n; ++p) {
          if (p) matrix += ' ';
          matrix += std::to_string(c.confusion.at(t, p));
        }
      }
      out += "ok," + fmt_double(c.balanced_accuracy) + ',' + std::to_string(c.n_train) + ',' +
             std::to_string(c.n_test) + ',' + csv_field(join(c.class_names, ";", [](const auto& s) { return s; })) +
             ',' + join(c.recalls, ";", fmt_double) + ',' + matrix + ",\n";
    } else {
      out += "error,,,,,,," + csv_field(c.error) + '\n';
    }
  }
  for (const auto& a : report.aggregate()) {
    out += "mean," + std::string(extractor_name(a.method)) + ',' + std::string(classifier_name(a.classifier)) + ',';
    out += a.tasks ? "ok," + fmt_double(a.mean) : std::string("error,");
    out += ",,,,,," + (a.tasks ? std::string() : std::string("no successful cells")) + '\n';
  }
  for (const auto& a : report.aggregate()) {
    if (!a.tasks) continue;
    out += "std," + std::string(extractor_name(a.method)) + ',' + std::string(classifier_name(a.classifier)) + ",ok," +
           fmt_double(a.stddev) + ",,,,,,\n";
  }
  return out;
}

std::string format_report_markdown(const BenchmarkReport& report) {
  std::string out = "| Task | Classes | Category |";
  std::string rule = "|---|---:|---|";
  for (auto k : report.classifiers)
    for (auto m : report.methods) {
      out += ' ' + classifier_upper(k) + ' ' + std::string(method_short(m)) + " |";
      rule += "---:|";
    }
  out += '\n' + rule + '\n';

  for (std::size_t ti = 0; ti < report.tasks.size(); ++ti) {
    const auto& t = report.tasks[ti];
    long best = -1;
    for (std::size_t ki = 0; ki < report.classifiers.size(); ++ki)
      for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
        const auto& c = report.cell(ti, mi, ki);
        if (c.ok) best = std::max(best, round_half_up(100.0 * c.balanced_accuracy));
      }
    out += "| " + md_escape(t.name) + " | " + (t.num_classes ? std::to_string(t.num_classes) : std::string("?")) +
           " | " + md_escape(t.category) + " |";
    for (std::size_t ki = 0; ki < report.classifiers.size(); ++ki)
      for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
        const auto& c = report.cell(ti, mi, ki);
        if (!c.ok) {
          out += " ERR |";
          continue;
        }
        const auto pct = format_percent(c.balanced_accuracy);
        out += round_half_up(100.0 * c.balanced_accuracy) == best ? " **" + pct + "** |" : " " + pct + " |";
      }
    out += '\n';
  }

  out += "| **Overall Mean ± STD** | | |";
  for (const auto& a : report.aggregate())
    out += a.tasks ? ' ' + fixed1_half_up(100.0 * a.mean) + "±" + std::to_string(round_half_up(100.0 * a.stddev)) + " |"
                   : std::string(" n/a |");
  out += '\n';

  if (report.has_failures()) {
    out += "\nFailed cells:\n\n";
    for (const auto& c : report.cells)
      if (!c.ok)
        out += "- " + md_escape(c.task) + " / " + std::string(extractor_name(c.method)) + " / " +
               std::string(classifier_name(c.classifier)) + ": " + c.error + '\n';
  }
  return out;
}

std::string format_best_markdown(const BenchmarkReport& report) {
  std::string out =
      "Best (feature, classifier) per task, selected by argmax of balanced accuracy on the test split.\n\n"
      "| Task | Classes | Category | Feature | Classifier | Balanced accuracy |\n"
      "|---|---:|---|---|---|---:|\n";
  std::vector<double> best_values;
  for (std::size_t ti = 0; ti < report.tasks.size(); ++ti) {
    const CellResult* best = nullptr;
    for (std::size_t ki = 0; ki < report.classifiers.size(); ++ki)
      for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
        const auto& c = report.cell(ti, mi, ki);
        if (c.ok && (!best || c.balanced_accuracy > best->balanced_accuracy)) best = &c;
      }
    const auto& t = report.tasks[ti];
    out += "| " + md_escape(t.name) + " | " + std::to_string(t.num_classes) + " | " + md_escape(t.category) + " | ";
    if (!best) {
      out += "n/a | n/a | ERR |\n";
      continue;
    }
    best_values.push_back(best->balanced_accuracy);
    out += std::string(extractor_name(best->method)) + " | " + classifier_upper(best->classifier) + " | " +
           format_percent(best->balanced_accuracy) + " |\n";
  }
  if (!best_values.empty()) {
    double mean = 0.0;
    for (double v : best_values) mean += v;
    mean /= static_cast<double>(best_values.size());
    double ss = 0.0;
    for (double v : best_values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(best_values.size()));
    out += "| **Mean ± STD** | | | | | " + fixed1_half_up(100.0 * mean) + "% ± " +
           std::to_string(round_half_up(100.0 * sd)) + "% |\n";
  }
  return out;
}

std::string format_timings_csv(const BenchmarkReport& report) {
  std::string out = "task,method,classifier,extract_seconds,train_seconds,predict_seconds\n";
  char buf[128];
  for (const auto& c : report.cells) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f\n", c.extract_seconds, c.train_seconds, c.predict_seconds);
    out += csv_field(c.task) + ',' + std::string(extractor_name(c.method)) + ',' +
           std::string(classifier_name(c.classifier)) + buf;
  }
  return out;
}

std::string format_percent(double fraction) { return std::to_string(round_half_up(100.0 * fraction)) + "%"; }

void emit_report(const BenchmarkReport& report, ReportFormat format, const fs::path& path) {
  io::write_file(path.string(), format == ReportFormat::Csv ? format_report_csv(report) : format_report_markdown(report));
}

void write_report_bundle(const BenchmarkReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
  emit_report(report, ReportFormat::Csv, dir / "report.csv");
  emit_report(report, ReportFormat::Markdown, dir / "report.md");
  io::write_file((dir / "best.md").string(), format_best_markdown(report));
  io::write_file((dir / "timings.csv").string(), format_timings_csv(report));
}

std::vector<fs::path> plot_class_histograms(const DatasetManifest& manifest, Extractor method, const fs::path& output_dir,
                                            int bins) {
  if (method == Extractor::Moments) throw Error(Errc::InvalidArgument, "plots need a histogram method");
  const auto cache = compute_cache(manifest, method, bins);
  const auto names = manifest.class_names();
  const std::size_t C = names.size(), B = static_cast<std::size_t>(bins);

  // means[c][ch * B + b]
  std::vector<std::vector<double>> means(C, std::vector<double>(3 * B, 0.0));
  std::vector<std::size_t> counts(C, 0);
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto c = cache.labels[i];
    ++counts[c];
    const auto row = cache.features.row(i);
    for (std::size_t j = 0; j < 3 * B; ++j) means[c][j] += row[j];
  }
  for (std::size_t c = 0; c < C; ++c)
    for (auto& v : means[c]) v /= static_cast<double>(counts[c]);

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const char* channels = method == Extractor::RgbHist ? "RGB" : "HSV";
  const double W = 720, H = 400, left = 60, right = 180, top = 40, bottom = 50;
  const double plot_w = W - left - right, plot_h = H - top - bottom;

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + output_dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  char buf[512];
  for (int ch = 0; ch < 3; ++ch) {
    double ymax = 0.0;
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t b = 0; b < B; ++b) ymax = std::max(ymax, means[c][ch * B + b]);
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.05;

    std::string svg;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  W, H, W, H);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">%s channel %c: per-class mean "
                  "histogram (%d bins)</text>\n",
                  left, std::string(extractor_name(method)).c_str(), channels[ch], bins);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  left, top + plot_h, left + plot_w, top + plot_h, left, top, left, top + plot_h);
    svg += buf;
    for (int tick = 0; tick <= 4; ++tick) {
      const double v = ymax * tick / 4.0, y = top + plot_h - plot_h * tick / 4.0;
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                    "text-anchor=\"end\">%.3f</text>\n",
                    left - 6, y + 4, v);
      svg += buf;
    }
    const double bw = plot_w / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b) {
      if (B <= 32 || b % (B / 16) == 0) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" "
                      "text-anchor=\"middle\">%zu</text>\n",
                      left + bw * (b + 0.5), top + plot_h + 14, b);
        svg += buf;
      }
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">bin</text>\n",
                  left + plot_w / 2, H - 12);
    svg += buf;
    for (std::size_t c = 0; c < C; ++c) {
      const char* color = palette[c % 10];
      std::snprintf(buf, sizeof buf, "<g fill=\"%s\" fill-opacity=\"0.45\" stroke=\"%s\">\n", color, color);
      svg += buf;
      for (std::size_t b = 0; b < B; ++b) {
        const double v = means[c][ch * B + b], h = plot_h * v / ymax;
        std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\"/>\n",
                      left + bw * b + 1, top + plot_h - h, bw - 2, h);
        svg += buf;
      }
      svg += "</g>\n";
      const double ly = top + 16.0 * c;
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" fill=\"%s\" fill-opacity=\"0.45\" "
                    "stroke=\"%s\"/>\n<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\">",
                    left + plot_w + 16, ly, color, color, left + plot_w + 34, ly + 10);
      svg += buf;
      svg += xml_escape(names[c]) + " (n=" + std::to_string(counts[c]) + ")</text>\n";
    }
    svg += "</svg>\n";
    const auto path = output_dir / (std::string(extractor_name(method)) + "_" + channels[ch] + ".svg");
    io::write_file(path.string(), svg);
    written.push_back(path);
  }
  return written;
}

}  // namespace cpath
