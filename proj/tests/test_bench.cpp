#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>

#include "cpath/bench.hpp"
#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"
#include "support/synthetic.hpp"

using namespace cpath;
namespace fs = std::filesystem;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

CellResult ok_cell(const std::string& task, Extractor m, ClassifierKind k, double ba) {
  CellResult c;
  c.task = task;
  c.method = m;
  c.classifier = k;
  c.ok = true;
  c.balanced_accuracy = ba;
  c.class_names = {"a", "b"};
  c.recalls = {ba, ba};
  c.confusion = {2, {1, 0, 0, 1}};
  return c;
}

/// Small two-class patch set, plus a third directory-level task with one
/// undecodable image.
struct Fixture {
  synth::TempDir tmp{"bench"};
  fs::path good, bad;

  Fixture() {
    synth::ChromaticShift gen;
    gen.patches = 40;
    gen.side = 16;
    gen.write(tmp.path / "good");
    good = tmp.path / "good" / "manifest.csv";

    synth::ChromaticShift other = gen;
    other.seed = 9;
    auto m = other.write(tmp.path / "bad");
    io::write_file((tmp.path / "bad" / "shift_a" / "0.png").string(), std::string("\x89PNG\r\n\x1a\ngarbage", 15));
    bad = tmp.path / "bad" / "manifest.csv";
  }

  std::string config(const std::string& extra = "") const {
    return R"({"seed": 5, "methods": ["moments", "hsv-hist"], "classifiers": ["knn", "rf"],
      "rf": {"trees": 10}, "tasks": [
        {"name": "good", "manifest": ")" + good.string() + R"(", "category": "Toy"},
        {"name": "bad", "manifest": ")" + bad.string() + R"("}]})" + extra;
  }
};

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_bench_config(R"({
    "seed": 3, "bins": 8, "methods": ["rgb-hist"], "classifiers": ["svm", "gbt"],
    "tasks": [{"name": "t", "manifest": "m.csv", "mapping": "pathmnist-binary",
               "split": {"mode": "manifest"}},
              {"name": "u", "manifest": "/abs/m.csv", "mapping": {"x": "y"},
               "split": {"mode": "stratified", "train_fraction": 0.7, "seed": 11}}],
    "svm": {"c": 2.0, "gamma": 0.25}, "gbt": {"rounds": 7}, "cache_dir": "c"})",
                                      "/base");
  CHECK(cfg.seed == 3);
  CHECK(cfg.bins == 8);
  CHECK(cfg.methods == std::vector<Extractor>{Extractor::RgbHist});
  CHECK(cfg.classifiers == std::vector<ClassifierKind>{ClassifierKind::Svm, ClassifierKind::Gbt});
  CHECK(cfg.tasks[0].manifest == fs::path("/base/m.csv"));
  CHECK(cfg.tasks[0].mapping->at("Debris") == "Abnormal");
  CHECK(cfg.tasks[0].split.mode == SplitSpec::Mode::ManifestProvided);
  CHECK(cfg.tasks[1].manifest == fs::path("/abs/m.csv"));
  CHECK(cfg.tasks[1].split.train_fraction == 0.7);
  CHECK(cfg.tasks[1].split.seed == 11);
  CHECK(cfg.hyper.svm.c == 2.0);
  CHECK(cfg.hyper.svm.gamma == 0.25);
  CHECK(cfg.hyper.gbt.rounds == 7);
  CHECK(cfg.hyper.rf.seed == 3);
  CHECK(cfg.cache_dir == fs::path("/base/c"));

  const auto defaults = parse_bench_config(R"({"tasks": [{"name": "t", "manifest": "m.csv"}]})", "");
  CHECK(defaults.methods.size() == 3);
  CHECK(defaults.classifiers.size() == 4);
  CHECK(defaults.tasks[0].split.train_fraction == 0.8);

  for (const char* bad : {
           "{",
           R"({"tasks": []})",
           R"({"methods": [], "tasks": [{"name": "t", "manifest": "m"}]})",
           R"({"classifiers": ["xgb"], "tasks": [{"name": "t", "manifest": "m"}]})",
           R"({"tasks": [{"name": "t", "manifest": "m"}], "typo": 1})",
           R"({"tasks": [{"name": "t", "manifest": "m"}, {"name": "t", "manifest": "n"}]})",
           R"({"tasks": [{"name": "t", "manifest": "m", "split": {"mode": "kfold"}}]})",
           R"({"tasks": [{"name": "t", "manifest": "m", "mapping": "unknown"}]})",
           R"({"bins": 0, "tasks": [{"name": "t", "manifest": "m"}]})",
           R"({"knn": {"k": 0}, "tasks": [{"name": "t", "manifest": "m"}]})",
           R"({"seed": "x", "tasks": [{"name": "t", "manifest": "m"}]})",
       })
    CHECK(code_of([&] { parse_bench_config(bad, "."); }) == Errc::ConfigInvalid);
}

TEST_CASE("percent rendering") {
  CHECK(format_percent(0.87) == "87%");
  CHECK(format_percent(0.865) == "87%");
  CHECK(format_percent(0.8649) == "86%");
  CHECK(format_percent(1.0) == "100%");
  CHECK(format_percent(0.0) == "0%");
}

TEST_CASE("report formatting and aggregate") {
  BenchmarkReport r;
  r.methods = {Extractor::Moments, Extractor::HsvHist};
  r.classifiers = {ClassifierKind::Rf};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  std::vector<double> col0, col1;
  for (int t = 0; t < 10; ++t) {
    const auto name = "task" + std::to_string(t);
    r.tasks.push_back({name, "Cat", 2});
    col0.push_back(u(rng));
    col1.push_back(u(rng));
    r.cells.push_back(ok_cell(name, Extractor::Moments, ClassifierKind::Rf, col0.back()));
    r.cells.push_back(ok_cell(name, Extractor::HsvHist, ClassifierKind::Rf, col1.back()));
  }
  const auto agg = r.aggregate();
  REQUIRE(agg.size() == 2);
  for (const auto& [a, col] : {std::pair{agg[0], col0}, std::pair{agg[1], col1}}) {
    double mean = 0;
    for (double v : col) mean += v;
    mean /= col.size();
    double ss = 0;
    for (double v : col) ss += (v - mean) * (v - mean);
    CHECK(a.tasks == 10);
    CHECK(std::fabs(a.mean - mean) <= 1e-12);
    CHECK(std::fabs(a.stddev - std::sqrt(ss / col.size())) <= 1e-12);
  }
  const auto md = format_report_markdown(r);
  CHECK(md.find("Overall Mean ± STD") != std::string::npos);
  CHECK(md.find("RF Mom.") != std::string::npos);
  CHECK(format_report_markdown(r) == md);
  CHECK(format_report_csv(r) == format_report_csv(r));

  BenchmarkReport one;
  one.methods = {Extractor::RgbHist};
  one.classifiers = {ClassifierKind::Svm};
  one.tasks = {{"only", "", 2}};
  one.cells = {ok_cell("only", Extractor::RgbHist, ClassifierKind::Svm, 0.87)};
  CHECK(format_report_markdown(one).find("87%") != std::string::npos);
  CHECK(format_report_markdown(one).find("87.0±0") != std::string::npos);
  const auto csv = format_report_csv(one);
  CHECK(csv.find("only,rgb-hist,svm,ok,0.87,") != std::string::npos);
  CHECK(csv.find("a;b") != std::string::npos);
  CHECK(one.aggregate().size() == 1);

  one.cells[0].ok = false;
  one.cells[0].error = "CorruptImage: x.png, broken";
  CHECK(format_report_csv(one).find("\"CorruptImage: x.png, broken\"") != std::string::npos);
  CHECK(format_report_markdown(one).find("ERR") != std::string::npos);
}

TEST_CASE("run_grid isolates failures and is deterministic") {
  Fixture fx;
  const auto cfg = parse_bench_config(fx.config(), "");
  const auto report = run_grid(cfg);
  REQUIRE(report.cells.size() == 8);
  REQUIRE(report.tasks.size() == 2);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& good = report.cell(0, m, k);
      CHECK(good.ok);
      CHECK(good.n_test == 8);
      CHECK(good.balanced_accuracy >= 0.9);
      CHECK(good.confusion.total() == 8);
      const auto& bad = report.cell(1, m, k);
      CHECK_FALSE(bad.ok);
      CHECK(bad.error.find("CorruptImage") != std::string::npos);
    }
  CHECK(report.has_failures());
  CHECK(report.tasks[0].num_classes == 2);

  const auto csv = format_report_csv(report);
  for (int threads : {1, 3}) {
    auto c = cfg;
    c.threads = threads;
    CHECK(format_report_csv(run_grid(c)) == csv);
  }

  auto cached = cfg;
  cached.cache_dir = fx.tmp.path / "caches";
  CHECK(format_report_csv(run_grid(cached)) == csv);
  CHECK(fs::exists(cached.cache_dir / "good.moments.b16.cfc"));
  CHECK(format_report_csv(run_grid(cached)) == csv);

  write_report_bundle(report, fx.tmp.path / "out");
  for (const char* f : {"report.csv", "report.md", "best.md", "timings.csv"}) CHECK(fs::exists(fx.tmp.path / "out" / f));
  CHECK(io::read_file((fx.tmp.path / "out" / "report.csv").string()) == csv);
}

TEST_CASE("run_grid with one cell") {
  Fixture fx;
  auto cfg = parse_bench_config(fx.config(), "");
  cfg.tasks.resize(1);
  cfg.methods = {Extractor::RgbHist};
  cfg.classifiers = {ClassifierKind::Knn};
  const auto r = run_grid(cfg);
  CHECK(r.cells.size() == 1);
  CHECK(r.aggregate().size() == 1);
  CHECK_FALSE(r.has_failures());

  cfg.tasks[0].manifest = fx.tmp.path / "nope.csv";
  const auto missing = run_grid(cfg);
  CHECK_FALSE(missing.cells[0].ok);
  CHECK(missing.cells[0].error.find("Io") != std::string::npos);
}

TEST_CASE("class histogram plots") {
  Fixture fx;
  const auto m = load_manifest(fx.good);
  const auto files = plot_class_histograms(m, Extractor::RgbHist, fx.tmp.path / "plots");
  REQUIRE(files.size() == 3);
  const auto svg = io::read_file(files[0].string());
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.find("shift_a (n=20)") != std::string::npos);
  std::size_t bars = 0;
  for (std::size_t pos = 0; (pos = svg.find("<rect x=\"", pos)) != std::string::npos; ++pos) ++bars;
  CHECK(bars == 2 * 16 + 2);
  CHECK(plot_class_histograms(m, Extractor::RgbHist, fx.tmp.path / "plots2")[0].filename() == "rgb-hist_R.svg");
  CHECK(io::read_file((fx.tmp.path / "plots2" / "rgb-hist_R.svg").string()) == svg);
  CHECK(code_of([&] { plot_class_histograms(m, Extractor::Moments, fx.tmp.path / "p"); }) == Errc::InvalidArgument);
}
