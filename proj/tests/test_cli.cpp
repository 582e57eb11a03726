#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cpath/binary_io.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args, const fs::path& dir) {
  const auto log = dir / "cli.log";
  const std::string cmd = std::string(CPATH_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

}  // namespace

TEST_CASE("end-to-end command line workflow") {
  synth::TempDir tmp("cli");
  const auto d = tmp.path.string();
  synth::ChromaticShift gen;
  gen.patches = 60;
  gen.side = 16;
  gen.write(tmp.path / "data");
  fs::remove(tmp.path / "data" / "manifest.csv");

  auto r = cli("manifest " + d + "/data -o " + d + "/m.csv", tmp.path);
  REQUIRE(r.code == 0);
  r = cli("extract " + d + "/m.csv --method hsv-hist --bins 16 -o " + d + "/f.cfc", tmp.path);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("60 rows x 54 features") != std::string::npos);

  r = cli("train " + d + "/f.cfc --clf rf --trees 20 --seed 3 --manifest " + d + "/m.csv -o " + d + "/rf.cpmd", tmp.path);
  REQUIRE(r.code == 0);
  r = cli("eval " + d + "/rf.cpmd " + d + "/f.cfc --split test", tmp.path);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("split: test (12 rows)") != std::string::npos);
  CHECK(r.out.find("balanced_accuracy: 1.000000") != std::string::npos);
  CHECK(r.out.find("shift_b") != std::string::npos);

  for (const char* clf : {"knn", "svm", "gbt"}) {
    r = cli("train " + d + "/f.cfc --clf " + clf + " --seed 3 -o " + d + "/m.cpmd", tmp.path);
    CHECK(r.code == 0);
    CHECK(cli("eval " + d + "/m.cpmd " + d + "/f.cfc", tmp.path).code == 0);
  }

  r = cli("plot " + d + "/m.csv --method rgb-hist -o " + d + "/plots", tmp.path);
  CHECK(r.code == 0);
  CHECK(fs::exists(tmp.path / "plots" / "rgb-hist_G.svg"));

  std::ofstream(tmp.path / "bench.json") << R"({"seed": 1, "methods": ["moments"], "classifiers": ["knn"],
    "tasks": [{"name": "toy", "manifest": "m.csv"}]})";
  r = cli("bench " + d + "/bench.json -o " + d + "/out", tmp.path);
  CHECK(r.code == 0);
  CHECK(fs::exists(tmp.path / "out" / "report.csv"));

  std::ofstream(tmp.path / "bad.csv") << "path,label\nnothing.png,x\nalso.png,y\n";
  std::ofstream(tmp.path / "partial.json") << R"({"methods": ["moments"], "classifiers": ["knn"],
    "tasks": [{"name": "toy", "manifest": "m.csv"}, {"name": "broken", "manifest": "bad.csv"}]})";
  r = cli("bench " + d + "/partial.json -o " + d + "/out2", tmp.path);
  CHECK(r.code == 2);
  CHECK(fs::exists(tmp.path / "out2" / "report.csv"));

  std::ofstream(tmp.path / "invalid.json") << R"({"tasks": []})";
  CHECK(cli("bench " + d + "/invalid.json -o " + d + "/out3", tmp.path).code == 1);
  CHECK(cli("extract " + d + "/missing.csv -o " + d + "/x.cfc", tmp.path).code == 1);
  CHECK(cli("eval " + d + "/m.csv " + d + "/f.cfc", tmp.path).code == 1);
  CHECK(cli("train " + d + "/f.cfc --clf nope -o x", tmp.path).code == 1);
}
