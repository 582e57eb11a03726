#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "cpath/error.hpp"
#include "cpath/evaluation.hpp"
#include "support/oracles.hpp"

using namespace cpath;

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

ConfusionMatrix from_counts(int c, std::vector<std::uint64_t> counts) { return {c, std::move(counts)}; }

DatasetManifest manifest_with(const std::map<std::string, int>& sizes) {
  DatasetManifest m;
  for (const auto& [label, n] : sizes)
    for (int i = 0; i < n; ++i) m.records.push_back({label + "/" + std::to_string(i) + ".png", label, SplitTag::None});
  return m;
}

}  // namespace

TEST_CASE("confusion matrix") {
  const std::vector<int> t{0, 1, 1, 0, 1, 1};
  CHECK(confusion(t, t, 2).counts == std::vector<std::uint64_t>{2, 0, 0, 4});
  const std::vector<int> all_one(6, 1);
  CHECK(confusion(t, all_one, 2).counts == std::vector<std::uint64_t>{0, 2, 0, 4});
  CHECK(code_of([&] { confusion(t, std::vector<int>{0}, 2); }) == Errc::DimensionMismatch);
  CHECK(code_of([&] { confusion(t, std::vector<int>(6, 2), 2); }) == Errc::InvalidArgument);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 4);
  std::vector<int> a, b;
  for (int i = 0; i < 500; ++i) {
    a.push_back(u(rng));
    b.push_back(u(rng));
  }
  CHECK(confusion(a, b, 5).counts == oracle::confusion_counts(a, b, 5));
}

TEST_CASE("balanced accuracy examples") {
  CHECK(balanced_accuracy(from_counts(3, {4, 0, 0, 0, 2, 0, 0, 0, 9})) == 1.0);
  CHECK(balanced_accuracy(from_counts(2, {1, 1, 0, 2})) == 0.75);
  CHECK(code_of([] { balanced_accuracy(from_counts(2, {1, 1, 0, 0})); }) == Errc::ZeroSupportClass);
}

TEST_CASE("balanced accuracy is invariant to duplicating one class") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> u(0, 3);
  std::vector<int> t, p;
  for (int i = 0; i < 200; ++i) {
    t.push_back(u(rng));
    p.push_back(u(rng));
  }
  const double base = balanced_accuracy(confusion(t, p, 4));
  for (int k : {2, 3, 7}) {
    auto t2 = t, p2 = p;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] == 2)
        for (int r = 1; r < k; ++r) {
          t2.push_back(t[i]);
          p2.push_back(p[i]);
        }
    CHECK(std::fabs(balanced_accuracy(confusion(t2, p2, 4)) - base) <= 1e-15);
  }
}

TEST_CASE("balanced accuracy equals accuracy on balanced data") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> u(0, 2);
  std::vector<int> t, p;
  for (int i = 0; i < 300; ++i) {
    t.push_back(i % 3);
    p.push_back(u(rng));
  }
  const auto cm = confusion(t, p, 3);
  CHECK(balanced_accuracy(cm) == doctest::Approx(accuracy(cm)).epsilon(1e-15));
}

TEST_CASE("nine-class random predictions sit near 1/9") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> u(0, 8);
  std::vector<int> t, p;
  for (int i = 0; i < 10000; ++i) {
    t.push_back(i % 9);
    p.push_back(u(rng));
  }
  CHECK(std::fabs(balanced_accuracy(confusion(t, p, 9)) - 1.0 / 9.0) <= 0.03);
}

TEST_CASE("PathMNIST binary mapping") {
  const auto mapping = pathmnist_binary_mapping();
  CHECK(mapping.at("Lymphocytes") == "Abnormal");
  CHECK(mapping.at("Adipose") == "Normal");
  CHECK(mapping.size() == 9);
  CHECK(pathmnist_class_names().size() == 9);

  std::map<std::string, int> sizes;
  int k = 3;
  for (const auto& name : pathmnist_class_names()) sizes[name] = k++;
  const auto m = manifest_with(sizes);
  const auto mapped = map_binary_labels(m, mapping);
  CHECK(mapped.class_names() == std::vector<std::string>{"Abnormal", "Normal"});
  REQUIRE(mapped.size() == m.size());
  std::map<std::string, int> want;
  for (const auto& [name, n] : sizes) want[mapping.at(name)] += n;
  std::map<std::string, int> got;
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(mapped.records[i].path == m.records[i].path);
    ++got[mapped.records[i].label];
  }
  CHECK(got == want);

  LabelMapping identity;
  for (const auto& name : pathmnist_class_names()) identity[name] = name;
  CHECK(map_binary_labels(m, identity).records == m.records);

  auto extra = m;
  extra.records.push_back({"x.png", "Stroma", SplitTag::None});
  CHECK(code_of([&] { map_binary_labels(extra, mapping); }) == Errc::UnmappedLabel);
}

TEST_CASE("stratified split") {
  const auto m = manifest_with({{"A", 10}, {"B", 10}});
  const auto [train, test] = stratified_split(m, {SplitSpec::Mode::RandomStratified, 0.8, 1});
  CHECK(train.size() == 16);
  CHECK(test.size() == 4);
  for (const auto& part : {train, test}) {
    std::map<std::string, int> n;
    for (const auto& r : part.records) ++n[r.label];
    CHECK(n["A"] == n["B"]);
  }
  const auto again = stratified_split(m, {SplitSpec::Mode::RandomStratified, 0.8, 1});
  CHECK(again.first.records == train.records);

  const auto sized = manifest_with({{"a", 7}, {"b", 13}, {"c", 40}});
  const auto idx = split_indices(sized, {SplitSpec::Mode::RandomStratified, 0.7, 3});
  const auto labels = sized.label_indices();
  std::vector<int> per_class(3, 0);
  for (auto i : idx.train) ++per_class[labels[i]];
  CHECK(per_class == std::vector<int>{5, 9, 28});

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = split_indices(sized, {SplitSpec::Mode::RandomStratified, 0.5, seed});
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == sized.size());
  }

  CHECK(code_of([] { split_indices(manifest_with({{"a", 1}, {"b", 5}}), {}); }) == Errc::TinyClass);
  // Extreme fractions still leave one row on each side.
  const auto edge = split_indices(manifest_with({{"a", 2}, {"b", 3}}), {SplitSpec::Mode::RandomStratified, 0.99, 0});
  CHECK(edge.test.size() == 2);
}

TEST_CASE("manifest-provided split") {
  DatasetManifest m;
  m.records = {{"a.png", "x", SplitTag::Train}, {"b.png", "y", SplitTag::Test}, {"c.png", "x", SplitTag::Val},
               {"d.png", "y", SplitTag::Train}, {"e.png", "x", SplitTag::Test}};
  const auto s = split_indices(m, {SplitSpec::Mode::ManifestProvided, 0.8, 0});
  CHECK(s.train == std::vector<std::size_t>{0, 3});
  CHECK(s.test == std::vector<std::size_t>{1, 4});
  m.records.push_back({"f.png", "x", SplitTag::None});
  CHECK(code_of([&] { split_indices(m, {SplitSpec::Mode::ManifestProvided, 0.8, 0}); }) == Errc::ConfigInvalid);
}
