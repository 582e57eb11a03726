#pragma once

// A fitted classifier of one of the four kinds together with the
// standardization it was trained with. Every kind consumes standardized rows.
//
// File format (all integers and reals little-endian):
//   "CPMD" | u16 version | u8 kind (1 knn, 2 svm, 3 rf, 4 gbt)
//   standardizer: u32 d | d x f64 mean | d x f64 scale
//   u32 C | C x (u32 len | bytes) class names
//   provenance: u8 split mode | f64 train fraction | u64 split seed
//   kind-specific payload (see model.cpp)

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpath/boosting.hpp"
#include "cpath/dataset.hpp"
#include "cpath/forest.hpp"
#include "cpath/knn.hpp"
#include "cpath/svm.hpp"

namespace cpath {

inline constexpr std::string_view kModelMagic = "CPMD";
inline constexpr std::uint16_t kModelVersion = 1;

enum class ClassifierKind : std::uint8_t { Knn = 1, Svm = 2, Rf = 3, Gbt = 4 };

std::string_view classifier_name(ClassifierKind k) noexcept;
ClassifierKind parse_classifier(std::string_view name);

struct ClassifierConfig {
  KnnParams knn;
  SvmParams svm;
  ForestParams rf;
  BoostParams gbt;
};

/// How the training rows were chosen, so `eval --split test` can rebuild the
/// complementary rows from the same cache.
struct SplitProvenance {
  enum class Mode : std::uint8_t { All = 0, RandomStratified = 1, ManifestProvided = 2 };
  Mode mode = Mode::All;
  double train_fraction = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitProvenance&, const SplitProvenance&) = default;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Knn;
  Standardizer standardizer;
  std::vector<std::string> class_names;
  SplitProvenance provenance;
  std::variant<KnnModel, SvmModel, ForestModel, BoostModel> impl;

  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
  std::size_t dim() const noexcept { return standardizer.dim(); }
};

Standardizer fit_standardizer(const TrainingSet& train);

TrainedModel knn_fit(const TrainingSet& train, const KnnParams& params);
TrainedModel svm_fit(const TrainingSet& train, const SvmParams& params);
TrainedModel rf_fit(const TrainingSet& train, const ForestParams& params);
TrainedModel gbt_fit(const TrainingSet& train, const BoostParams& params);

TrainedModel fit(const TrainingSet& train, ClassifierKind kind, const ClassifierConfig& config);

/// Raw (unstandardized) feature vector in, class index out.
int predict(const TrainedModel& model, std::span<const double> x);

/// Parallel over rows; identical to calling predict row by row.
std::vector<int> predict_batch(const TrainedModel& model, const Matrix& raw_rows);

std::string serialize(const TrainedModel& model);
TrainedModel deserialize(std::string_view bytes);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace cpath
