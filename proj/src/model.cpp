#include "cpath/model.hpp"

#include "cpath/binary_io.hpp"
#include "cpath/error.hpp"

namespace cpath {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

TrainedModel prepare(const TrainingSet& train, ClassifierKind kind, Matrix& standardized) {
  train.validate();
  TrainedModel m;
  m.kind = kind;
  m.standardizer = fit_standardizer(train);
  m.class_names = train.class_names;
  standardized = m.standardizer.transform(train.features);
  return m;
}

// --- serialization helpers -------------------------------------------------

void write_matrix(io::ByteWriter& w, const Matrix& m) {
  w.u64(m.rows());
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) w.f64(v);
}

Matrix read_matrix(io::ByteReader& r) {
  const auto rows = r.u64();
  const auto cols = r.u32();
  r.expect_at_least(rows * cols, 8);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = r.f64();
  return m;
}

void write_tree(io::ByteWriter& w, const DecisionTree& t) {
  w.u32(t.leaf_width);
  w.u32(static_cast<std::uint32_t>(t.nodes.size()));
  for (const auto& n : t.nodes) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.i32(n.value_offset);
  }
  w.u32(static_cast<std::uint32_t>(t.values.size()));
  for (double v : t.values) w.f64(v);
}

DecisionTree read_tree(io::ByteReader& r, std::size_t dim) {
  DecisionTree t;
  t.leaf_width = r.u32();
  const auto n = r.u32();
  r.expect_at_least(n, 24);
  t.nodes.resize(n);
  for (auto& nd : t.nodes) {
    nd.feature = r.i32();
    nd.threshold = r.f64();
    nd.left = r.i32();
    nd.right = r.i32();
    nd.value_offset = r.i32();
  }
  const auto nv = r.u32();
  r.expect_at_least(nv, 8);
  t.values.resize(nv);
  for (auto& v : t.values) v = r.f64();

  // Structural validation so prediction never indexes out of bounds.
  if (t.nodes.empty()) throw Error(Errc::CorruptFile, "tree without nodes");
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& nd = t.nodes[i];
    if (nd.is_leaf()) {
      if (nd.value_offset < 0 || static_cast<std::size_t>(nd.value_offset) + t.leaf_width > t.values.size())
        throw Error(Errc::CorruptFile, "tree leaf payload out of range");
    } else {
      const auto lim = static_cast<std::int32_t>(t.nodes.size());
      if (static_cast<std::size_t>(nd.feature) >= dim || nd.left <= static_cast<std::int32_t>(i) ||
          nd.right <= static_cast<std::int32_t>(i) || nd.left >= lim || nd.right >= lim)
        throw Error(Errc::CorruptFile, "tree node links out of range");
    }
  }
  return t;
}

std::vector<int> read_labels(io::ByteReader& r, std::uint64_t n, int classes) {
  r.expect_at_least(n, 4);
  std::vector<int> labels(n);
  for (auto& y : labels) {
    y = static_cast<int>(r.u32());
    if (y >= classes) throw Error(Errc::CorruptFile, "label index out of range");
  }
  return labels;
}

}  // namespace

std::string_view classifier_name(ClassifierKind k) noexcept {
  switch (k) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Rf: return "rf";
    case ClassifierKind::Gbt: return "gbt";
  }
  return "unknown";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "svm") return ClassifierKind::Svm;
  if (name == "rf") return ClassifierKind::Rf;
  if (name == "gbt") return ClassifierKind::Gbt;
  throw Error(Errc::InvalidArgument, "unknown classifier '" + std::string(name) + "'");
}

Standardizer fit_standardizer(const TrainingSet& train) { return Standardizer::fit(train.features); }

TrainedModel knn_fit(const TrainingSet& train, const KnnParams& params) {
  Matrix z;
  auto m = prepare(train, ClassifierKind::Knn, z);
  m.impl = fit_knn(z, train.labels, train.num_classes(), params);
  return m;
}

TrainedModel svm_fit(const TrainingSet& train, const SvmParams& params) {
  Matrix z;
  auto m = prepare(train, ClassifierKind::Svm, z);
  m.impl = fit_svm(z, train.labels, train.num_classes(), params);
  return m;
}

TrainedModel rf_fit(const TrainingSet& train, const ForestParams& params) {
  Matrix z;
  auto m = prepare(train, ClassifierKind::Rf, z);
  m.impl = fit_forest(z, train.labels, train.num_classes(), params);
  return m;
}

TrainedModel gbt_fit(const TrainingSet& train, const BoostParams& params) {
  Matrix z;
  auto m = prepare(train, ClassifierKind::Gbt, z);
  m.impl = fit_boosting(z, train.labels, train.num_classes(), params);
  return m;
}

TrainedModel fit(const TrainingSet& train, ClassifierKind kind, const ClassifierConfig& config) {
  switch (kind) {
    case ClassifierKind::Knn: return knn_fit(train, config.knn);
    case ClassifierKind::Svm: return svm_fit(train, config.svm);
    case ClassifierKind::Rf: return rf_fit(train, config.rf);
    case ClassifierKind::Gbt: return gbt_fit(train, config.gbt);
  }
  throw Error(Errc::InvalidArgument, "unknown classifier kind");
}

int predict(const TrainedModel& model, std::span<const double> x) {
  const auto z = model.standardizer.transform(x);
  return std::visit([&](const auto& impl) { return predict(impl, z); }, model.impl);
}

std::vector<int> predict_batch(const TrainedModel& model, const Matrix& raw_rows) {
  if (!raw_rows.empty() && raw_rows.cols() != model.dim())
    throw Error(Errc::DimensionMismatch, "feature matrix has " + std::to_string(raw_rows.cols()) +
                                             " columns, model expects " + std::to_string(model.dim()));
  const Matrix z = model.standardizer.transform(raw_rows);
  return std::visit([&](const auto& impl) { return predict_batch(impl, z); }, model.impl);
}

std::string serialize(const TrainedModel& model) {
  io::ByteWriter w;
  w.bytes(kModelMagic);
  w.u16(kModelVersion);
  w.u8(static_cast<std::uint8_t>(model.kind));

  const auto d = model.standardizer.dim();
  w.u32(static_cast<std::uint32_t>(d));
  for (double v : model.standardizer.mean) w.f64(v);
  for (double v : model.standardizer.scale) w.f64(v);

  w.u32(static_cast<std::uint32_t>(model.class_names.size()));
  for (const auto& name : model.class_names) w.str(name);

  w.u8(static_cast<std::uint8_t>(model.provenance.mode));
  w.f64(model.provenance.train_fraction);
  w.u64(model.provenance.seed);

  std::visit(Overloaded{
                 [&](const KnnModel& m) {
                   w.u32(static_cast<std::uint32_t>(m.k));
                   write_matrix(w, m.rows);
                   for (int y : m.labels) w.u32(static_cast<std::uint32_t>(y));
                 },
                 [&](const SvmModel& m) {
                   w.u8(static_cast<std::uint8_t>(m.kernel.type));
                   w.f64(m.kernel.gamma);
                   w.f64(m.c);
                   w.u32(static_cast<std::uint32_t>(m.fallback_class));
                   write_matrix(w, m.support_vectors);
                   w.u32(static_cast<std::uint32_t>(m.pairs.size()));
                   for (const auto& p : m.pairs) {
                     w.u32(static_cast<std::uint32_t>(p.positive));
                     w.u32(static_cast<std::uint32_t>(p.negative));
                     w.f64(p.rho);
                     w.u64(p.sv_index.size());
                     for (std::size_t t = 0; t < p.sv_index.size(); ++t) {
                       w.u32(p.sv_index[t]);
                       w.f64(p.coef[t]);
                     }
                   }
                 },
                 [&](const ForestModel& m) {
                   w.u32(static_cast<std::uint32_t>(m.trees.size()));
                   for (const auto& t : m.trees) write_tree(w, t);
                 },
                 [&](const BoostModel& m) {
                   w.u32(static_cast<std::uint32_t>(m.rounds));
                   w.f64(m.learning_rate);
                   w.f64(m.base_score);
                   w.u32(static_cast<std::uint32_t>(m.trees.size()));
                   for (const auto& t : m.trees) write_tree(w, t);
                 },
             },
             model.impl);
  return w.take();
}

TrainedModel deserialize(std::string_view bytes) {
  io::ByteReader r(bytes, "model");
  if (bytes.size() < 4 || r.bytes(4) != kModelMagic) throw Error(Errc::BadMagic, "not a model file");
  const auto version = r.u16();
  if (version != kModelVersion) throw Error(Errc::BadVersion, "model format version " + std::to_string(version));

  TrainedModel m;
  const auto kind = r.u8();
  if (kind < 1 || kind > 4) throw Error(Errc::CorruptFile, "unknown classifier tag " + std::to_string(kind));
  m.kind = static_cast<ClassifierKind>(kind);

  const auto d = r.u32();
  r.expect_at_least(d, 16);
  m.standardizer.mean.resize(d);
  m.standardizer.scale.resize(d);
  for (auto& v : m.standardizer.mean) v = r.f64();
  for (auto& v : m.standardizer.scale) v = r.f64();

  const auto nc = r.u32();
  r.expect_at_least(nc, 4);
  for (std::uint32_t c = 0; c < nc; ++c) m.class_names.push_back(r.str());
  if (nc < 2) throw Error(Errc::CorruptFile, "model with fewer than 2 classes");
  const int classes = static_cast<int>(nc);

  const auto mode = r.u8();
  if (mode > 2) throw Error(Errc::CorruptFile, "unknown split mode");
  m.provenance.mode = static_cast<SplitProvenance::Mode>(mode);
  m.provenance.train_fraction = r.f64();
  m.provenance.seed = r.u64();

  switch (m.kind) {
    case ClassifierKind::Knn: {
      KnnModel k;
      k.k = static_cast<int>(r.u32());
      k.num_classes = classes;
      k.rows = read_matrix(r);
      k.labels = read_labels(r, k.rows.rows(), classes);
      if (k.rows.cols() != d || k.k < 1 || static_cast<std::size_t>(k.k) > k.rows.rows())
        throw Error(Errc::CorruptFile, "inconsistent knn payload");
      m.impl = std::move(k);
      break;
    }
    case ClassifierKind::Svm: {
      SvmModel s;
      const auto kt = r.u8();
      if (kt > 1) throw Error(Errc::CorruptFile, "unknown kernel tag");
      s.kernel.type = static_cast<KernelType>(kt);
      s.kernel.gamma = r.f64();
      s.c = r.f64();
      s.num_classes = classes;
      s.fallback_class = static_cast<int>(r.u32());
      s.support_vectors = read_matrix(r);
      if (s.fallback_class >= classes || (s.support_vectors.rows() > 0 && s.support_vectors.cols() != d))
        throw Error(Errc::CorruptFile, "inconsistent svm payload");
      if (s.support_vectors.rows() == 0) s.support_vectors = Matrix(0, d);
      const auto np = r.u32();
      for (std::uint32_t p = 0; p < np; ++p) {
        SvmPair pair;
        pair.positive = static_cast<int>(r.u32());
        pair.negative = static_cast<int>(r.u32());
        pair.rho = r.f64();
        const auto m_sv = r.u64();
        r.expect_at_least(m_sv, 12);
        for (std::uint64_t t = 0; t < m_sv; ++t) {
          pair.sv_index.push_back(r.u32());
          pair.coef.push_back(r.f64());
          if (pair.sv_index.back() >= s.support_vectors.rows())
            throw Error(Errc::CorruptFile, "support vector index out of range");
        }
        if (pair.positive >= classes || pair.negative >= classes)
          throw Error(Errc::CorruptFile, "svm pair class out of range");
        s.pairs.push_back(std::move(pair));
      }
      m.impl = std::move(s);
      break;
    }
    case ClassifierKind::Rf: {
      ForestModel f;
      f.num_classes = classes;
      const auto nt = r.u32();
      for (std::uint32_t t = 0; t < nt; ++t) {
        f.trees.push_back(read_tree(r, d));
        if (f.trees.back().leaf_width != nc) throw Error(Errc::CorruptFile, "forest leaf width mismatch");
      }
      if (f.trees.empty()) throw Error(Errc::CorruptFile, "forest without trees");
      m.impl = std::move(f);
      break;
    }
    case ClassifierKind::Gbt: {
      BoostModel b;
      b.num_classes = classes;
      b.rounds = static_cast<int>(r.u32());
      b.learning_rate = r.f64();
      b.base_score = r.f64();
      const auto nt = r.u32();
      for (std::uint32_t t = 0; t < nt; ++t) {
        b.trees.push_back(read_tree(r, d));
        if (b.trees.back().leaf_width != 1) throw Error(Errc::CorruptFile, "boosting leaf width must be 1");
      }
      if (b.trees.size() != static_cast<std::size_t>(b.rounds) * nc)
        throw Error(Errc::CorruptFile, "boosting tree count does not match rounds x classes");
      m.impl = std::move(b);
      break;
    }
  }
  if (!r.at_end()) throw Error(Errc::CorruptFile, "trailing bytes after model payload");
  return m;
}

void save_model(const TrainedModel& model, const std::string& path) { io::write_file(path, serialize(model)); }

TrainedModel load_model(const std::string& path) { return deserialize(io::read_file(path)); }

}  // namespace cpath
