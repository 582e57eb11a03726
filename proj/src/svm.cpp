#include "cpath/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <list>
#include <string>
#include <unordered_map>

#include "cpath/error.hpp"

namespace cpath {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// LRU cache of kernel columns K(i, .) over the rows of one subproblem.
class KernelColumns {
 public:
  KernelColumns(const Matrix& rows, const Kernel& kernel, std::size_t cache_bytes)
      : rows_(rows), kernel_(kernel) {
    const std::size_t col_bytes = std::max<std::size_t>(1, rows.rows() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, cache_bytes / col_bytes);
  }

  std::span<const double> column(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::vector<double> col;
    if (lru_.size() >= capacity_) {
      col = std::move(lru_.back().second);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    col.resize(rows_.rows());
    const auto xi = rows_.row(i);
    for (std::size_t t = 0; t < rows_.rows(); ++t) col[t] = kernel_(xi, rows_.row(t));
    lru_.emplace_front(i, std::move(col));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  using Entry = std::pair<std::size_t, std::vector<double>>;
  const Matrix& rows_;
  Kernel kernel_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace

std::string_view kernel_name(KernelType k) noexcept { return k == KernelType::Linear ? "linear" : "rbf"; }

KernelType parse_kernel(std::string_view name) {
  if (name == "rbf") return KernelType::Rbf;
  if (name == "linear") return KernelType::Linear;
  throw Error(Errc::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  if (type == KernelType::Linear) {
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

BinarySvmSolution solve_binary_svm(const Matrix& rows, std::span<const std::int8_t> y, const Kernel& kernel,
                                   double c, double tol, std::int64_t max_iter, std::size_t cache_bytes) {
  const std::size_t l = rows.rows();
  if (l == 0 || y.size() != l) throw Error(Errc::InvalidArgument, "svm subproblem needs matching rows and labels");
  if (!(c > 0.0)) throw Error(Errc::InvalidArgument, "svm penalty C must be positive");

  KernelColumns cols(rows, kernel, cache_bytes);
  std::vector<double> qd(l);
  for (std::size_t t = 0; t < l; ++t) qd[t] = kernel(rows.row(t), rows.row(t));

  BinarySvmSolution sol;
  auto& alpha = sol.alpha;
  alpha.assign(l, 0.0);
  std::vector<double> grad(l, -1.0);  // gradient of 0.5 a'Qa - e'a at a = 0

  const auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  const auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  const auto q_entry = [&](std::span<const double> k_col, std::size_t i, std::size_t t) {
    return static_cast<double>(y[i] * y[t]) * k_col[t];
  };

  if (max_iter <= 0) max_iter = std::max<std::int64_t>(10'000'000, 100 * static_cast<std::int64_t>(l));

  for (;;) {
    // Working set: i maximizes -y G over I_up, j minimizes the second-order
    // decrease over I_low.
    double gmax = -kInf, gmax2 = -kInf;
    std::ptrdiff_t gi = -1, gj = -1;
    for (std::size_t t = 0; t < l; ++t) {
      if (y[t] == +1) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          gi = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        gi = static_cast<std::ptrdiff_t>(t);
      }
    }

    double obj_min = kInf;
    std::span<const double> ki;
    if (gi >= 0) ki = cols.column(static_cast<std::size_t>(gi));
    for (std::size_t t = 0; gi >= 0 && t < l; ++t) {
      const auto i = static_cast<std::size_t>(gi);
      if (y[t] == +1) {
        if (lower(t)) continue;
        const double diff = gmax + grad[t];
        if (grad[t] >= gmax2) gmax2 = grad[t];
        if (diff > 0.0) {
          double a = qd[i] + qd[t] - 2.0 * y[i] * q_entry(ki, i, t);
          if (a <= 0.0) a = kTau;
          const double obj = -(diff * diff) / a;
          if (obj <= obj_min) {
            gj = static_cast<std::ptrdiff_t>(t);
            obj_min = obj;
          }
        }
      } else {
        if (upper(t)) continue;
        const double diff = gmax - grad[t];
        if (-grad[t] >= gmax2) gmax2 = -grad[t];
        if (diff > 0.0) {
          double a = qd[i] + qd[t] + 2.0 * y[i] * q_entry(ki, i, t);
          if (a <= 0.0) a = kTau;
          const double obj = -(diff * diff) / a;
          if (obj <= obj_min) {
            gj = static_cast<std::ptrdiff_t>(t);
            obj_min = obj;
          }
        }
      }
    }

    sol.kkt_gap = (gi >= 0 && gmax2 > -kInf) ? gmax + gmax2 : 0.0;
    if (gi < 0 || gj < 0 || sol.kkt_gap < tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    ++sol.iterations;

    const auto i = static_cast<std::size_t>(gi), j = static_cast<std::size_t>(gj);
    ki = cols.column(i);
    // Copy: fetching column j may evict column i.
    const std::vector<double> ki_copy(ki.begin(), ki.end());
    const auto kj = cols.column(j);
    const double qij = q_entry(ki_copy, i, j);
    const double old_i = alpha[i], old_j = alpha[j];

    if (y[i] != y[j]) {
      double a = qd[i] + qd[j] + 2.0 * qij;
      if (a <= 0.0) a = kTau;
      const double delta = (-grad[i] - grad[j]) / a;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double a = qd[i] + qd[j] - 2.0 * qij;
      if (a <= 0.0) a = kTau;
      const double delta = (grad[i] - grad[j]) / a;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < l; ++t)
      grad[t] += q_entry(ki_copy, i, t) * di + q_entry(kj, j, t) * dj;
  }

  // rho: mean of y*G over free vectors, else the midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == +1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  if (n_free > 0) sol.rho = sum_free / static_cast<double>(n_free);
  else if (std::isfinite(ub) && std::isfinite(lb)) sol.rho = (ub + lb) / 2.0;
  else sol.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  return sol;
}

double auto_gamma(const Matrix& rows) {
  const auto data = rows.data();
  if (data.empty()) return 1.0;
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double v : data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(data.size());
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(rows.cols()) * var);
}

SvmModel fit_svm(const Matrix& rows, std::span<const int> labels, int num_classes, const SvmParams& params) {
  if (rows.empty()) throw Error(Errc::EmptySet, "svm needs at least one training row");
  if (num_classes < 2) throw Error(Errc::InvalidArgument, "svm needs at least 2 classes");

  SvmModel model;
  model.kernel.type = params.kernel;
  model.kernel.gamma = params.gamma > 0.0 ? params.gamma : auto_gamma(rows);
  model.c = params.c;
  model.num_classes = num_classes;

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  model.fallback_class = static_cast<int>(
      std::find_if(members.begin(), members.end(), [](const auto& m) { return !m.empty(); }) - members.begin());

  std::vector<std::int64_t> sv_slot(rows.rows(), -1);
  std::vector<std::size_t> sv_rows;

  for (int a = 0; a < num_classes; ++a) {
    for (int b = a + 1; b < num_classes; ++b) {
      if (members[a].empty() || members[b].empty()) {
        std::cerr << "warning: " << Error(Errc::SingleClassPair,
                                          "svm pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                              ") has a class without training rows; skipped")
                                        .what()
                  << '\n';
        continue;
      }
      std::vector<std::size_t> idx = members[a];
      idx.insert(idx.end(), members[b].begin(), members[b].end());
      std::sort(idx.begin(), idx.end());
      std::vector<std::int8_t> y;
      y.reserve(idx.size());
      for (auto r : idx) y.push_back(labels[r] == a ? std::int8_t{1} : std::int8_t{-1});

      const Matrix sub = rows.select_rows(idx);
      const auto sol = solve_binary_svm(sub, y, model.kernel, params.c, params.tol, params.max_iter, params.cache_bytes);
      if (!sol.converged)
        std::cerr << "warning: svm pair (" << a << ", " << b << ") hit the iteration limit with KKT gap "
                  << sol.kkt_gap << '\n';

      SvmPair pair;
      pair.positive = a;
      pair.negative = b;
      pair.rho = sol.rho;
      for (std::size_t t = 0; t < idx.size(); ++t) {
        if (sol.alpha[t] <= 0.0) continue;
        auto& slot = sv_slot[idx[t]];
        if (slot < 0) {
          slot = static_cast<std::int64_t>(sv_rows.size());
          sv_rows.push_back(idx[t]);
        }
        pair.sv_index.push_back(static_cast<std::uint32_t>(slot));
        pair.coef.push_back(sol.alpha[t] * y[t]);
      }
      model.pairs.push_back(std::move(pair));
    }
  }
  model.support_vectors = rows.select_rows(sv_rows);
  if (model.support_vectors.cols() == 0) model.support_vectors = Matrix(0, rows.cols());
  return model;
}

double decision_value(const SvmModel&, const SvmPair& pair, std::span<const double> kernel_row) {
  double s = 0.0;
  for (std::size_t t = 0; t < pair.sv_index.size(); ++t) s += pair.coef[t] * kernel_row[pair.sv_index[t]];
  return s - pair.rho;
}

int predict(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.support_vectors.cols())
    throw Error(Errc::DimensionMismatch, "query has " + std::to_string(x.size()) + " features, model has " +
                                             std::to_string(model.support_vectors.cols()));
  if (model.pairs.empty()) return model.fallback_class;
  std::vector<double> krow(model.support_vectors.rows());
  for (std::size_t t = 0; t < krow.size(); ++t) krow[t] = model.kernel(model.support_vectors.row(t), x);

  std::vector<int> votes(static_cast<std::size_t>(model.num_classes), 0);
  for (const auto& pair : model.pairs)
    ++votes[decision_value(model, pair, krow) > 0.0 ? pair.positive : pair.negative];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> predict_batch(const SvmModel& model, const Matrix& queries) {
  if (!queries.empty() && queries.cols() != model.support_vectors.cols())
    throw Error(Errc::DimensionMismatch, "query matrix width differs from model");
  std::vector<int> out(queries.rows());
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(model, queries.row(i));
  return out;
}

namespace serial {

std::vector<int> predict_batch(const SvmModel& model, const Matrix& queries) {
  std::vector<int> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(predict(model, queries.row(i)));
  return out;
}

}  // namespace serial

}  // namespace cpath
