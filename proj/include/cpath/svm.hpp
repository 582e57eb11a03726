#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cpath/matrix.hpp"

namespace cpath {

enum class KernelType : std::uint8_t { Linear = 0, Rbf = 1 };

std::string_view kernel_name(KernelType k) noexcept;
KernelType parse_kernel(std::string_view name);

struct Kernel {
  KernelType type = KernelType::Rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  double c = 1.0;
  double gamma = 0.0;  // <= 0: 1 / (d * variance of all training entries)
  double tol = 1e-3;
  std::int64_t max_iter = 0;  // <= 0: max(10^7, 100 * n)
  std::size_t cache_bytes = std::size_t{256} << 20;
};

/// Dual solution of one binary soft-margin problem, labels y in {+1, -1}.
struct BinarySvmSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  /// Maximal KKT violation m(alpha) - M(alpha) when the solver stopped.
  double kkt_gap = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
};

/// SMO with second-order working-set selection. Decision function is
/// sum_i alpha_i y_i K(x_i, x) - rho.
BinarySvmSolution solve_binary_svm(const Matrix& rows, std::span<const std::int8_t> y, const Kernel& kernel,
                                   double c, double tol, std::int64_t max_iter,
                                   std::size_t cache_bytes = std::size_t{256} << 20);

/// One-vs-one classifier for the pair (positive, negative).
struct SvmPair {
  int positive = 0;
  int negative = 1;
  double rho = 0.0;
  std::vector<std::uint32_t> sv_index;  // rows of SvmModel::support_vectors
  std::vector<double> coef;             // alpha_i * y_i
};

struct SvmModel {
  Kernel kernel;
  double c = 1.0;
  int num_classes = 0;
  /// Predicted when no pair could be trained (fewer than two classes present).
  int fallback_class = 0;
  Matrix support_vectors;
  std::vector<SvmPair> pairs;
};

double auto_gamma(const Matrix& rows);

SvmModel fit_svm(const Matrix& rows, std::span<const int> labels, int num_classes, const SvmParams& params);

double decision_value(const SvmModel& model, const SvmPair& pair, std::span<const double> kernel_row);

/// Pairwise voting; vote ties go to the smallest class index.
int predict(const SvmModel& model, std::span<const double> x);

std::vector<int> predict_batch(const SvmModel& model, const Matrix& queries);

namespace serial {
std::vector<int> predict_batch(const SvmModel& model, const Matrix& queries);
}

}  // namespace cpath
