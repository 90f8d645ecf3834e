#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace svmtune {

struct KernelSpec {
  enum class Kind { rbf, linear };
  Kind kind = Kind::rbf;
  double gamma = 1.0;

  static KernelSpec rbf(double gamma);
  static KernelSpec linear() { return {Kind::linear, 0.0}; }
};

/// rbf: exp(-gamma * |x - y|^2), linear: x.y. Throws ConfigError on a
/// dimension mismatch.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

struct TrainConfig {
  double C = 1.0;
  double kkt_tolerance = 1e-3;
  /// Cap on SMO pair updates. 0 selects min(max(10 n^2, 10^4), 10^6).
  std::size_t max_iterations = 0;
};

std::size_t default_max_iterations(std::size_t n);

/// Supplies rows of the training Gram matrix to the solver.
class KernelRows {
 public:
  virtual ~KernelRows() = default;
  virtual std::size_t size() const = 0;
  /// Row i of K. The span stays valid until the next call to row().
  virtual std::span<const double> row(std::size_t i) = 0;
  virtual double diag(std::size_t i) const = 0;
};

/// Fully materialized Gram matrix.
class DenseKernelRows final : public KernelRows {
 public:
  explicit DenseKernelRows(Eigen::MatrixXd gram);
  std::size_t size() const override { return static_cast<std::size_t>(gram_.rows()); }
  std::span<const double> row(std::size_t i) override;
  double diag(std::size_t i) const override;
  const Eigen::MatrixXd& matrix() const { return gram_; }

 private:
  Eigen::MatrixXd gram_;  // symmetric, so column i doubles as row i
};

/// Computes rows from the feature matrix on demand and keeps a bounded
/// cache of recently used rows. Used when n exceeds the dense threshold.
class OnDemandKernelRows final : public KernelRows {
 public:
  OnDemandKernelRows(const Eigen::MatrixXd& x, KernelSpec spec, std::size_t cache_rows = 256);
  ~OnDemandKernelRows() override;
  std::size_t size() const override;
  std::span<const double> row(std::size_t i) override;
  double diag(std::size_t i) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline constexpr std::size_t kDenseGramLimit = 5000;

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec);
/// K(a_i, b_j) for every pair of rows.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec);
/// |a_i - b_j|^2 for every pair of rows.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Raw dual solution: alpha for every training row plus the bias of
/// f(x) = sum_i y_i alpha_i K(x_i, x) + bias.
struct DualSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// SMO on min 1/2 sum y_i a_i y_j a_j K_ij - sum a_i, 0 <= a_i <= C,
/// sum y_i a_i = 0. Working pair: the maximal violating pair, i.e. the
/// feasible pair with the largest |E_i - E_j|. Stops once the violation drops
/// below kkt_tolerance or the iteration cap is reached (converged = false).
/// `y` holds +1 / -1.
DualSolution solve_dual(KernelRows& kernel, std::span<const int> y, const TrainConfig& cfg);

/// 1/2 a'Qa - sum(a) with Q_ij = y_i y_j K_ij.
double dual_objective(const Eigen::MatrixXd& gram, std::span<const int> y, const Eigen::VectorXd& alpha);

class SvmModel {
 public:
  std::vector<std::size_t> support_indices;
  std::vector<double> dual_coefs;  // y_i * alpha_i
  double bias = 0.0;
  KernelSpec kernel;
  Eigen::MatrixXd support_vectors;  // one row per support index
  bool converged = true;
  std::size_t iterations = 0;

  double decision_value(std::span<const double> x) const;
  /// 1 if the decision value is strictly positive, else 0.
  int predict(std::span<const double> x) const;
  std::size_t dims() const { return static_cast<std::size_t>(support_vectors.cols()); }
};

/// Labels are 0/1 (0 maps to y = -1). Throws DataError for single-class input.
SvmModel train(const Eigen::MatrixXd& x, std::span<const int> labels, const TrainConfig& cfg,
               const KernelSpec& kernel);

/// Builds a model from a dual solution over the given training rows.
SvmModel make_model(const Eigen::MatrixXd& x, std::span<const int> y_pm, const DualSolution& sol,
                    const KernelSpec& kernel);

double accuracy(const SvmModel& model, const Eigen::MatrixXd& x, std::span<const int> labels);

std::vector<int> to_signed_labels(std::span<const int> labels01);

}  // namespace svmtune
