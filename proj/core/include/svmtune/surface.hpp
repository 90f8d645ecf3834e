#pragma once

#include "svmtune/dataset.hpp"
#include "svmtune/hyperpoint.hpp"
#include "svmtune/svm.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace svmtune {

/// Black-box objective over (log2 C, log2 gamma). For SVM tuning this is the
/// cross-validated accuracy; tests inject analytic surrogates.
using ResponseFunction = std::function<double(const HyperPoint&)>;

struct Evaluation {
  HyperPoint point;
  double accuracy = 0.0;
  std::size_t seq = 0;  // 0-based position in the evaluation log
};

using Clock = std::chrono::steady_clock;

/// Budgeted, cached view of a response function. Owned by one search at a
/// time; not thread-safe.
class SurfaceEvaluator {
 public:
  SurfaceEvaluator(ResponseFunction fn, std::size_t budget);

  /// Clamps `p` into the search box, consumes one unit of budget (also on a
  /// cache hit) and appends to the log. Throws BudgetExhausted when the budget
  /// is spent and TimeLimitExceeded once the deadline has passed.
  Evaluation evaluate(const HyperPoint& p);

  void set_deadline(Clock::time_point deadline) { deadline_ = deadline; }

  std::size_t budget() const { return budget_; }
  std::size_t budget_remaining() const { return budget_ - log_.size(); }
  std::size_t evaluations() const { return log_.size(); }
  std::size_t cache_hits() const { return cache_hits_; }
  const std::vector<Evaluation>& log() const { return log_; }

  /// Maximal logged value. Throws ConfigError on an empty log.
  double best_value() const;
  /// Every distinct logged point reaching best_value().
  std::vector<HyperPoint> best_so_far() const;

 private:
  ResponseFunction fn_;
  std::size_t budget_;
  std::size_t cache_hits_ = 0;
  std::optional<Clock::time_point> deadline_;
  std::map<PointKey, double> cache_;
  std::vector<Evaluation> log_;
};

/// Argmax set of a log: distinct points (first occurrence order) achieving the
/// maximal value. Throws ConfigError on an empty log.
std::vector<HyperPoint> best_so_far(std::span<const Evaluation> log);

/// The cross-validated response surface: mean accuracy over k folds, each
/// fold trained on the other k-1 folds with C = 2^log2C and gamma = 2^log2gamma.
/// Pairwise distances are computed once so every evaluation only pays for the
/// kernel exponentials and the solver.
class CvResponse {
 public:
  CvResponse(const Dataset& data, const std::vector<std::size_t>& rows, const std::vector<int>& folds,
             KernelSpec::Kind kind, TrainConfig solver);

  double operator()(const HyperPoint& p) const;
  std::vector<double> fold_accuracies(const HyperPoint& p) const;

  int folds() const { return k_; }
  std::size_t unconverged_fits() const { return unconverged_.load(); }
  std::size_t fits() const { return fits_.load(); }
  KernelSpec::Kind kind() const { return kind_; }

 private:
  Eigen::MatrixXd x_;
  std::vector<int> labels_;
  std::vector<int> fold_;
  int k_ = 0;
  KernelSpec::Kind kind_;
  TrainConfig solver_;
  Eigen::MatrixXd pair_;  // squared distances (rbf) or inner products (linear)
  std::vector<std::vector<std::size_t>> train_idx_;
  std::vector<std::vector<std::size_t>> test_idx_;
  mutable std::atomic<std::size_t> unconverged_{0};
  mutable std::atomic<std::size_t> fits_{0};
};

/// Wraps a shared CvResponse as a ResponseFunction.
ResponseFunction as_response(std::shared_ptr<const CvResponse> cv);

/// One JSON object per line: {"log2C":..,"log2gamma":..,"accuracy":..,"seq":..}.
void write_eval_log_jsonl(std::ostream& out, std::span<const Evaluation> log);

}  // namespace svmtune
