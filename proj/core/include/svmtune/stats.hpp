#pragma once

#include "svmtune/hyperpoint.hpp"
#include "svmtune/selection.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace svmtune {

struct CiResult {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Percentile bootstrap of the mean. Endpoints are order statistics of the
/// replicate means. Throws ConfigError for fewer than 2 values.
CiResult bootstrap_ci_mean(std::span<const double> values, std::size_t replicates = 5000, double level = 0.95,
                           std::uint64_t seed = 0);

/// Ascending mid-ranks (1-based, ties averaged).
std::vector<double> average_ranks(std::span<const double> values);

struct RankTestResult {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;
};

/// Friedman test on an n x k matrix (rows are blocks, columns treatments);
/// lower values get lower ranks. Tie-corrected chi-squared with k-1 df.
RankTestResult friedman_test(const Eigen::MatrixXd& blocks);

/// P(range of k iid standard normals < q), infinite degrees of freedom.
double studentized_range_cdf(double q, std::size_t k);
/// Inverse of studentized_range_cdf in q.
double studentized_range_quantile(double p, std::size_t k);
/// Critical value q_alpha for the Nemenyi critical difference (studentized
/// range quantile over sqrt(2)).
double nemenyi_q(std::size_t k, double alpha);

struct NemenyiResult {
  Eigen::MatrixXd p_values;  // k x k, symmetric, unit diagonal
  std::vector<double> mean_ranks;
  double alpha = 0.05;
  double q_alpha = 0.0;
  double critical_difference = 0.0;
};

NemenyiResult nemenyi_test(const Eigen::MatrixXd& blocks, double alpha = 0.05);

/// One (algorithm, subset) search with its tie set.
struct TieCombination {
  std::vector<HyperPoint> ties;
  std::uint64_t seed = 0;  // for randCg
};

/// Accuracy on the opposite subset when training combination `index` at `p`.
using FutureAccuracyFn = std::function<double(std::size_t index, const HyperPoint& p)>;

struct SelectionComparisonOptions {
  std::vector<SelectionRule> rules{std::begin(kAllSelectionRules), std::end(kAllSelectionRules)};
  std::size_t min_tie_size = 2;
};

/// The four rules kept in the restricted comparison.
std::vector<SelectionRule> reasonable_selection_rules();

struct SelectionComparison {
  std::vector<SelectionRule> rules;
  RankTestResult test;  // mean_ranks: rank 1 = highest future accuracy
  std::vector<std::size_t> used;  // indices of qualifying combinations
  Eigen::MatrixXd accuracy;       // used.size() x rules.size()
};

/// Applies every rule to each qualifying tie set, ranks the rules by future
/// accuracy within each combination and runs Friedman. Throws ConfigError when
/// fewer than 2 combinations qualify.
SelectionComparison selection_rule_comparison(const std::vector<TieCombination>& combinations,
                                              const FutureAccuracyFn& future_accuracy,
                                              const SelectionComparisonOptions& options = {});

}  // namespace svmtune
