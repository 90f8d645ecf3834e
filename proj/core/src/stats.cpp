#include "svmtune/stats.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace svmtune {

CiResult bootstrap_ci_mean(std::span<const double> values, std::size_t replicates, double level, std::uint64_t seed) {
  if (values.size() < 2) throw ConfigError("bootstrap needs at least 2 values");
  if (replicates == 0) throw ConfigError("bootstrap needs at least one replicate");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  CiResult out;
  out.replicates = replicates;
  out.seed = seed;
  // Means are accumulated as offsets from the first value, which keeps them
  // exact for constant input.
  const double origin = values.front();
  const auto n = static_cast<double>(values.size());
  double total = 0.0;
  for (double v : values) total += v - origin;
  out.mean = origin + total / n;

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(replicates);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)] - origin;
    m = origin + s / n;
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  const double last = static_cast<double>(replicates - 1);
  out.low = means[static_cast<std::size_t>(std::floor(tail * last))];
  out.high = means[static_cast<std::size_t>(std::ceil((1.0 - tail) * last))];
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

void check_blocks(const Eigen::MatrixXd& blocks) {
  if (blocks.rows() < 2 || blocks.cols() < 2) throw ConfigError("rank tests need at least 2 blocks and 2 treatments");
  if (!blocks.allFinite()) throw ConfigError("rank tests need finite values");
}

std::vector<double> mean_ranks_of(const Eigen::MatrixXd& blocks, double* tie_term) {
  const auto k = static_cast<std::size_t>(blocks.cols());
  std::vector<double> sums(k, 0.0);
  double ties = 0.0;
  for (Eigen::Index i = 0; i < blocks.rows(); ++i) {
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) row[j] = blocks(i, static_cast<Eigen::Index>(j));
    const auto r = average_ranks(row);
    for (std::size_t j = 0; j < k; ++j) sums[j] += r[j];
    std::sort(row.begin(), row.end());
    for (std::size_t a = 0; a < k;) {
      std::size_t b = a;
      while (b + 1 < k && row[b + 1] == row[a]) ++b;
      const double t = static_cast<double>(b - a + 1);
      ties += t * t * t - t;
      a = b + 1;
    }
  }
  if (tie_term) *tie_term = ties;
  for (auto& s : sums) s /= static_cast<double>(blocks.rows());
  return sums;
}

}  // namespace

RankTestResult friedman_test(const Eigen::MatrixXd& blocks) {
  check_blocks(blocks);
  const auto n = static_cast<double>(blocks.rows());
  const auto k = static_cast<double>(blocks.cols());
  RankTestResult out;
  double ties = 0.0;
  out.mean_ranks = mean_ranks_of(blocks, &ties);
  out.df = static_cast<std::size_t>(blocks.cols()) - 1;
  double ss = 0.0;
  for (double r : out.mean_ranks) ss += (r - 0.5 * (k + 1.0)) * (r - 0.5 * (k + 1.0));
  const double correction = 1.0 - ties / (n * (k * k * k - k));
  if (correction <= 0.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.statistic = 12.0 * n / (k * (k + 1.0)) * ss / correction;
  const boost::math::chi_squared dist(static_cast<double>(out.df));
  out.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, out.statistic)), 0.0, 1.0);
  return out;
}

double studentized_range_cdf(double q, std::size_t k) {
  if (k < 2) throw ConfigError("studentized range needs k >= 2");
  if (!(q > 0.0)) return 0.0;
  const boost::math::normal z01;
  const auto kd = static_cast<double>(k);
  const auto integrand = [&](double z) {
    const double inner = boost::math::cdf(z01, z) - boost::math::cdf(z01, z - q);
    return kd * boost::math::pdf(z01, z) * std::pow(std::max(inner, 0.0), kd - 1.0);
  };
  // The integrand is negligible outside [-9, q + 9].
  const double p = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -9.0, q + 9.0, 15, 1e-13);
  return std::clamp(p, 0.0, 1.0);
}

double studentized_range_quantile(double p, std::size_t k) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile probability must lie in (0, 1)");
  double hi = 1.0;
  while (studentized_range_cdf(hi, k) < p) hi *= 2.0;
  const auto f = [&](double q) { return studentized_range_cdf(q, k) - p; };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, -p, f(hi), tol, iters);
  return 0.5 * (a + b);
}

double nemenyi_q(std::size_t k, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  return studentized_range_quantile(1.0 - alpha, k) / std::numbers::sqrt2;
}

NemenyiResult nemenyi_test(const Eigen::MatrixXd& blocks, double alpha) {
  check_blocks(blocks);
  const auto n = static_cast<double>(blocks.rows());
  const auto k = static_cast<std::size_t>(blocks.cols());
  NemenyiResult out;
  out.alpha = alpha;
  out.mean_ranks = mean_ranks_of(blocks, nullptr);
  const double se = std::sqrt(static_cast<double>(k * (k + 1)) / (6.0 * n));
  out.q_alpha = nemenyi_q(k, alpha);
  out.critical_difference = out.q_alpha * se;
  out.p_values = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double z = std::abs(out.mean_ranks[a] - out.mean_ranks[b]) / se;
      const double p = std::clamp(1.0 - studentized_range_cdf(z * std::numbers::sqrt2, k), 0.0, 1.0);
      out.p_values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = p;
      out.p_values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = p;
    }
  }
  return out;
}

std::vector<SelectionRule> reasonable_selection_rules() {
  return {SelectionRule::minCg, SelectionRule::mingC, SelectionRule::meanCg, SelectionRule::randCg};
}

SelectionComparison selection_rule_comparison(const std::vector<TieCombination>& combinations,
                                              const FutureAccuracyFn& future_accuracy,
                                              const SelectionComparisonOptions& options) {
  if (options.rules.size() < 2) throw ConfigError("selection comparison needs at least 2 rules");
  SelectionComparison out;
  out.rules = options.rules;
  for (std::size_t i = 0; i < combinations.size(); ++i) {
    if (combinations[i].ties.size() >= std::max<std::size_t>(options.min_tie_size, 1)) out.used.push_back(i);
  }
  if (out.used.size() < 2) throw ConfigError("selection comparison needs at least 2 qualifying tie sets");

  const auto n = static_cast<Eigen::Index>(out.used.size());
  const auto k = static_cast<Eigen::Index>(out.rules.size());
  out.accuracy.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& combo = combinations[out.used[static_cast<std::size_t>(i)]];
    for (Eigen::Index r = 0; r < k; ++r) {
      const HyperPoint p = select(combo.ties, out.rules[static_cast<std::size_t>(r)], combo.seed);
      out.accuracy(i, r) = future_accuracy(out.used[static_cast<std::size_t>(i)], p);
    }
  }
  // rank 1 = most accurate
  out.test = friedman_test(-out.accuracy);
  return out;
}

}  // namespace svmtune
