#pragma once

#include "svmtune/hyperpoint.hpp"
#include "svmtune/surface.hpp"
#include "svmtune/svmspecific.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svmtune {

enum class Family {
  grid, ud, rand, normrand, gridhier, udhier,
  nelder, bobyqa, sa, pso, cma, bogp, tpe,
  skl, sigest, dbtc, sdbtc, asymp
};

struct AlgorithmSpec {
  std::string id;
  Family family = Family::grid;
  std::size_t budget = 0;  // declared N, total over all stages
};

/// All searcher ids in table order.
const std::vector<AlgorithmSpec>& algorithm_registry();
/// Throws ConfigError listing the registry for unknown ids.
const AlgorithmSpec& find_algorithm(std::string_view id);
std::string registry_listing();

/// Probe set fixed before any evaluation (grid, ud, rand, normrand).
bool is_grid_like(Family f);

struct SearchProblem {
  ResponseFunction rbf;
  /// Linear-kernel surface for asymp; log2gamma is ignored.
  ResponseFunction linear;
  /// Training rows and 0/1 labels for the gamma estimators.
  const Eigen::MatrixXd* features = nullptr;
  const std::vector<int>* labels = nullptr;
  std::uint64_t seed = 0;
  std::optional<Clock::time_point> deadline;
};

struct SearchOutcome {
  std::vector<HyperPoint> ties;
  double best_accuracy = 0.0;
  std::vector<Evaluation> log;         // RBF surface
  std::vector<Evaluation> linear_log;  // asymp stage 1
  std::size_t eval_count = 0;
  std::optional<GammaEstimate> gamma;
};

/// Runs one searcher with fresh evaluators sized to its declared budget.
SearchOutcome run_search(const AlgorithmSpec& algorithm, const SearchProblem& problem);

}  // namespace svmtune
