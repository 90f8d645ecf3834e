#pragma once

#include "svmtune/error.hpp"
#include "svmtune/surface.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace svmtune::detail {

// Limits an optimizer to its own budget on a possibly larger evaluator and
// turns budget exhaustion into an empty optional.
class BudgetedObjective {
 public:
  BudgetedObjective(SurfaceEvaluator& ev, std::size_t limit)
      : ev_(ev), start_(ev.evaluations()), limit_(std::min(limit, ev.budget_remaining())) {}

  std::optional<Evaluation> operator()(const HyperPoint& p) {
    if (used() >= limit_) return std::nullopt;
    try {
      return ev_.evaluate(p);
    } catch (const BudgetExhausted&) {
      return std::nullopt;
    }
  }

  std::size_t used() const { return ev_.evaluations() - start_; }
  std::size_t remaining() const { return limit_ - used(); }
  bool exhausted() const { return remaining() == 0; }

  std::span<const Evaluation> own_log() const { return std::span(ev_.log()).subspan(start_); }
  std::vector<HyperPoint> result() const { return best_so_far(own_log()); }

 private:
  SurfaceEvaluator& ev_;
  std::size_t start_;
  std::size_t limit_;
};

// Unconstrained Nelder-Mead minimizer in R^n, used for surrogate model
// fitting. Returns the best vertex found.
inline Eigen::VectorXd minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                        double step, std::size_t max_evals, double ftol = 1e-8) {
  const auto n = x0.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> vals(static_cast<std::size_t>(n + 1));
  for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i + 1)][i] += step;
  std::size_t evals = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    vals[i] = f(pts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(pts.size());
  while (evals < max_evals) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    ++evals;
    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second_worst]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      const Eigen::VectorXd xc = fr < vals[worst] ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                                 : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          vals[i] = f(pts[i]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  return pts[static_cast<std::size_t>(it - vals.begin())];
}

}  // namespace svmtune::detail
