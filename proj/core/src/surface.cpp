#include "svmtune/surface.hpp"

#include "svmtune/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace svmtune {

SurfaceEvaluator::SurfaceEvaluator(ResponseFunction fn, std::size_t budget) : fn_(std::move(fn)), budget_(budget) {
  if (!fn_) throw ConfigError("SurfaceEvaluator needs a response function");
}

Evaluation SurfaceEvaluator::evaluate(const HyperPoint& requested) {
  if (log_.size() >= budget_) throw BudgetExhausted();
  if (deadline_ && Clock::now() > *deadline_) throw TimeLimitExceeded();
  const HyperPoint p = kSearchBox.clamp(requested);
  const PointKey key = quantize(p);
  double value = 0.0;
  if (auto it = cache_.find(key); it != cache_.end()) {
    value = it->second;
    ++cache_hits_;
  } else {
    value = fn_(p);
    cache_.emplace(key, value);
  }
  Evaluation e{p, value, log_.size()};
  log_.push_back(e);
  return e;
}

double SurfaceEvaluator::best_value() const {
  if (log_.empty()) throw ConfigError("best_so_far: empty evaluation log");
  double best = log_.front().accuracy;
  for (const auto& e : log_) best = std::max(best, e.accuracy);
  return best;
}

std::vector<HyperPoint> SurfaceEvaluator::best_so_far() const { return svmtune::best_so_far(log_); }

std::vector<HyperPoint> best_so_far(std::span<const Evaluation> log) {
  if (log.empty()) throw ConfigError("best_so_far: empty evaluation log");
  double best = log.front().accuracy;
  for (const auto& e : log) best = std::max(best, e.accuracy);
  std::vector<HyperPoint> out;
  std::set<PointKey> seen;
  for (const auto& e : log) {
    if (e.accuracy == best && seen.insert(quantize(e.point)).second) out.push_back(e.point);
  }
  return out;
}

CvResponse::CvResponse(const Dataset& data, const std::vector<std::size_t>& rows, const std::vector<int>& folds,
                       KernelSpec::Kind kind, TrainConfig solver)
    : kind_(kind), solver_(solver) {
  if (rows.size() != folds.size()) throw ConfigError("CvResponse: rows and folds differ in length");
  if (rows.empty()) throw ConfigError("CvResponse: no rows");
  x_ = gather_rows(data.features, rows);
  labels_ = gather_labels(data.labels, rows);
  fold_ = folds;
  k_ = *std::max_element(folds.begin(), folds.end());
  if (*std::min_element(folds.begin(), folds.end()) < 1) throw ConfigError("fold ids start at 1");
  train_idx_.resize(static_cast<std::size_t>(k_));
  test_idx_.resize(static_cast<std::size_t>(k_));
  for (std::size_t i = 0; i < fold_.size(); ++i) {
    for (int f = 1; f <= k_; ++f) {
      (fold_[i] == f ? test_idx_ : train_idx_)[static_cast<std::size_t>(f - 1)].push_back(i);
    }
  }
  for (int f = 0; f < k_; ++f) {
    if (test_idx_[static_cast<std::size_t>(f)].empty()) throw ConfigError("CvResponse: empty fold");
  }
  pair_ = kind_ == KernelSpec::Kind::linear ? Eigen::MatrixXd(x_ * x_.transpose()) : squared_distances(x_, x_);
}

std::vector<double> CvResponse::fold_accuracies(const HyperPoint& p) const {
  TrainConfig cfg = solver_;
  cfg.C = p.C();
  const double gamma = p.gamma();
  const auto kernel_of = [&](double v) { return kind_ == KernelSpec::Kind::linear ? v : std::exp(-gamma * v); };

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_));
  for (int f = 0; f < k_; ++f) {
    const auto& tr = train_idx_[static_cast<std::size_t>(f)];
    const auto& te = test_idx_[static_cast<std::size_t>(f)];
    const auto m = static_cast<Eigen::Index>(tr.size());
    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b <= a; ++b) {
        const double v = kernel_of(pair_(static_cast<Eigen::Index>(tr[static_cast<std::size_t>(a)]),
                                         static_cast<Eigen::Index>(tr[static_cast<std::size_t>(b)])));
        gram(a, b) = v;
        gram(b, a) = v;
      }
    }
    std::vector<int> y;
    y.reserve(tr.size());
    for (auto i : tr) y.push_back(labels_[i] == 1 ? 1 : -1);
    DenseKernelRows rows(std::move(gram));
    const DualSolution sol = solve_dual(rows, y, cfg);
    ++fits_;
    if (!sol.converged) ++unconverged_;

    std::size_t correct = 0;
    for (auto t : te) {
      double dv = sol.bias;
      for (std::size_t s = 0; s < tr.size(); ++s) {
        const double a = sol.alpha[static_cast<Eigen::Index>(s)];
        if (a > 0.0) dv += y[s] * a * kernel_of(pair_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(tr[s])));
      }
      const int pred = dv > 0.0 ? 1 : 0;
      if (pred == labels_[t]) ++correct;
    }
    out.push_back(static_cast<double>(correct) / static_cast<double>(te.size()));
  }
  return out;
}

double CvResponse::operator()(const HyperPoint& p) const {
  const auto acc = fold_accuracies(p);
  double sum = 0.0;
  for (double a : acc) sum += a;
  return sum / static_cast<double>(acc.size());
}

ResponseFunction as_response(std::shared_ptr<const CvResponse> cv) {
  return [cv = std::move(cv)](const HyperPoint& p) { return (*cv)(p); };
}

void write_eval_log_jsonl(std::ostream& out, std::span<const Evaluation> log) {
  for (const auto& e : log) {
    nlohmann::json j{{"log2C", e.point.log2C}, {"log2gamma", e.point.log2gamma}, {"accuracy", e.accuracy}, {"seq", e.seq}};
    out << j.dump() << '\n';
  }
}

}  // namespace svmtune
