#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svmtune {
namespace {

double coord(const HyperPoint& p, int d) { return d == 0 ? p.log2C : p.log2gamma; }
double side(int d) { return d == 0 ? kSearchBox.c_side() : kSearchBox.g_side(); }

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

TpeSplit tpe_split(std::vector<Evaluation> observations, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("tpe quantile must lie in (0, 1)");
  std::stable_sort(observations.begin(), observations.end(),
                   [](const Evaluation& a, const Evaluation& b) { return a.accuracy > b.accuracy; });
  const auto n_good = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(observations.size())));
  TpeSplit split;
  split.quantile = quantile;
  split.good.assign(observations.begin(), observations.begin() + static_cast<std::ptrdiff_t>(n_good));
  split.bad.assign(observations.begin() + static_cast<std::ptrdiff_t>(n_good), observations.end());
  return split;
}

ParzenDensity::ParzenDensity(const std::vector<HyperPoint>& centers) : centers_(centers) {
  if (centers_.empty()) throw ConfigError("ParzenDensity needs at least one center");
  bandwidths_.resize(centers_.size());
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    for (int d = 0; d < 2; ++d) {
      if (centers_.size() == 1) {
        bandwidths_[i][static_cast<std::size_t>(d)] = side(d) / 10.0;
        continue;
      }
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < centers_.size(); ++j) {
        if (j != i) nearest = std::min(nearest, std::abs(coord(centers_[i], d) - coord(centers_[j], d)));
      }
      bandwidths_[i][static_cast<std::size_t>(d)] = std::clamp(nearest, side(d) / 50.0, side(d));
    }
  }
}

HyperPoint ParzenDensity::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, centers_.size() - 1);
  const std::size_t i = pick(rng);
  std::normal_distribution<double> n01(0.0, 1.0);
  const double c = centers_[i].log2C + bandwidths_[i][0] * n01(rng);
  const double g = centers_[i].log2gamma + bandwidths_[i][1] * n01(rng);
  return kSearchBox.clamp({c, g});
}

double ParzenDensity::log_density(const HyperPoint& p) const {
  std::vector<double> terms(centers_.size());
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    double t = 0.0;
    for (int d = 0; d < 2; ++d) {
      const double h = bandwidths_[i][static_cast<std::size_t>(d)];
      const double z = (coord(p, d) - coord(centers_[i], d)) / h;
      t += -0.5 * z * z - std::log(h);
    }
    terms[i] = t;
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(centers_.size()));
}

std::vector<HyperPoint> tpe(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const TpeOptions& opts) {
  const std::size_t init = opts.init_design ? opts.init_design : std::max<std::size_t>(10, cfg.budget / 10);
  if (cfg.budget < init + 1) throw ConfigError("tpe needs a budget of at least init_design + 1");
  if (opts.candidates == 0) throw ConfigError("tpe needs at least one candidate per step");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (std::size_t i = 0; i < init; ++i) {
    const double u = u01(rng);
    const double v = u01(rng);
    if (!objective(kSearchBox.from_unit(u, v))) return objective.result();
  }

  while (!objective.exhausted()) {
    const auto log = objective.own_log();
    const TpeSplit split = tpe_split(std::vector<Evaluation>(log.begin(), log.end()), opts.quantile);
    std::vector<HyperPoint> good;
    std::vector<HyperPoint> bad;
    for (const auto& e : split.good) good.push_back(e.point);
    for (const auto& e : split.bad) bad.push_back(e.point);
    const ParzenDensity l(good);
    // An empty bad set only happens for tiny logs; a flat g keeps the ratio defined.
    const std::optional<ParzenDensity> g = bad.empty() ? std::nullopt : std::optional<ParzenDensity>(bad);

    HyperPoint best_candidate{};
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < opts.candidates; ++c) {
      const HyperPoint x = l.sample(rng);
      const double score = l.log_density(x) - (g ? g->log_density(x) : 0.0);
      if (score > best_score) {
        best_score = score;
        best_candidate = x;
      }
    }
    if (!objective(best_candidate)) break;
  }
  return objective.result();
}

}  // namespace svmtune
