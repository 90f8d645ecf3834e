#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <cmath>
#include <numeric>

namespace svmtune {

double metropolis_acceptance(double current, double proposal, double temperature) {
  if (proposal >= current) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::exp((proposal - current) / temperature);
}

std::vector<HyperPoint> simulated_annealing(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                            const AnnealingOptions& opts) {
  if (cfg.budget < 2) throw ConfigError("simulated_annealing needs a budget of at least 2");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Bootstrap probes: the box centre plus uniform random points. They set the
  // starting temperature and the starting state.
  const std::size_t probes = std::max<std::size_t>(1, std::min(opts.bootstrap_probes, cfg.budget - 1));
  std::vector<Evaluation> probe_evals;
  for (std::size_t i = 0; i < probes; ++i) {
    HyperPoint p = kSearchBox.center();
    if (i > 0) {
      const double u = u01(rng);
      const double v = u01(rng);
      p = kSearchBox.from_unit(u, v);
    }
    const auto e = objective(p);
    if (!e) return objective.result();
    probe_evals.push_back(*e);
  }

  double temperature = 0.0;
  if (opts.initial_temperature) {
    temperature = *opts.initial_temperature;
  } else if (probe_evals.size() >= 2) {
    double mean = 0.0;
    for (const auto& e : probe_evals) mean += e.accuracy;
    mean /= static_cast<double>(probe_evals.size());
    double ss = 0.0;
    for (const auto& e : probe_evals) ss += (e.accuracy - mean) * (e.accuracy - mean);
    temperature = std::sqrt(ss / static_cast<double>(probe_evals.size() - 1));
  }

  Evaluation current = probe_evals.front();
  for (const auto& e : probe_evals) {
    if (e.accuracy > current.accuracy) current = e;
  }

  std::normal_distribution<double> step_c(0.0, opts.step_fraction * kSearchBox.c_side());
  std::normal_distribution<double> step_g(0.0, opts.step_fraction * kSearchBox.g_side());
  while (!objective.exhausted()) {
    const double dc = step_c(rng);
    const double dg = step_g(rng);
    const HyperPoint proposal = kSearchBox.clamp({current.point.log2C + dc, current.point.log2gamma + dg});
    const auto e = objective(proposal);
    if (!e) break;
    const double p_accept = metropolis_acceptance(current.accuracy, e->accuracy, temperature);
    const double u = u01(rng);
    if (p_accept >= 1.0 || u < p_accept) {
      if (opts.on_accept) opts.on_accept(current, *e);
      current = *e;
    }
    temperature *= opts.cooling;
  }
  return objective.result();
}

}  // namespace svmtune
