#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <array>

namespace svmtune {

std::size_t default_swarm_size(std::size_t budget) { return budget <= 25 ? 5 : 10; }

std::vector<HyperPoint> particle_swarm(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const SwarmOptions& opts) {
  std::size_t swarm = opts.swarm_size ? opts.swarm_size : default_swarm_size(cfg.budget);
  if (!opts.initial_positions.empty()) swarm = opts.initial_positions.size();
  if (swarm == 0 || cfg.budget < swarm) throw ConfigError("particle_swarm needs a budget of at least the swarm size");
  if (!opts.initial_velocities.empty() && opts.initial_velocities.size() != swarm) {
    throw ConfigError("particle_swarm: initial velocities must match the swarm");
  }
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const std::array<double, 2> lo{kSearchBox.c_lo, kSearchBox.g_lo};
  const std::array<double, 2> hi{kSearchBox.c_hi, kSearchBox.g_hi};

  std::vector<std::array<double, 2>> x(swarm);
  std::vector<std::array<double, 2>> v(swarm);
  for (std::size_t i = 0; i < swarm; ++i) {
    if (!opts.initial_positions.empty()) {
      const HyperPoint p = kSearchBox.clamp(opts.initial_positions[i]);
      x[i] = {p.log2C, p.log2gamma};
    } else {
      for (int d = 0; d < 2; ++d) x[i][d] = lo[d] + u01(rng) * (hi[d] - lo[d]);
    }
    if (!opts.initial_velocities.empty()) {
      v[i] = opts.initial_velocities[i];
    } else {
      // half the distance to a uniform random point
      for (int d = 0; d < 2; ++d) v[i][d] = 0.5 * (lo[d] + u01(rng) * (hi[d] - lo[d]) - x[i][d]);
    }
  }

  std::vector<std::array<double, 2>> pbest = x;
  std::vector<double> pbest_f(swarm, -std::numeric_limits<double>::infinity());
  std::array<double, 2> gbest = x.front();
  double gbest_f = -std::numeric_limits<double>::infinity();

  const std::size_t iterations = cfg.budget / swarm;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (it > 0) {
      for (std::size_t i = 0; i < swarm; ++i) {
        for (int d = 0; d < 2; ++d) {
          const double r1 = u01(rng);
          const double r2 = u01(rng);
          v[i][d] = opts.inertia * v[i][d] + opts.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                    opts.social * r2 * (gbest[d] - x[i][d]);
          x[i][d] += v[i][d];
          if (x[i][d] < lo[d] || x[i][d] > hi[d]) {
            x[i][d] = std::clamp(x[i][d], lo[d], hi[d]);
            v[i][d] = 0.0;
          }
        }
      }
    }
    // Evaluate the whole swarm, then update the bests in particle order.
    for (std::size_t i = 0; i < swarm; ++i) {
      const auto e = objective({x[i][0], x[i][1]});
      if (!e) return objective.result();
      if (e->accuracy > pbest_f[i]) {
        pbest_f[i] = e->accuracy;
        pbest[i] = x[i];
      }
    }
    for (std::size_t i = 0; i < swarm; ++i) {
      if (pbest_f[i] > gbest_f) {
        gbest_f = pbest_f[i];
        gbest = pbest[i];
      }
    }
    if (opts.on_iteration) {
      std::vector<HyperPoint> positions;
      for (const auto& p : x) positions.push_back({p[0], p[1]});
      opts.on_iteration(positions);
    }
  }
  return objective.result();
}

}  // namespace svmtune
