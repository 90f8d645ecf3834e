#include "svmtune/registry.hpp"

#include "svmtune/error.hpp"
#include "svmtune/gridlike.hpp"
#include "svmtune/optimizers.hpp"

#include <cmath>

namespace svmtune {
namespace {

std::vector<AlgorithmSpec> build_registry() {
  std::vector<AlgorithmSpec> r;
  const auto add = [&](const char* name, Family f, std::initializer_list<std::size_t> budgets) {
    for (std::size_t n : budgets) r.push_back({std::string(name) + std::to_string(n), f, n});
  };
  add("grid", Family::grid, {25, 100, 400});
  add("ud", Family::ud, {25, 100, 400});
  add("rand", Family::rand, {25, 100, 400});
  add("normrand", Family::normrand, {25, 100, 400});
  add("gridhier", Family::gridhier, {50, 200});
  add("udhier", Family::udhier, {50, 200});
  add("nelder", Family::nelder, {25, 100, 400});
  add("bobyqa", Family::bobyqa, {25, 100, 400});
  add("sa", Family::sa, {25, 100, 400});
  add("pso", Family::pso, {25, 100, 400});
  add("cma", Family::cma, {100, 400});
  add("bogp", Family::bogp, {100, 400});
  add("tpe", Family::tpe, {100, 400});
  add("skl", Family::skl, {1, 5, 10, 20});
  add("sigest", Family::sigest, {5, 10, 20});
  add("dbtc", Family::dbtc, {5, 10, 20});
  add("sdbtc", Family::sdbtc, {5, 10, 20});
  add("asymp", Family::asymp, {10, 20, 40});
  return r;
}

const Eigen::MatrixXd& features_of(const SearchProblem& p) {
  if (!p.features || !p.labels) throw ConfigError("gamma estimators need training rows and labels");
  return *p.features;
}

}  // namespace

const std::vector<AlgorithmSpec>& algorithm_registry() {
  static const std::vector<AlgorithmSpec> registry = build_registry();
  return registry;
}

std::string registry_listing() {
  std::string out;
  for (const auto& a : algorithm_registry()) {
    if (!out.empty()) out += ", ";
    out += a.id;
  }
  return out;
}

const AlgorithmSpec& find_algorithm(std::string_view id) {
  for (const auto& a : algorithm_registry()) {
    if (a.id == id) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(id) + "'; known: " + registry_listing());
}

bool is_grid_like(Family f) {
  return f == Family::grid || f == Family::ud || f == Family::rand || f == Family::normrand;
}

SearchOutcome run_search(const AlgorithmSpec& algorithm, const SearchProblem& problem) {
  if (!problem.rbf) throw ConfigError("search problem has no response surface");
  const std::size_t n = algorithm.budget;
  const std::size_t rbf_budget = algorithm.family == Family::asymp ? n / 2 : n;
  SurfaceEvaluator ev(problem.rbf, rbf_budget);
  if (problem.deadline) ev.set_deadline(*problem.deadline);
  const OptimizerConfig cfg{rbf_budget, problem.seed};

  SearchOutcome out;
  switch (algorithm.family) {
    case Family::grid: out.ties = run_flat(ev, grid_points(n)); break;
    case Family::ud: out.ties = run_flat(ev, ud_points(n)); break;
    case Family::rand: out.ties = run_flat(ev, rand_points(n, problem.seed)); break;
    case Family::normrand: out.ties = run_flat(ev, normrand_points(n, problem.seed)); break;
    case Family::gridhier: out.ties = run_hier(ev, ProbeGenerator::grid, n / 2); break;
    case Family::udhier: out.ties = run_hier(ev, ProbeGenerator::ud, n / 2); break;
    case Family::nelder: out.ties = nelder_mead(ev, cfg); break;
    case Family::bobyqa: out.ties = quad_trust_region(ev, cfg); break;
    case Family::sa: out.ties = simulated_annealing(ev, cfg); break;
    case Family::pso: out.ties = particle_swarm(ev, cfg); break;
    case Family::cma: out.ties = cma_es(ev, cfg); break;
    case Family::bogp: out.ties = gp_bayes_opt(ev, cfg); break;
    case Family::tpe: out.ties = tpe(ev, cfg); break;
    case Family::skl:
      out.gamma = skl_gamma(static_cast<std::size_t>(features_of(problem).cols()));
      out.ties = fixed_gamma_c_search(ev, out.gamma->gamma, n);
      break;
    case Family::sigest:
      out.gamma = sigest_gamma(features_of(problem), problem.seed);
      out.ties = fixed_gamma_c_search(ev, out.gamma->gamma, n);
      break;
    case Family::dbtc:
    case Family::sdbtc: {
      const double fraction = algorithm.family == Family::sdbtc ? 0.5 : 1.0;
      out.gamma = dbtc_gamma(features_of(problem), *problem.labels, n, fraction, problem.seed);
      out.ties = fixed_gamma_c_search(ev, out.gamma->gamma, n);
      break;
    }
    case Family::asymp: {
      if (!problem.linear) throw ConfigError("asymp needs a linear-kernel surface");
      SurfaceEvaluator lin(problem.linear, n - rbf_budget);
      if (problem.deadline) lin.set_deadline(*problem.deadline);
      out.ties = asymp_search(lin, ev, rbf_budget).best;
      out.linear_log = lin.log();
      break;
    }
  }
  out.log = ev.log();
  out.best_accuracy = ev.best_value();
  out.eval_count = ev.evaluations() + out.linear_log.size();
  return out;
}

}  // namespace svmtune
