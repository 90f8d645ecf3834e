#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svmtune {

std::vector<HyperPoint> cma_es(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const CmaOptions& opts) {
  const std::size_t lambda = opts.lambda;
  const std::size_t mu = opts.mu;
  if (lambda < 2 || mu < 1 || mu > lambda) throw ConfigError("cma_es: need 1 <= mu <= lambda, lambda >= 2");
  if (cfg.budget < lambda) throw ConfigError("cma_es needs a budget of at least one generation");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  constexpr double n = 2.0;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i) {
    weights[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
  const double chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  const HyperPoint centre = kSearchBox.center();
  Eigen::Vector2d mean(centre.log2C, centre.log2gamma);
  double sigma = opts.sigma0 > 0.0 ? opts.sigma0 : 0.25 * std::hypot(kSearchBox.c_side(), kSearchBox.g_side());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  Eigen::Vector2d p_sigma = Eigen::Vector2d::Zero();
  Eigen::Vector2d p_c = Eigen::Vector2d::Zero();

  const std::size_t generations = cfg.budget / lambda;
  for (std::size_t gen = 0; gen < generations; ++gen) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const Eigen::Matrix2d basis = eig.eigenvectors();
    const Eigen::Vector2d scales = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    const Eigen::Matrix2d inv_sqrt = basis * scales.cwiseInverse().asDiagonal() * basis.transpose();

    struct Candidate {
      Eigen::Vector2d x;
      double f;
    };
    std::vector<Candidate> pop;
    pop.reserve(lambda);
    for (std::size_t k = 0; k < lambda; ++k) {
      Eigen::Vector2d z;
      z << normal(rng), normal(rng);
      Eigen::Vector2d x = mean + sigma * (basis * scales.asDiagonal() * z);
      x[0] = std::clamp(x[0], kSearchBox.c_lo, kSearchBox.c_hi);
      x[1] = std::clamp(x[1], kSearchBox.g_lo, kSearchBox.g_hi);
      const auto e = objective({x[0], x[1]});
      if (!e) return objective.result();
      pop.push_back({x, e->accuracy});
    }
    std::stable_sort(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) { return a.f > b.f; });

    const Eigen::Vector2d old_mean = mean;
    mean.setZero();
    for (std::size_t i = 0; i < mu; ++i) mean += weights[static_cast<Eigen::Index>(i)] * pop[i].x;
    const Eigen::Vector2d shift = (mean - old_mean) / sigma;

    p_sigma = (1.0 - c_sigma) * p_sigma + std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * (inv_sqrt * shift);
    const double ps_norm = p_sigma.norm();
    const double decay = 1.0 - std::pow(1.0 - c_sigma, 2.0 * static_cast<double>(gen + 1));
    const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * chi_n;
    p_c = (1.0 - c_c) * p_c + (h_sigma ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * shift;

    Eigen::Matrix2d rank_mu = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < mu; ++i) {
      const Eigen::Vector2d y = (pop[i].x - old_mean) / sigma;
      rank_mu += weights[static_cast<Eigen::Index>(i)] * y * y.transpose();
    }
    const double correction = h_sigma ? 0.0 : c_c * (2.0 - c_c);
    cov = (1.0 - c_1 - c_mu) * cov + c_1 * (p_c * p_c.transpose() + correction * cov) + c_mu * rank_mu;
    cov = 0.5 * (cov + cov.transpose());
    // Keep the covariance well conditioned after clipping-induced collapse.
    const double floor = 1e-14 * std::max(1.0, cov.trace());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> check(cov);
    if (check.eigenvalues().minCoeff() < floor) {
      cov = check.eigenvectors() * check.eigenvalues().cwiseMax(floor).asDiagonal() * check.eigenvectors().transpose();
      cov = 0.5 * (cov + cov.transpose());
    }

    sigma *= std::exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0));
    sigma = std::clamp(sigma, 1e-12, 1e3);
    if (opts.on_generation) opts.on_generation(cov, sigma);
  }
  return objective.result();
}

}  // namespace svmtune
