#pragma once

#include "svmtune/hyperpoint.hpp"
#include "svmtune/random.hpp"
#include "svmtune/surface.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace svmtune {

/// Shared settings for the budgeted optimizers. Every optimizer consumes at
/// most `budget` evaluations from the evaluator and returns the argmax set of
/// the evaluations it made.
struct OptimizerConfig {
  std::size_t budget = 100;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------- Nelder-Mead

struct NelderMeadOptions {
  /// Initial simplex: box centre plus one step per axis of this fraction of
  /// the box side.
  double step_fraction = 0.1;
  /// Converged once the vertex values agree to ftol * (1 + |best|) or the
  /// simplex diameter drops below xtol (log2 units).
  double ftol = 1e-9;
  double xtol = 1e-6;
};

/// Bounded Nelder-Mead started at the box centre, restarted from a uniform
/// random point whenever it converges with budget left.
std::vector<HyperPoint> nelder_mead(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                    const NelderMeadOptions& opts = {});

// ----------------------------------------------- quadratic-model trust region

/// q(u) = c + g.d + 1/2 d'Hd with d = u - origin.
struct QuadraticModel {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double c = 0.0;
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();

  double operator()(const Eigen::Vector2d& u) const;
};

/// Fits the 6-coefficient quadratic through exactly six points. Returns
/// nullopt when the points are not poised for interpolation.
std::optional<QuadraticModel> fit_quadratic(const std::vector<Eigen::Vector2d>& points,
                                            const std::vector<double>& values);

/// Exact maximizer of a 2-D quadratic over an axis-aligned rectangle
/// [lo, hi]: interior stationary point when H is negative definite, otherwise
/// the best of the edge and corner maximizers.
Eigen::Vector2d maximize_quadratic_on_rect(const QuadraticModel& q, const Eigen::Vector2d& lo,
                                           const Eigen::Vector2d& hi);

struct TrustRegionOptions {
  double initial_radius = 0.1;  // fraction of each box side
  double min_radius = 1e-6;
  double max_radius = 0.5;
  /// Called with every proposal (log2 space) before it is evaluated.
  std::function<void(const HyperPoint&)> on_proposal;
};

/// Quadratic-interpolation trust region (six-point model, box-shaped trust
/// region intersected with the search box, ratio-test radius updates). Same
/// centre start and random restart policy as nelder_mead.
std::vector<HyperPoint> quad_trust_region(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                          const TrustRegionOptions& opts = {});

// ---------------------------------------------------- simulated annealing

struct AnnealingOptions {
  std::size_t bootstrap_probes = 5;
  double cooling = 0.95;
  double step_fraction = 0.1;
  /// Overrides the bootstrap estimate of the starting temperature.
  std::optional<double> initial_temperature;
  /// Receives (from, to) for every accepted move.
  std::function<void(const Evaluation&, const Evaluation&)> on_accept;
};

/// Metropolis acceptance with T_t = T0 * cooling^t and Gaussian proposals
/// clipped to the box. T0 is the standard deviation of the bootstrap probes
/// (box centre plus uniform random points); the walk starts at the best probe.
std::vector<HyperPoint> simulated_annealing(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                            const AnnealingOptions& opts = {});

/// Metropolis acceptance probability for a maximization step.
double metropolis_acceptance(double current, double proposal, double temperature);

// ----------------------------------------------------------- particle swarm

struct SwarmOptions {
  /// 0 selects 10 particles, or 5 when the budget is 25 or less.
  std::size_t swarm_size = 0;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  std::vector<HyperPoint> initial_positions;
  std::vector<std::array<double, 2>> initial_velocities;
  /// Positions after every iteration.
  std::function<void(const std::vector<HyperPoint>&)> on_iteration;
};

std::size_t default_swarm_size(std::size_t budget);

/// Global-best PSO with constriction constants. floor(N / swarm) iterations;
/// positions clipped to the box with the offending velocity component zeroed.
std::vector<HyperPoint> particle_swarm(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                       const SwarmOptions& opts = {});

// ------------------------------------------------------------------ CMA-ES

struct CmaOptions {
  std::size_t lambda = 6;
  std::size_t mu = 3;
  /// Initial step size; 0 selects a quarter of the box diagonal.
  double sigma0 = 0.0;
  std::function<void(const Eigen::Matrix2d& covariance, double sigma)> on_generation;
};

/// (mu/mu_w, lambda)-CMA-ES in log2 space with rank-one and rank-mu
/// covariance updates and cumulative step-size adaptation. floor(N / lambda)
/// generations; candidates clipped to the box.
std::vector<HyperPoint> cma_es(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const CmaOptions& opts = {});

// ------------------------------------------------- Gaussian process surrogate

/// Squared-exponential ARD kernel hyperparameters over unit-square inputs and
/// standardized outputs.
struct GpHyper {
  double length_c = 0.2;
  double length_g = 0.2;
  double signal_var = 1.0;
  double noise_var = 1e-6;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regression with constant mean. The Cholesky factorization adds
/// jitter (1e-10 * signal_var, growing x10) when needed and throws
/// NumericalError("ill-conditioned surrogate") past 1e-2 * signal_var.
class GpSurrogate {
 public:
  GpSurrogate(std::vector<Eigen::Vector2d> inputs, std::vector<double> targets, GpHyper hyper, double prior_mean);

  GpPrediction predict(const Eigen::Vector2d& u) const;
  /// Appends one observation with a rank-one extension of the factor. Falls
  /// back to refactorizing (with more jitter) when the extension is unstable.
  void add(const Eigen::Vector2d& u, double y);

  double kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  std::size_t size() const { return inputs_.size(); }
  const GpHyper& hyper() const { return hyper_; }
  double jitter() const { return jitter_; }
  double prior_mean() const { return prior_mean_; }
  const Eigen::MatrixXd& factor() const { return chol_; }
  const std::vector<Eigen::Vector2d>& inputs() const { return inputs_; }
  /// L^-1 (y - prior_mean).
  const Eigen::VectorXd& whitened_targets() const { return white_; }
  /// Increments every time the factor is rebuilt from scratch.
  std::size_t generation() const { return generation_; }

 private:
  void factorize();
  void refresh_targets();

  std::vector<Eigen::Vector2d> inputs_;
  std::vector<double> targets_;
  GpHyper hyper_;
  double prior_mean_;
  double jitter_ = 0.0;
  Eigen::MatrixXd chol_;  // lower triangular, size() x size()
  Eigen::VectorXd white_;
  std::size_t generation_ = 0;
};

/// Negative log marginal likelihood of standardized targets.
double gp_negative_log_likelihood(const std::vector<Eigen::Vector2d>& inputs, const std::vector<double>& targets,
                                  const GpHyper& hyper);

/// Marginal-likelihood fit (simplex search in log-hyperparameter space with
/// seeded restarts). Targets are expected to be standardized.
GpHyper fit_gp_hyperparameters(const std::vector<Eigen::Vector2d>& inputs, const std::vector<double>& targets, Rng& rng);

/// EI for maximization: E[max(f - best - xi, 0)]. Zero when sigma is zero and
/// the mean does not exceed best + xi.
double expected_improvement(double mean, double sigma, double best, double xi);

struct BayesOptOptions {
  /// 0 selects max(5, N / 10).
  std::size_t init_design = 0;
  double xi = 0.01;  // in standardized target units
  std::size_t lattice_side = 100;
  std::size_t polish_steps = 10;
  /// Hyperparameters are refit once the number of distinct observations has
  /// grown by this factor since the previous fit.
  double refit_growth = 1.25;
  std::size_t max_fit_points = 100;
};

/// GP Bayesian optimization: uniform-design initial sample, then maximize EI
/// over a lattice in the box plus a local polish, one evaluation per step.
std::vector<HyperPoint> gp_bayes_opt(SurfaceEvaluator& ev, const OptimizerConfig& cfg,
                                     const BayesOptOptions& opts = {});

// ------------------------------------------------- tree of Parzen estimators

struct TpeSplit {
  std::vector<Evaluation> good;
  std::vector<Evaluation> bad;
  double quantile = 0.25;
};

/// Good set = the top ceil(quantile * n) observations by value (earlier
/// evaluations win ties); the rest are bad.
TpeSplit tpe_split(std::vector<Evaluation> observations, double quantile);

/// Gaussian kernel density in log2 space. Per-dimension bandwidth of each
/// component is the distance to its nearest neighbour in that dimension
/// within the same set, clamped to [side / 50, side]; a single observation
/// gets side / 10.
class ParzenDensity {
 public:
  explicit ParzenDensity(const std::vector<HyperPoint>& centers);

  /// Picks a component uniformly and draws from it, clipped to the box.
  HyperPoint sample(Rng& rng) const;
  double log_density(const HyperPoint& p) const;

  const std::vector<HyperPoint>& centers() const { return centers_; }
  const std::vector<std::array<double, 2>>& bandwidths() const { return bandwidths_; }

 private:
  std::vector<HyperPoint> centers_;
  std::vector<std::array<double, 2>> bandwidths_;
};

struct TpeOptions {
  double quantile = 0.25;
  /// 0 selects max(10, N / 10).
  std::size_t init_design = 0;
  std::size_t candidates = 24;
};

/// TPE: random initial design, then repeatedly draw candidates from the
/// good-set density l(x) and evaluate the one maximizing l(x) / g(x).
std::vector<HyperPoint> tpe(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const TpeOptions& opts = {});

}  // namespace svmtune
