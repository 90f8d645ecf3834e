#include "svmtune/error.hpp"
#include "svmtune/gridlike.hpp"
#include "svmtune/optimizers.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>

using namespace svmtune;
using fixtures::concave_surrogate;

namespace {

const HyperPoint kOptimum{5.0, -5.0};

using Optimizer = std::function<std::vector<HyperPoint>(SurfaceEvaluator&, const OptimizerConfig&)>;

const std::map<std::string, Optimizer>& optimizers() {
  static const std::map<std::string, Optimizer> all{
      {"nelder", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return nelder_mead(ev, c); }},
      {"bobyqa", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return quad_trust_region(ev, c); }},
      {"sa", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return simulated_annealing(ev, c); }},
      {"pso", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return particle_swarm(ev, c); }},
      {"cma", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return cma_es(ev, c); }},
      {"bogp", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return gp_bayes_opt(ev, c); }},
      {"tpe", [](SurfaceEvaluator& ev, const OptimizerConfig& c) { return tpe(ev, c); }},
  };
  return all;
}

double best_value(const std::vector<HyperPoint>& pts) { return concave_surrogate(pts.front()); }

double rand_best(std::size_t n, std::uint64_t seed) {
  SurfaceEvaluator ev(concave_surrogate, n);
  return best_value(run_flat(ev, rand_points(n, seed)));
}

}  // namespace

TEST(Optimizers, BudgetDeterminismAndArgmax) {
  const auto bumpy = [](const HyperPoint& p) {
    return std::round(10.0 * (std::sin(p.log2C) + std::cos(0.7 * p.log2gamma))) / 10.0;
  };
  for (const auto& [name, run] : optimizers()) {
    const std::size_t n = 60;
    SurfaceEvaluator a(bumpy, 1000);
    SurfaceEvaluator b(bumpy, 1000);
    const auto ra = run(a, {n, 42});
    const auto rb = run(b, {n, 42});
    EXPECT_LE(a.evaluations(), n) << name;
    ASSERT_EQ(a.log().size(), b.log().size()) << name;
    for (std::size_t i = 0; i < a.log().size(); ++i) {
      EXPECT_EQ(a.log()[i].point, b.log()[i].point) << name;
      EXPECT_TRUE(in_search_box(a.log()[i].point)) << name;
    }
    EXPECT_EQ(ra, rb) << name;
    EXPECT_EQ(ra, a.best_so_far()) << name;
    const bool exact = name != "cma";
    if (exact) EXPECT_EQ(a.evaluations(), n) << name;
  }
}

TEST(Optimizers, StopsAtEvaluatorBudget) {
  for (const auto& [name, run] : optimizers()) {
    SurfaceEvaluator ev(concave_surrogate, 30);
    run(ev, {400, 1});
    EXPECT_LE(ev.evaluations(), 30u) << name;
  }
}

TEST(NelderMead, ConvergesOnSurrogate) {
  SurfaceEvaluator ev(concave_surrogate, 100);
  const auto best = nelder_mead(ev, {100, 3});
  EXPECT_LE(log2_distance(best.front(), kOptimum), 0.5);
}

TEST(NelderMead, ConstantSurfaceUsesWholeBudget) {
  SurfaceEvaluator ev([](const HyperPoint&) { return 0.5; }, 25);
  nelder_mead(ev, {25, 3});
  EXPECT_EQ(ev.evaluations(), 25u);
}

TEST(NelderMead, MinimalBudgetReturnsBestVertex) {
  SurfaceEvaluator ev(concave_surrogate, 3);
  const auto best = nelder_mead(ev, {3, 3});
  ASSERT_EQ(ev.evaluations(), 3u);
  double top = -1e300;
  for (const auto& e : ev.log()) top = std::max(top, e.accuracy);
  EXPECT_EQ(concave_surrogate(best.front()), top);
  EXPECT_EQ(ev.log()[0].point, kSearchBox.center());
  EXPECT_THROW(nelder_mead(ev, {2, 3}), ConfigError);
}

TEST(QuadraticModel, FitRecoversExactQuadratic) {
  const auto f = [](const Eigen::Vector2d& u) {
    return 0.3 - 1.2 * u[0] + 0.4 * u[1] - 2.0 * u[0] * u[0] + 0.7 * u[0] * u[1] - 0.9 * u[1] * u[1];
  };
  const std::vector<Eigen::Vector2d> pts{{0.2, 0.3}, {0.5, 0.3}, {0.2, 0.7}, {0.9, 0.1}, {0.4, 0.8}, {0.6, 0.6}};
  std::vector<double> vals;
  for (const auto& p : pts) vals.push_back(f(p));
  const auto q = fit_quadratic(pts, vals);
  ASSERT_TRUE(q.has_value());
  for (double x = 0.0; x <= 1.0; x += 0.125) {
    for (double y = 0.0; y <= 1.0; y += 0.125) EXPECT_NEAR((*q)(Eigen::Vector2d(x, y)), f({x, y}), 1e-10);
  }
}

TEST(QuadraticModel, CollinearPointsAreNotPoised) {
  std::vector<Eigen::Vector2d> pts;
  std::vector<double> vals;
  for (int i = 0; i < 6; ++i) {
    pts.emplace_back(0.1 * i, 0.2 * i);
    vals.push_back(i);
  }
  EXPECT_FALSE(fit_quadratic(pts, vals).has_value());
}

TEST(QuadraticModel, RectMaximizerBeatsDenseSearch) {
  Rng rng = make_rng(8);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    QuadraticModel q;
    q.origin = {0.5, 0.5};
    q.c = z(rng);
    q.g = {z(rng), z(rng)};
    const double off = z(rng);
    q.h << z(rng), off, off, z(rng);
    const Eigen::Vector2d lo(0.1, 0.2);
    const Eigen::Vector2d hi(0.8, 0.6);
    const auto u = maximize_quadratic_on_rect(q, lo, hi);
    EXPECT_TRUE((u.array() >= lo.array() - 1e-12).all() && (u.array() <= hi.array() + 1e-12).all());
    double dense = -1e300;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        dense = std::max(dense, q(lo + Eigen::Vector2d(i / 200.0 * 0.7, j / 200.0 * 0.4)));
      }
    }
    EXPECT_GE(q(u), dense - 1e-12);
  }
}

TEST(TrustRegion, FirstProposalIsBoxConstrainedMaximizer) {
  std::vector<HyperPoint> proposals;
  TrustRegionOptions opts;
  opts.on_proposal = [&](const HyperPoint& p) { proposals.push_back(p); };
  SurfaceEvaluator ev(concave_surrogate, 20);
  quad_trust_region(ev, {20, 1}, opts);
  ASSERT_FALSE(proposals.empty());
  // Incumbent after the six-point start, and the trust region around it.
  const Evaluation* inc = &ev.log()[0];
  for (std::size_t i = 1; i < 6; ++i) {
    if (ev.log()[i].accuracy > inc->accuracy) inc = &ev.log()[i];
  }
  const double rc = opts.initial_radius * kSearchBox.c_side();
  const double rg = opts.initial_radius * kSearchBox.g_side();
  // The surrogate is separable and concave, so its maximizer over a rectangle
  // clamps each coordinate of the unconstrained optimum.
  const double c = std::clamp(kOptimum.log2C, inc->point.log2C - rc, inc->point.log2C + rc);
  const double g = std::clamp(kOptimum.log2gamma, inc->point.log2gamma - rg, inc->point.log2gamma + rg);
  EXPECT_NEAR(proposals.front().log2C, c, 1e-6);
  EXPECT_NEAR(proposals.front().log2gamma, g, 1e-6);
}

TEST(TrustRegion, ConvergesAndMinimalBudget) {
  SurfaceEvaluator ev(concave_surrogate, 100);
  EXPECT_LE(log2_distance(quad_trust_region(ev, {100, 5}).front(), kOptimum), 0.5);
  SurfaceEvaluator six(concave_surrogate, 6);
  const auto best = quad_trust_region(six, {6, 5});
  EXPECT_EQ(six.evaluations(), 6u);
  EXPECT_EQ(best, six.best_so_far());
}

TEST(Annealing, MetropolisRule) {
  EXPECT_EQ(metropolis_acceptance(0.5, 0.6, 1.0), 1.0);
  EXPECT_EQ(metropolis_acceptance(0.5, 0.5, 1e-9), 1.0);
  EXPECT_NEAR(metropolis_acceptance(0.5, 0.4, 0.1), std::exp(-1.0), 1e-12);
  EXPECT_EQ(metropolis_acceptance(0.5, 0.4, 0.0), 0.0);
}

TEST(Annealing, ColdWalkNeverAcceptsWorseMoves) {
  AnnealingOptions opts;
  opts.initial_temperature = 1e-300;
  std::size_t accepted = 0;
  opts.on_accept = [&](const Evaluation& from, const Evaluation& to) {
    ++accepted;
    EXPECT_GE(to.accuracy, from.accuracy);
  };
  SurfaceEvaluator ev(concave_surrogate, 200);
  simulated_annealing(ev, {200, 4}, opts);
  EXPECT_GT(accepted, 0u);
}

TEST(Annealing, BeatsRandom25OnAverage) {
  double sa = 0.0;
  double rnd = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SurfaceEvaluator ev(concave_surrogate, 400);
    sa += best_value(simulated_annealing(ev, {400, s}));
    rnd += rand_best(25, s);
  }
  EXPECT_GE(sa, rnd);
}

TEST(Swarm, FixedPointAtOptimum) {
  SwarmOptions opts;
  opts.swarm_size = 1;
  opts.initial_positions = {kOptimum};
  opts.initial_velocities = {{0.0, 0.0}};
  std::size_t iterations = 0;
  opts.on_iteration = [&](const std::vector<HyperPoint>& pos) {
    ++iterations;
    ASSERT_EQ(pos.size(), 1u);
    EXPECT_EQ(pos[0], kOptimum);
  };
  SurfaceEvaluator ev(concave_surrogate, 10);
  particle_swarm(ev, {10, 1}, opts);
  EXPECT_GT(iterations, 0u);
}

TEST(Swarm, BudgetArithmeticAndQuality) {
  EXPECT_EQ(default_swarm_size(25), 5u);
  EXPECT_EQ(default_swarm_size(100), 10u);
  double dist = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SurfaceEvaluator ev(concave_surrogate, 100);
    const auto best = particle_swarm(ev, {100, s});
    EXPECT_EQ(ev.evaluations(), 100u);
    dist += log2_distance(best.front(), kOptimum) / 20.0;
  }
  EXPECT_LE(dist, 1.0);
}

TEST(Cma, CovarianceStaysSymmetricPositiveDefinite) {
  CmaOptions opts;
  std::size_t generations = 0;
  opts.on_generation = [&](const Eigen::Matrix2d& c, double sigma) {
    ++generations;
    EXPECT_EQ(c(0, 1), c(1, 0));
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c).eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(sigma, 0.0);
  };
  SurfaceEvaluator ev(concave_surrogate, 100);
  cma_es(ev, {100, 2}, opts);
  EXPECT_EQ(ev.evaluations(), 96u);
  EXPECT_EQ(generations, 16u);
}

TEST(Cma, MeanBestNearOptimum) {
  double dist = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SurfaceEvaluator ev(concave_surrogate, 400);
    dist += log2_distance(cma_es(ev, {400, s}).front(), kOptimum) / 20.0;
  }
  EXPECT_LE(dist, 0.5);
}

TEST(ExpectedImprovement, Properties) {
  EXPECT_EQ(expected_improvement(0.3, 0.0, 0.5, 0.01), 0.0);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 0.5, 0.01), 0.0);
  EXPECT_NEAR(expected_improvement(0.8, 0.0, 0.5, 0.0), 0.3, 1e-15);
  Rng rng = make_rng(1);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(expected_improvement(z(rng), std::abs(z(rng)), z(rng), 0.01), 0.0);
  // closed form at mean == best, xi = 0: sigma * phi(0)
  EXPECT_NEAR(expected_improvement(1.0, 2.0, 1.0, 0.0), 2.0 / std::sqrt(2.0 * M_PI), 1e-12);
}

TEST(GpSurrogate, InterpolatesNoiselessData) {
  const std::vector<Eigen::Vector2d> x{{0.1, 0.2}, {0.4, 0.9}, {0.7, 0.3}, {0.9, 0.8}, {0.5, 0.5}};
  const std::vector<double> y{0.3, -1.0, 0.8, 0.1, 1.4};
  GpHyper h;
  h.noise_var = 1e-12;
  const GpSurrogate gp(x, y, h, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto pred = gp.predict(x[i]);
    EXPECT_NEAR(pred.mean, y[i], 1e-6);
    EXPECT_LE(pred.variance, 1e-6);
  }
  const auto far = gp.predict({5.0, 5.0});
  EXPECT_NEAR(far.mean, 0.0, 1e-9);
  EXPECT_NEAR(far.variance, h.signal_var, 1e-9);
}

TEST(GpSurrogate, IncrementalAddMatchesBatch) {
  std::vector<Eigen::Vector2d> x{{0.1, 0.2}, {0.4, 0.9}, {0.7, 0.3}};
  std::vector<double> y{0.3, -1.0, 0.8};
  GpSurrogate inc(x, y, {}, 0.1);
  inc.add({0.9, 0.8}, 0.1);
  inc.add({0.5, 0.5}, 1.4);
  x.push_back({0.9, 0.8});
  x.push_back({0.5, 0.5});
  y.push_back(0.1);
  y.push_back(1.4);
  const GpSurrogate batch(x, y, {}, 0.1);
  for (double u = 0.0; u <= 1.0; u += 0.25) {
    const auto a = inc.predict({u, 1.0 - u});
    const auto b = batch.predict({u, 1.0 - u});
    EXPECT_NEAR(a.mean, b.mean, 1e-8);
    EXPECT_NEAR(a.variance, b.variance, 1e-8);
  }
}

TEST(GpSurrogate, HyperparameterFitImprovesLikelihood) {
  std::vector<Eigen::Vector2d> x;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d u((i % 5) / 4.0, (i / 5) / 3.0);
    x.push_back(u);
    y.push_back(std::sin(4.0 * u[0]) + 0.3 * u[1]);
  }
  Rng rng = make_rng(2);
  const GpHyper fitted = fit_gp_hyperparameters(x, y, rng);
  EXPECT_LE(gp_negative_log_likelihood(x, y, fitted), gp_negative_log_likelihood(x, y, GpHyper{}) + 1e-9);
}

TEST(GpBayesOpt, InitialDesignIsUniformDesign) {
  SurfaceEvaluator ev(concave_surrogate, 100);
  gp_bayes_opt(ev, {100, 9});
  const auto ud = ud_points(10).points;
  for (std::size_t i = 0; i < ud.size(); ++i) EXPECT_EQ(ev.log()[i].point, ud[i]);
  EXPECT_LE(log2_distance(ev.best_so_far().front(), kOptimum), 0.5);
}

TEST(Tpe, SplitSizes) {
  std::vector<Evaluation> obs;
  for (std::size_t i = 0; i < 10; ++i) obs.push_back({{double(i), 0.0}, 0.1 * double(i % 4), i});
  const auto split = tpe_split(obs, 0.25);
  EXPECT_EQ(split.good.size(), 3u);
  EXPECT_EQ(split.bad.size(), 7u);
  for (const auto& g : split.good) {
    for (const auto& b : split.bad) EXPECT_GE(g.accuracy, b.accuracy);
  }
  EXPECT_THROW(tpe_split(obs, 1.0), ConfigError);
}

TEST(Tpe, SingleGoodObservationConcentratesSamples) {
  const HyperPoint c{2.0, -7.0};
  const ParzenDensity l({c});
  const auto h = l.bandwidths()[0];
  Rng rng = make_rng(12);
  std::map<std::pair<int, int>, int> hist;
  for (int i = 0; i < 1000; ++i) {
    const auto s = l.sample(rng);
    const int bc = static_cast<int>(std::floor((s.log2C - c.log2C) / (0.5 * h[0])));
    const int bg = static_cast<int>(std::floor((s.log2gamma - c.log2gamma) / (0.5 * h[1])));
    ++hist[{bc, bg}];
  }
  auto mode = hist.begin();
  for (auto it = hist.begin(); it != hist.end(); ++it) {
    if (it->second > mode->second) mode = it;
  }
  const double mc = (mode->first.first + 0.5) * 0.5 * h[0];
  const double mg = (mode->first.second + 0.5) * 0.5 * h[1];
  EXPECT_LE(std::abs(mc), h[0]);
  EXPECT_LE(std::abs(mg), h[1]);
}

TEST(Tpe, BandwidthsFollowNearestNeighbour) {
  const ParzenDensity d({{0.0, 0.0}, {3.0, 0.05}, {10.0, -8.0}});
  EXPECT_DOUBLE_EQ(d.bandwidths()[0][0], 3.0);
  EXPECT_DOUBLE_EQ(d.bandwidths()[2][0], 7.0);
  EXPECT_DOUBLE_EQ(d.bandwidths()[0][1], 18.0 / 50.0);  // floored
  EXPECT_DOUBLE_EQ(d.bandwidths()[2][1], 8.0);
}

TEST(Tpe, NotWorseThanRandomOnAverage) {
  double t = 0.0;
  double r = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SurfaceEvaluator ev(concave_surrogate, 100);
    t += best_value(tpe(ev, {100, s}));
    r += rand_best(100, s);
  }
  EXPECT_GE(t, r);
}
