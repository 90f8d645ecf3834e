#include "svmtune/error.hpp"
#include "svmtune/random.hpp"
#include "svmtune/svm.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace svmtune;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<int> labels;
};

Problem random_problem(std::uint64_t seed, std::size_t n_max, std::size_t d_max) {
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick_n(4, n_max);
  std::uniform_int_distribution<std::size_t> pick_d(1, d_max);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto n = pick_n(rng);
  const auto d = pick_d(rng);
  Problem p;
  p.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
    p.labels.push_back(static_cast<int>(i % 2));
    for (Eigen::Index j = 0; j < p.x.cols(); ++j) p.x(i, j) = z(rng) + (j == 0 ? 0.8 * (i % 2) : 0.0);
  }
  return p;
}


std::vector<double> row_copy(const Eigen::MatrixXd& x, Eigen::Index i) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) v[static_cast<std::size_t>(j)] = x(i, j);
  return v;
}

}  // namespace

TEST(Kernel, RbfSelfIsOne) {
  const std::vector<double> x{0.3, -2.0, 7.0};
  EXPECT_EQ(kernel_eval(KernelSpec::rbf(3.7), x, x), 1.0);
}

TEST(Kernel, RbfKnownValue) {
  const std::vector<double> a{0, 0};
  const std::vector<double> b{1, 1};
  EXPECT_NEAR(kernel_eval(KernelSpec::rbf(0.5), a, b), std::exp(-1.0), 1e-15);
}

TEST(Kernel, LinearDot) {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{3, 4};
  EXPECT_EQ(kernel_eval(KernelSpec::linear(), a, b), 11.0);
}

TEST(Kernel, DimensionMismatchAndBadGamma) {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{3};
  EXPECT_THROW(kernel_eval(KernelSpec::linear(), a, b), ConfigError);
  EXPECT_THROW(KernelSpec::rbf(0.0), ConfigError);
}

TEST(Kernel, SymmetryAndRange) {
  Rng rng = make_rng(3);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(4);
    std::vector<double> b(4);
    for (auto& v : a) v = z(rng);
    for (auto& v : b) v = z(rng);
    const auto spec = KernelSpec::rbf(std::exp2(z(rng)));
    const double k1 = kernel_eval(spec, a, b);
    EXPECT_EQ(k1, kernel_eval(spec, b, a));
    EXPECT_GE(k1, 0.0);
    EXPECT_LE(k1, 1.0);
  }
}

TEST(Train, SymmetricPairLinear) {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  const std::vector<int> labels{0, 1};
  const auto model = train(x, labels, {10.0}, KernelSpec::linear());
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(model.decision_value(zero), 0.0, 1e-9);
  EXPECT_EQ(accuracy(model, x, labels), 1.0);
  const std::vector<double> q{-0.5};
  EXPECT_EQ(model.predict(q), 0);
  EXPECT_FALSE(model.support_indices.empty());
}

TEST(Train, XorRbf) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> labels{0, 0, 1, 1};
  const auto model = train(x, labels, {100.0}, KernelSpec::rbf(1.0));
  EXPECT_EQ(accuracy(model, x, labels), 1.0);
}

TEST(Train, SingleClassRejected) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const std::vector<int> labels{1, 1, 1};
  EXPECT_THROW(train(x, labels, {}, KernelSpec::linear()), DataError);
}

TEST(Accuracy, Counting) {
  Eigen::MatrixXd x(2, 1);
  x << -1, 1;
  const std::vector<int> labels{0, 1};
  const auto model = train(x, labels, {10.0}, KernelSpec::linear());
  Eigen::MatrixXd t(4, 1);
  t << -2, -1, 1, 2;
  EXPECT_EQ(accuracy(model, t, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(accuracy(model, t, std::vector<int>{1, 1, 0, 0}), 0.0);
  EXPECT_EQ(accuracy(model, t, std::vector<int>{0, 0, 1, 0}), 0.75);
  EXPECT_THROW(accuracy(model, Eigen::MatrixXd(0, 1), std::vector<int>{}), Error);
}

TEST(Predict, ZeroDecisionIsClassZero) {
  SvmModel m;
  m.kernel = KernelSpec::linear();
  m.support_vectors = Eigen::MatrixXd::Zero(1, 1);
  m.support_indices = {0};
  m.dual_coefs = {1.0};
  m.bias = 0.0;
  const std::vector<double> x{5.0};
  EXPECT_EQ(m.decision_value(x), 0.0);
  EXPECT_EQ(m.predict(x), 0);
}

TEST(Solver, MatchesDualOracleOnSmallProblems) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(100 + seed, 12, 4);
    const double c = std::exp2(static_cast<double>(seed % 5) - 1.0);
    const auto spec = seed % 3 == 0 ? KernelSpec::linear() : KernelSpec::rbf(0.5);
    const Eigen::MatrixXd gram = gram_matrix(p.x, spec);
    const auto y = to_signed_labels(p.labels);
    DenseKernelRows rows(gram);
    TrainConfig cfg{c, 1e-6, 0};
    const auto sol = solve_dual(rows, y, cfg);
    const auto oracle = fixtures::dual_oracle(gram, y, c);
    EXPECT_NEAR(dual_objective(gram, y, sol.alpha), dual_objective(gram, y, oracle), 1e-4) << "seed " << seed;
  }
}

TEST(Solver, KktAndFeasibility) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(500 + seed, 40, 5);
    const double c = std::exp2(static_cast<double>(seed % 7) - 2.0);
    const auto spec = KernelSpec::rbf(std::exp2(static_cast<double>(seed % 4) - 2.0));
    const double tol = 1e-3;
    const Eigen::MatrixXd gram = gram_matrix(p.x, spec);
    const auto y = to_signed_labels(p.labels);
    DenseKernelRows rows(gram);
    const auto sol = solve_dual(rows, y, {c, tol, 0});
    ASSERT_TRUE(sol.converged);
    double balance = 0.0;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
      const double a = sol.alpha[i];
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, c);
      balance += y[static_cast<std::size_t>(i)] * a;
      double f = sol.bias;
      for (Eigen::Index j = 0; j < gram.rows(); ++j) f += y[static_cast<std::size_t>(j)] * sol.alpha[j] * gram(i, j);
      const double m = y[static_cast<std::size_t>(i)] * f;
      if (a <= 0.0) {
        EXPECT_GE(m, 1.0 - tol) << "seed " << seed << " i " << i;
      } else if (a >= c) {
        EXPECT_LE(m, 1.0 + tol) << "seed " << seed << " i " << i;
      } else {
        EXPECT_LE(std::abs(m - 1.0), tol) << "seed " << seed << " i " << i;
      }
    }
    EXPECT_LE(std::abs(balance), tol);
  }
}

TEST(Solver, ModelMatchesDualSolution) {
  const auto p = random_problem(77, 30, 3);
  const auto spec = KernelSpec::rbf(0.7);
  const auto model = train(p.x, p.labels, {2.0}, spec);
  for (double coef : model.dual_coefs) {
    EXPECT_GT(std::abs(coef), 0.0);
    EXPECT_LE(std::abs(coef), 2.0);
  }
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
    const auto r = row_copy(p.x, i);
    double f = model.bias;
    for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
      f += model.dual_coefs[s] * kernel_eval(spec, r, row_copy(p.x, static_cast<Eigen::Index>(model.support_indices[s])));
    }
    EXPECT_NEAR(model.decision_value(r), f, 1e-10);
  }
}

TEST(Solver, OnDemandRowsAgreeWithDense) {
  const auto p = random_problem(9, 40, 3);
  const auto spec = KernelSpec::rbf(0.3);
  const auto y = to_signed_labels(p.labels);
  DenseKernelRows dense(gram_matrix(p.x, spec));
  OnDemandKernelRows lazy(p.x, spec, 4);
  const auto a = solve_dual(dense, y, {1.0, 1e-3, 0});
  const auto b = solve_dual(lazy, y, {1.0, 1e-3, 0});
  EXPECT_LE((a.alpha - b.alpha).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.bias, b.bias, 1e-12);
}

TEST(Solver, IterationCapFlagsUnconverged) {
  const auto p = random_problem(11, 40, 3);
  const auto spec = KernelSpec::rbf(8.0);
  const auto y = to_signed_labels(p.labels);
  DenseKernelRows rows(gram_matrix(p.x, spec));
  const auto sol = solve_dual(rows, y, {1e4, 1e-3, 1});
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 1u);
  EXPECT_EQ(default_max_iterations(10), 10000u);
  EXPECT_EQ(default_max_iterations(100000), 1000000u);
}
