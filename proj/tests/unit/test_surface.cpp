#include "svmtune/dataset.hpp"
#include "svmtune/error.hpp"
#include "svmtune/surface.hpp"

#include "fixtures.hpp"

#include <nlohmann/json.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace svmtune;

namespace {

ResponseFunction table(std::vector<std::pair<HyperPoint, double>> values) {
  return [values](const HyperPoint& p) {
    for (const auto& [q, v] : values) {
      if (quantize(p) == quantize(q)) return v;
    }
    return 0.0;
  };
}

}  // namespace

TEST(SurfaceEvaluator, BudgetExhaustsAfterN) {
  SurfaceEvaluator ev([](const HyperPoint&) { return 0.5; }, 3);
  for (int i = 0; i < 3; ++i) EXPECT_NO_THROW(ev.evaluate({double(i), 0.0}));
  try {
    ev.evaluate({9.0, 0.0});
    FAIL();
  } catch (const BudgetExhausted& e) {
    EXPECT_STREQ(e.what(), "budget exhausted");
  }
  EXPECT_EQ(ev.evaluations(), 3u);
  EXPECT_EQ(ev.budget_remaining(), 0u);
}

TEST(SurfaceEvaluator, CacheHitsConsumeBudget) {
  int calls = 0;
  SurfaceEvaluator ev(
      [&calls](const HyperPoint& p) {
        ++calls;
        return 0.1 * p.log2C;
      },
      5);
  const auto a = ev.evaluate({2.0, 1.0});
  const auto b = ev.evaluate({2.0 + 1e-12, 1.0});
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(ev.cache_hits(), 1u);
  EXPECT_EQ(ev.budget_remaining(), 3u);
  EXPECT_EQ(b.seq, 1u);
}

TEST(SurfaceEvaluator, ClampsOutOfBoxRequests) {
  SurfaceEvaluator ev([](const HyperPoint& p) { return in_search_box(p) ? 1.0 : 0.0; }, 2);
  const auto e = ev.evaluate({40.0, -100.0});
  EXPECT_EQ(e.point, (HyperPoint{15.0, -15.0}));
  EXPECT_EQ(e.accuracy, 1.0);
}

TEST(BestSoFar, ArgmaxSet) {
  const HyperPoint p1{0, 0};
  const HyperPoint p2{1, 1};
  const HyperPoint p3{2, 2};
  SurfaceEvaluator ev(table({{p1, 0.9}, {p2, 0.9}, {p3, 0.8}}), 3);
  ev.evaluate(p1);
  ev.evaluate(p2);
  ev.evaluate(p3);
  EXPECT_EQ(ev.best_so_far(), (std::vector<HyperPoint>{p1, p2}));
  EXPECT_EQ(ev.best_value(), 0.9);
}

TEST(BestSoFar, SingleAndAllEqual) {
  SurfaceEvaluator one([](const HyperPoint&) { return 0.3; }, 1);
  one.evaluate({1, 2});
  EXPECT_EQ(one.best_so_far(), (std::vector<HyperPoint>{{1, 2}}));
  SurfaceEvaluator all([](const HyperPoint&) { return 0.3; }, 4);
  for (int i = 0; i < 4; ++i) all.evaluate({double(i), 0});
  EXPECT_EQ(all.best_so_far().size(), 4u);
}

TEST(BestSoFar, EmptyLogThrowsAndDuplicatesCollapse) {
  SurfaceEvaluator ev([](const HyperPoint&) { return 0.3; }, 3);
  EXPECT_THROW(ev.best_so_far(), ConfigError);
  ev.evaluate({1, 1});
  ev.evaluate({1, 1});
  EXPECT_EQ(ev.best_so_far().size(), 1u);
}

TEST(BestSoFar, InvariantUnderMonotoneTransform) {
  std::vector<Evaluation> log;
  Rng rng = make_rng(5);
  std::uniform_int_distribution<int> v(0, 6);
  for (std::size_t i = 0; i < 40; ++i) log.push_back({{double(i % 7), double(i / 7)}, v(rng) / 6.0, i});
  auto transformed = log;
  for (auto& e : transformed) e.accuracy = std::exp(3.0 * e.accuracy) - 7.0;
  EXPECT_EQ(best_so_far(log), best_so_far(transformed));
}

TEST(CvResponse, MeanOfFoldAccuracies) {
  const auto ds = fixtures::make_blobs(60, 2, 2.0, 4);
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto folds = stratified_folds(ds.labels, rows, 5, 1);
  const CvResponse cv(ds, rows, folds, KernelSpec::Kind::rbf, {});
  const HyperPoint p{1.0, -2.0};
  const auto acc = cv.fold_accuracies(p);
  ASSERT_EQ(acc.size(), 5u);
  const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / 5.0;
  EXPECT_DOUBLE_EQ(cv(p), mean);
  EXPECT_EQ(cv(p), cv(p));

  // Independent recomputation of one fold with the public trainer.
  std::vector<std::size_t> tr;
  std::vector<std::size_t> te;
  for (std::size_t i = 0; i < rows.size(); ++i) (folds[i] == 2 ? te : tr).push_back(i);
  const auto model = train(gather_rows(ds.features, tr), gather_labels(ds.labels, tr), {p.C()}, KernelSpec::rbf(p.gamma()));
  EXPECT_NEAR(acc[1], accuracy(model, gather_rows(ds.features, te), gather_labels(ds.labels, te)), 1e-12);
}

TEST(CvResponse, ArithmeticMeanExample) {
  const std::vector<double> folds{0.8, 0.9, 1.0, 0.7, 0.6};
  EXPECT_NEAR(std::accumulate(folds.begin(), folds.end(), 0.0) / 5.0, 0.8, 1e-15);
}

TEST(EvalLog, JsonLinesFields) {
  SurfaceEvaluator ev([](const HyperPoint& p) { return p.log2C / 20.0 + 0.25; }, 2);
  ev.evaluate({1.0, -3.0});
  ev.evaluate({5.0, 2.0});
  std::ostringstream out;
  write_eval_log_jsonl(out, ev.log());
  std::istringstream in(out.str());
  std::string line;
  std::size_t seq = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("seq").get<std::size_t>(), seq);
    EXPECT_EQ(j.at("log2C").get<double>(), ev.log()[seq].point.log2C);
    EXPECT_EQ(j.at("log2gamma").get<double>(), ev.log()[seq].point.log2gamma);
    EXPECT_EQ(j.at("accuracy").get<double>(), ev.log()[seq].accuracy);
    ++seq;
  }
  EXPECT_EQ(seq, 2u);
}
