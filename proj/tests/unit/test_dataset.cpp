#include "svmtune/dataset.hpp"
#include "svmtune/error.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

using namespace svmtune;

namespace {

RawDataset raw_from(const std::string& csv, const std::string& label = "y", std::vector<std::string> cats = {}) {
  std::istringstream in(csv);
  return read_csv(in, CsvOptions{label, std::move(cats)});
}

std::vector<std::string> column(const RawDataset& raw, const std::string& name) {
  std::vector<std::string> out;
  const auto c = raw.column_index(name);
  for (const auto& r : raw.rows) out.push_back(r[c]);
  return out;
}

Dataset balanced(std::size_t per_class) {
  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * per_class), 1);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    ds.labels.push_back(static_cast<int>(i % 2));
    ds.features(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  }
  return ds;
}

}  // namespace

TEST(ReadCsv, DetectsCategoricalColumns) {
  const auto raw = raw_from("a,b,y\n1.5,red,x\n2,blue,z\n");
  EXPECT_EQ(raw.columns[0].kind, ColumnKind::numeric);
  EXPECT_EQ(raw.columns[1].kind, ColumnKind::categorical);
  EXPECT_EQ(raw.rows.size(), 2u);
}

TEST(ReadCsv, DeclaredCategoricalOverridesNumeric) {
  const auto raw = raw_from("a,y\n3,x\n1,z\n", "y", {"a"});
  EXPECT_EQ(raw.columns[0].kind, ColumnKind::categorical);
}

TEST(ReadCsv, QuotedFieldsKeepCommas) {
  const auto raw = raw_from("a,y\n\"1,5\",x\n\"say \"\"hi\"\"\",z\n");
  EXPECT_EQ(raw.rows[0][0], "1,5");
  EXPECT_EQ(raw.rows[1][0], "say \"hi\"");
}

TEST(ReadCsv, EmptyFieldIsRejectedWithRowNumber) {
  try {
    raw_from("a,y\n1,x\n,z\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(ReadCsv, RaggedRowAndUnknownLabelFail) {
  EXPECT_THROW(raw_from("a,y\n1,x,3\n2,z\n"), DataError);
  EXPECT_THROW(raw_from("a,y\n1,x\n2,z\n", "label"), DataError);
  EXPECT_THROW(raw_from("a,y\n1,x\n"), DataError);  // fewer than 2 rows
}

TEST(EncodeCategoricals, FirstAppearanceOrder) {
  const auto enc = encode_categoricals(raw_from("c,y\nred,a\nblue,b\nred,a\ngreen,b\n"));
  EXPECT_EQ(column(enc, "c"), (std::vector<std::string>{"1", "2", "1", "3"}));
  EXPECT_EQ(enc.columns[0].kind, ColumnKind::numeric);
}

TEST(EncodeCategoricals, NumericUnchangedAndSingleCategory) {
  const auto enc = encode_categoricals(raw_from("n,c,y\n0.5,x,a\n1.5,x,b\n"));
  EXPECT_EQ(column(enc, "n"), (std::vector<std::string>{"0.5", "1.5"}));
  EXPECT_EQ(column(enc, "c"), (std::vector<std::string>{"1", "1"}));
}

TEST(EncodeCategoricals, LabelColumnLeftAlone) {
  const auto enc = encode_categoricals(raw_from("n,y\n1,cat\n2,dog\n"));
  EXPECT_EQ(column(enc, "y"), (std::vector<std::string>{"cat", "dog"}));
}

TEST(BinarizeLabels, AlternatesByFrequency) {
  std::string csv = "v,y\n";
  const std::map<std::string, int> counts{{"a", 5}, {"b", 3}, {"c", 2}, {"d", 1}};
  for (const auto& [k, n] : counts) {
    for (int i = 0; i < n; ++i) csv += "1," + k + "\n";
  }
  const auto bin = binarize_labels(raw_from(csv));
  std::map<std::string, std::string> mapping;
  const auto orig = column(raw_from(csv), "y");
  const auto mapped = column(bin, "y");
  for (std::size_t i = 0; i < orig.size(); ++i) mapping[orig[i]] = mapped[i];
  EXPECT_EQ(mapping["a"], "0");
  EXPECT_EQ(mapping["b"], "1");
  EXPECT_EQ(mapping["c"], "0");
  EXPECT_EQ(mapping["d"], "1");
}

TEST(BinarizeLabels, TiesBrokenByLabelOrder) {
  const auto bin = binarize_labels(raw_from("v,y\n1,b\n1,a\n1,b\n1,a\n"));
  EXPECT_EQ(column(bin, "y"), (std::vector<std::string>{"1", "0", "1", "0"}));
}

TEST(BinarizeLabels, NumericLabelsCompareNumerically) {
  // 10 and 9 tie in frequency; 9 < 10 numerically
  const auto bin = binarize_labels(raw_from("v,y\n1,10\n1,9\n"));
  EXPECT_EQ(column(bin, "y"), (std::vector<std::string>{"1", "0"}));
}

TEST(BinarizeLabels, SingleClassIsDegenerate) {
  try {
    binarize_labels(raw_from("v,y\n1,a\n2,a\n"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "degenerate labels");
  }
}

TEST(Standardize, SampleSdTwoValues) {
  const auto ds = standardize(raw_from("v,y\n1,0\n3,1\n"));
  EXPECT_NEAR(ds.features(0, 0), -0.70710678118654752, 1e-12);
  EXPECT_NEAR(ds.features(1, 0), 0.70710678118654752, 1e-12);
  EXPECT_DOUBLE_EQ(ds.feature_means[0], 2.0);
  EXPECT_NEAR(ds.feature_sds[0], std::sqrt(2.0), 1e-15);
}

TEST(Standardize, ConstantColumnBecomesZero) {
  const auto ds = standardize(raw_from("v,y\n4,0\n4,1\n4,0\n"));
  EXPECT_TRUE(ds.features.isZero());
  EXPECT_EQ(ds.feature_sds[0], 1.0);
}

TEST(Standardize, ZeroOneColumn) {
  const auto ds = standardize(raw_from("v,y\n0,0\n0,1\n1,0\n1,1\n"));
  EXPECT_NEAR(ds.features(0, 0), -0.8660254037844386, 1e-12);
  EXPECT_NEAR(ds.features(3, 0), 0.8660254037844386, 1e-12);
}

TEST(Standardize, MomentsAfterTransform) {
  std::string csv = "a,b,y\n";
  for (int i = 0; i < 37; ++i) csv += std::to_string(i * i % 17) + "," + std::to_string(3.5 * i - 2) + "," + std::to_string(i % 2) + "\n";
  const auto ds = prepare_dataset(raw_from(csv));
  for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
    const auto col = ds.features.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(col.size() - 1));
    EXPECT_LE(std::abs(mean), 1e-9);
    EXPECT_LE(std::abs(sd - 1.0), 1e-9);
  }
}

TEST(SplitPlan, TwentyRowsFiveFolds) {
  const auto ds = balanced(10);
  const auto plan = make_split_plan(ds, 5, 42);
  for (int j = 1; j <= 2; ++j) {
    const auto rows = plan.subset_rows(j);
    const auto folds = plan.subset_folds(j);
    ASSERT_EQ(rows.size(), 10u);
    std::map<std::pair<int, int>, int> per_fold_class;
    int ones = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ones += ds.labels[rows[i]];
      ++per_fold_class[{folds[i], ds.labels[rows[i]]}];
    }
    EXPECT_EQ(ones, 5);
    EXPECT_EQ(per_fold_class.size(), 10u);
    for (const auto& [key, count] : per_fold_class) EXPECT_EQ(count, 1);
  }
}

TEST(SplitPlan, Deterministic) {
  const auto ds = balanced(15);
  const auto a = make_split_plan(ds, 5, 7);
  const auto b = make_split_plan(ds, 5, 7);
  EXPECT_EQ(a.subset_of_row, b.subset_of_row);
  EXPECT_EQ(a.fold_of_row, b.fold_of_row);
  const auto c = make_split_plan(ds, 5, 8);
  EXPECT_NE(a.fold_of_row, c.fold_of_row);
}

TEST(SplitPlan, SmallClassRejected) {
  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(6, 1);
  ds.labels = {0, 0, 0, 0, 1, 1};
  try {
    make_split_plan(ds, 5, 1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "insufficient class count for stratification");
  }
}

TEST(SplitPlan, StratificationWithinOneOfIdeal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset ds;
    const std::size_t n = 53 + seed * 7;
    ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(i % 3 == 0 ? 1 : 0);
    const auto plan = make_split_plan(ds, 5, seed);
    const auto s1 = plan.subset_rows(1).size();
    const auto s2 = plan.subset_rows(2).size();
    EXPECT_LE(std::max(s1, s2) - std::min(s1, s2), 1u);
    for (int j = 1; j <= 2; ++j) {
      const auto rows = plan.subset_rows(j);
      const auto folds = plan.subset_folds(j);
      std::size_t pos = 0;
      for (auto r : rows) pos += static_cast<std::size_t>(ds.labels[r]);
      for (int f = 1; f <= 5; ++f) {
        double in_fold = 0;
        double pos_in_fold = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (folds[i] != f) continue;
          ++in_fold;
          pos_in_fold += ds.labels[rows[i]];
        }
        const double ideal = static_cast<double>(pos) / 5.0;
        EXPECT_LE(std::abs(pos_in_fold - ideal), 1.0);
      }
    }
  }
}
