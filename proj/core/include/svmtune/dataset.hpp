#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace svmtune {

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
};

/// Tabular data as read from disk. Cells are kept as text until
/// standardization so that categorical encoding and label binarization can
/// work on the original tokens.
struct RawDataset {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;
  std::string label_column;

  std::size_t column_index(const std::string& name) const;
  std::size_t label_index() const { return column_index(label_column); }
  /// Throws DataError unless every row has one cell per column, the label
  /// column exists and there are at least two rows.
  void validate() const;
};

/// Standardized, binary-labelled data ready for the SVM.
struct Dataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // 0 / 1
  std::vector<double> feature_means;
  std::vector<double> feature_sds;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(features.cols()); }
};

struct CsvOptions {
  std::string label_column;
  std::vector<std::string> categorical_columns;
};

/// Reads a CSV with a header row. Columns listed in `categorical_columns`, and
/// any column holding a non-numeric token, are marked categorical. An empty
/// field raises DataError naming the 1-based data row.
RawDataset read_csv(std::istream& in, const CsvOptions& options);
RawDataset read_csv_file(const std::string& path, const CsvOptions& options);

/// Replaces each categorical feature column by integers 1, 2, 3, ... in order
/// of first appearance. The label column is left untouched.
RawDataset encode_categoricals(const RawDataset& raw);

/// Maps classes sorted by descending frequency (ties by ascending label) to
/// 0, 1, 0, 1, ... Throws DataError("degenerate labels") for a single class.
RawDataset binarize_labels(const RawDataset& raw);

/// Z-scores every feature column with the sample standard deviation. Constant
/// columns become zero with sd recorded as 1. Labels must already be 0/1.
Dataset standardize(const RawDataset& raw);

/// encode_categoricals -> binarize_labels -> standardize.
Dataset prepare_dataset(const RawDataset& raw);

/// Outer 2-fold assignment plus stratified inner folds inside each subset.
struct SplitPlan {
  std::vector<int> subset_of_row;  // 1 or 2
  std::vector<int> fold_of_row;    // 1..k within the row's subset
  int k_inner = 5;
  std::uint64_t seed = 0;

  /// Ascending row indices of subset j (1 or 2).
  std::vector<std::size_t> subset_rows(int j) const;
  /// Fold ids aligned with subset_rows(j).
  std::vector<int> subset_folds(int j) const;
};

/// Throws DataError("insufficient class count for stratification") when a
/// class has fewer than 2 * k_inner members.
SplitPlan make_split_plan(const Dataset& ds, int k_inner, std::uint64_t seed);

/// Stratified k-fold ids (1..k) for the given rows, aligned with `rows`.
/// Per class: shuffle with the seed, then deal round-robin, continuing the
/// dealing position across classes so fold sizes differ by at most one.
std::vector<int> stratified_folds(const std::vector<int>& labels, const std::vector<std::size_t>& rows,
                                  int k, std::uint64_t seed);

/// Copies the selected rows into a dense matrix / label vector.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows);
std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<std::size_t>& rows);

}  // namespace svmtune
