#include "svmtune/dataset.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace svmtune {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

// Splits one CSV line. Double-quoted fields may contain commas; "" is an
// escaped quote.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(trim(cell));
  return out;
}

bool label_less(const std::string& a, const std::string& b) {
  const auto na = parse_number(a);
  const auto nb = parse_number(b);
  if (na && nb) {
    if (*na != *nb) return *na < *nb;
    return a < b;
  }
  if (na != nb) return na.has_value();  // numbers before text
  return a < b;
}

}  // namespace

std::size_t RawDataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw DataError("unknown column '" + name + "'");
}

void RawDataset::validate() const {
  if (label_column.empty()) throw DataError("no label column configured");
  (void)label_index();
  if (rows.size() < 2) throw DataError("dataset needs at least 2 rows");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size()) {
      throw DataError("row " + std::to_string(r + 1) + ": expected " + std::to_string(columns.size()) +
                      " fields, got " + std::to_string(rows[r].size()));
    }
  }
}

RawDataset read_csv(std::istream& in, const CsvOptions& options) {
  RawDataset raw;
  raw.label_column = options.label_column;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  for (auto& name : split_csv_line(line)) raw.columns.push_back({name, ColumnKind::numeric});

  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_no;
    auto cells = split_csv_line(line);
    if (cells.size() != raw.columns.size()) {
      throw DataError("row " + std::to_string(row_no) + ": expected " + std::to_string(raw.columns.size()) +
                      " fields, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        throw DataError("row " + std::to_string(row_no) + ": empty field in column '" + raw.columns[c].name +
                        "' (missing values are not supported)");
      }
    }
    raw.rows.push_back(std::move(cells));
  }

  const std::set<std::string> declared(options.categorical_columns.begin(), options.categorical_columns.end());
  for (const auto& name : declared) (void)raw.column_index(name);
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    bool categorical = declared.count(raw.columns[c].name) > 0;
    if (!categorical) {
      categorical = std::any_of(raw.rows.begin(), raw.rows.end(),
                                [c](const auto& row) { return !parse_number(row[c]).has_value(); });
    }
    raw.columns[c].kind = categorical ? ColumnKind::categorical : ColumnKind::numeric;
  }
  raw.validate();
  return raw;
}

RawDataset read_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_csv(in, options);
}

RawDataset encode_categoricals(const RawDataset& raw) {
  RawDataset out = raw;
  const std::size_t label = raw.label_index();
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c == label || raw.columns[c].kind != ColumnKind::categorical) continue;
    std::unordered_map<std::string, int> codes;
    for (auto& row : out.rows) {
      auto [it, inserted] = codes.try_emplace(row[c], static_cast<int>(codes.size()) + 1);
      row[c] = std::to_string(it->second);
    }
    out.columns[c].kind = ColumnKind::numeric;
  }
  return out;
}

RawDataset binarize_labels(const RawDataset& raw) {
  const std::size_t label = raw.label_index();
  std::map<std::string, std::size_t, decltype(&label_less)> counts(&label_less);
  for (const auto& row : raw.rows) ++counts[row[label]];
  if (counts.size() < 2) throw DataError("degenerate labels");

  std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
  // counts is already in ascending label order, so a stable sort on
  // frequency leaves ties in label order.
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::unordered_map<std::string, std::string> mapping;
  for (std::size_t r = 0; r < order.size(); ++r) mapping[order[r].first] = (r % 2 == 0) ? "0" : "1";

  RawDataset out = raw;
  for (auto& row : out.rows) row[label] = mapping.at(row[label]);
  out.columns[label].kind = ColumnKind::numeric;
  return out;
}

Dataset standardize(const RawDataset& raw) {
  raw.validate();
  const std::size_t label = raw.label_index();
  const std::size_t n = raw.rows.size();
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < raw.columns.size(); ++c) {
    if (c != label) feature_cols.push_back(c);
  }

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  ds.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cell = raw.rows[r][label];
    if (cell == "0") {
      ds.labels[r] = 0;
    } else if (cell == "1") {
      ds.labels[r] = 1;
    } else {
      throw DataError("row " + std::to_string(r + 1) + ": label '" + cell + "' is not 0/1; binarize first");
    }
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto v = parse_number(raw.rows[r][feature_cols[j]]);
      if (!v) {
        throw DataError("row " + std::to_string(r + 1) + ": non-numeric value in column '" +
                        raw.columns[feature_cols[j]].name + "'");
      }
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
    }
  }

  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    auto col = ds.features.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    double ss = 0.0;
    for (Eigen::Index r = 0; r < col.size(); ++r) ss += (col(r) - mean) * (col(r) - mean);
    double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    const bool constant = (col.array() == col(0)).all();
    if (constant || sd == 0.0) {
      col.setZero();
      sd = 1.0;
    } else {
      col = (col.array() - mean) / sd;
    }
    ds.feature_means.push_back(mean);
    ds.feature_sds.push_back(sd);
    ds.feature_names.push_back(raw.columns[feature_cols[j]].name);
  }

  const auto ones = std::count(ds.labels.begin(), ds.labels.end(), 1);
  if (ones == 0 || ones == static_cast<long>(n)) throw DataError("degenerate labels");
  return ds;
}

Dataset prepare_dataset(const RawDataset& raw) { return standardize(binarize_labels(encode_categoricals(raw))); }

std::vector<int> stratified_folds(const std::vector<int>& labels, const std::vector<std::size_t>& rows, int k,
                                  std::uint64_t seed) {
  if (k < 1) throw ConfigError("fold count must be positive");
  std::map<int, std::vector<std::size_t>> by_class;  // position within `rows`
  for (std::size_t pos = 0; pos < rows.size(); ++pos) by_class[labels[rows[pos]]].push_back(pos);

  std::vector<int> fold(rows.size(), 0);
  std::size_t deal = 0;
  for (auto& [cls, positions] : by_class) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(cls) + 1));
    std::shuffle(positions.begin(), positions.end(), rng);
    for (const auto pos : positions) {
      fold[pos] = static_cast<int>(deal % static_cast<std::size_t>(k)) + 1;
      ++deal;
    }
  }
  return fold;
}

std::vector<std::size_t> SplitPlan::subset_rows(int j) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < subset_of_row.size(); ++r) {
    if (subset_of_row[r] == j) out.push_back(r);
  }
  return out;
}

std::vector<int> SplitPlan::subset_folds(int j) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < subset_of_row.size(); ++r) {
    if (subset_of_row[r] == j) out.push_back(fold_of_row[r]);
  }
  return out;
}

SplitPlan make_split_plan(const Dataset& ds, int k_inner, std::uint64_t seed) {
  if (k_inner < 2) throw ConfigError("k_inner must be at least 2");
  std::map<int, std::size_t> counts;
  for (int y : ds.labels) ++counts[y];
  if (counts.size() < 2) throw DataError("degenerate labels");
  for (const auto& [cls, count] : counts) {
    if (count < 2 * static_cast<std::size_t>(k_inner)) {
      throw DataError("insufficient class count for stratification");
    }
  }

  SplitPlan plan;
  plan.k_inner = k_inner;
  plan.seed = seed;
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  plan.subset_of_row = stratified_folds(ds.labels, all, 2, derive_seed(seed, 0));
  plan.fold_of_row.assign(ds.size(), 0);
  for (int j = 1; j <= 2; ++j) {
    const auto rows = plan.subset_rows(j);
    const auto folds = stratified_folds(ds.labels, rows, k_inner, derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t i = 0; i < rows.size(); ++i) plan.fold_of_row[rows[i]] = folds[i];
  }
  return plan;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace svmtune
