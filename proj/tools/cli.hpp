#pragma once

#include "svmtune/harness.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace svmtune::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kPartial = 3 };

struct DatasetConfig {
  std::string id;
  std::filesystem::path path;
  std::string label_column;
  std::vector<std::string> categorical_columns;
};

struct RunConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<std::string> algorithms;
  std::string baseline = "grid100";
  std::optional<std::uint64_t> seed_split;
  std::optional<std::uint64_t> seed_search;
  int k_inner = 5;
  std::filesystem::path output_dir = "svmtune-out";
  std::optional<double> time_limit_secs;
  SelectionRule selection_rule = SelectionRule::randCg;
  std::size_t jobs = 1;
  std::size_t bootstrap_replicates = 5000;
  std::optional<std::string> stability_algorithm;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> fold_seeds;
};

/// Parses a JSON config. Relative dataset paths resolve against `base_dir`.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

DatasetEntry load_dataset(const DatasetConfig& cfg);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svmtune::cli
