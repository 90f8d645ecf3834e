#pragma once

#include "svmtune/dataset.hpp"
#include "svmtune/hyperpoint.hpp"
#include "svmtune/registry.hpp"
#include "svmtune/selection.hpp"
#include "svmtune/stats.hpp"
#include "svmtune/svm.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace svmtune {

struct DatasetEntry {
  std::string id;
  Dataset data;
};

struct TrialOptions {
  TrainConfig solver;
  std::optional<double> time_limit_secs;
  SelectionRule rule = SelectionRule::randCg;
};

struct TrialRecord {
  std::string algorithm;
  std::string dataset;
  int subset = 1;
  std::uint64_t split_seed = 0;
  std::uint64_t search_seed = 0;
  HyperPoint theta;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t eval_count = 0;
  std::size_t budget = 0;
  double wall_time = 0.0;
  std::size_t tie_set_size = 0;
  std::vector<HyperPoint> tie_set;
  std::size_t unconverged_fits = 0;
  bool flagged = false;
  std::string flag_reason;  // "time limit exceeded", or the error message

  /// Resume key: algorithm|dataset|subset|split_seed|search_seed.
  std::string key() const;
};

struct TrialRun {
  TrialRecord record;
  SearchOutcome outcome;  // empty when flagged
};

/// Searches subset j on its inner folds, selects theta from the tie set with
/// the configured rule, then trains one model on all of subset j at theta and
/// scores it on the other subset. Failures become flagged records.
TrialRun run_trial_detailed(const AlgorithmSpec& algorithm, const DatasetEntry& dataset, const SplitPlan& plan,
                            int subset, std::uint64_t seed, const TrialOptions& options = {});
TrialRecord run_trial(const AlgorithmSpec& algorithm, const DatasetEntry& dataset, const SplitPlan& plan, int subset,
                      std::uint64_t seed, const TrialOptions& options = {});

/// Same outer split, inner folds re-dealt with a different seed.
SplitPlan with_inner_seed(const Dataset& ds, const SplitPlan& plan, std::uint64_t inner_seed);

// ------------------------------------------------------------ aggregation
// All of these throw DataError when a needed record is missing or flagged.

double mean_best_accuracy(const std::vector<TrialRecord>& records, const std::string& algorithm,
                          const std::string& dataset);
double accuracy_gain(const std::vector<TrialRecord>& records, const std::string& algorithm,
                     const std::string& baseline, const std::string& dataset);
double future_accuracy(const std::vector<TrialRecord>& records, const std::string& algorithm,
                       const std::string& dataset);
double future_gain(const std::vector<TrialRecord>& records, const std::string& algorithm,
                   const std::string& baseline, const std::string& dataset);

struct CostRatio {
  double time_ratio = 0.0;
  double eval_ratio = 0.0;
};
/// Throws DataError on zero baseline time or evaluations.
CostRatio cost_ratio(const std::vector<TrialRecord>& records, const std::string& algorithm,
                     const std::string& baseline, const std::string& dataset);

struct GainRow {
  std::string algorithm;
  std::string dataset;
  double accgain = 0.0;
  double future_gain = 0.0;
  double eval_ratio = 0.0;
  double time_ratio = 0.0;
};

struct GainTable {
  std::string baseline;
  std::vector<GainRow> rows;  // algorithm order, then dataset order
  /// (algorithm, dataset) pairs dropped for missing or flagged records.
  std::vector<std::pair<std::string, std::string>> excluded;
};

GainTable build_gain_table(const std::vector<TrialRecord>& records, const std::vector<std::string>& algorithms,
                           const std::vector<std::string>& datasets, const std::string& baseline);

struct AlgorithmSummary {
  std::string algorithm;
  std::size_t datasets = 0;
  CiResult accgain;
  CiResult future_gain;
  double mean_eval_ratio = 0.0;
  double mean_time_ratio = 0.0;
};

/// Bootstrap CIs over datasets per algorithm. With fewer than 2 datasets the
/// interval collapses to the single value and replicates is 0.
std::vector<AlgorithmSummary> summarize(const GainTable& table, const std::vector<std::string>& algorithms,
                                        std::size_t replicates, std::uint64_t seed);

// ------------------------------------------------------------- stability

struct StabilityReport {
  std::string algorithm;
  double n_single_best = 0.0;
  double same_best_proportion = 0.0;
  double mean_cross_run_rank = 0.0;
  double median_best_second_gap = 0.0;
  double median_cross_run_best_gap = 0.0;
  double mean_log_distance = 0.0;

  friend bool operator==(const StabilityReport&, const StabilityReport&) = default;
};

/// Measurements from two runs over the same probe sequence.
struct StabilityUnit {
  std::vector<Evaluation> log1;
  std::vector<Evaluation> log2;
  HyperPoint best1;  // randCg representative of each run's tie set
  HyperPoint best2;
};

StabilityReport stability_from_units(const std::string& algorithm, const std::vector<StabilityUnit>& units);

/// Runs a grid-like algorithm twice on both subsets of every dataset, with the
/// same outer split and probe plan and inner folds dealt from s1 and s2.
/// Throws ConfigError("stability requires predetermined probes") otherwise.
StabilityReport two_run_stability(const AlgorithmSpec& algorithm, const std::vector<DatasetEntry>& datasets,
                                  std::uint64_t split_seed, std::uint64_t s1, std::uint64_t s2,
                                  std::uint64_t search_seed, const TrialOptions& options = {});

// ------------------------------------------------------------- campaigns

struct CampaignConfig {
  std::vector<std::string> algorithms;
  std::string baseline = "grid100";
  std::uint64_t seed_split = 0;
  std::uint64_t seed_search = 0;
  int k_inner = 5;
  TrialOptions trial;
  std::size_t jobs = 1;
  std::size_t bootstrap_replicates = 5000;
};

std::uint64_t dataset_split_seed(std::uint64_t seed_split, const std::string& dataset);
std::uint64_t trial_search_seed(std::uint64_t seed_search, const std::string& dataset, int subset);

/// Runs every missing (algorithm, dataset, subset) trial, appending each
/// finished record to `jsonl`. Records already present in the file are kept.
/// Returns all records for the configured algorithms and datasets, sorted.
std::vector<TrialRecord> run_campaign(const std::vector<DatasetEntry>& datasets, const CampaignConfig& config,
                                      const std::filesystem::path& jsonl);

/// Deterministic order: algorithm, dataset, subset, seeds.
void sort_records(std::vector<TrialRecord>& records);

// ------------------------------------------------------------ persistence

std::string to_json_line(const TrialRecord& r);
TrialRecord trial_from_json_line(const std::string& line);
/// Skips blank lines; a truncated final line (interrupted write) is ignored.
std::vector<TrialRecord> read_trial_records(const std::filesystem::path& jsonl);

/// algorithm,dataset,accgain,future_gain,eval_ratio,time_ratio
void write_gain_table_csv(std::ostream& out, const GainTable& table);
/// algorithm,datasets,accgain_mean,accgain_low,accgain_high,future_gain_mean,
/// future_gain_low,future_gain_high,replicates,mean_eval_ratio,mean_time_ratio
void write_summary_csv(std::ostream& out, const std::vector<AlgorithmSummary>& summary);
/// algorithm,mean_accgain,log10_eval_ratio
void write_plot_data_csv(std::ostream& out, const std::vector<AlgorithmSummary>& summary);
/// algorithm,measurement,value; six rows in fixed order.
void write_stability_csv(std::ostream& out, const StabilityReport& report);
StabilityReport read_stability_csv(std::istream& in);

}  // namespace svmtune
