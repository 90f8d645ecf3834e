#include "cli.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace svmtune::cli {
namespace {

constexpr std::uint64_t kTuneSelectTag = 0x5e1ec7;

template <class T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::vector<std::string> dataset_ids(const std::vector<DatasetEntry>& ds) {
  std::vector<std::string> ids;
  for (const auto& d : ds) ids.push_back(d.id);
  return ids;
}

// Writes gain table, CI summary and plot data; returns true when any record
// was flagged or any (algorithm, dataset) pair had to be dropped.
bool write_reports(const std::vector<TrialRecord>& records, const std::vector<std::string>& algorithms,
                   const std::vector<std::string>& datasets, const RunConfig& cfg, std::ostream& out) {
  const GainTable table = build_gain_table(records, algorithms, datasets, cfg.baseline);
  const auto summary = summarize(table, algorithms, cfg.bootstrap_replicates, *cfg.seed_search);
  std::ostringstream gain;
  std::ostringstream ci;
  std::ostringstream plot;
  write_gain_table_csv(gain, table);
  write_summary_csv(ci, summary);
  write_plot_data_csv(plot, summary);
  write_file(cfg.output_dir / "gain_table.csv", gain.str());
  write_file(cfg.output_dir / "summary_ci.csv", ci.str());
  write_file(cfg.output_dir / "plot_data.csv", plot.str());

  std::size_t flagged = 0;
  for (const auto& r : records) flagged += r.flagged ? 1 : 0;
  out << "records " << records.size() << " flagged " << flagged << " excluded_pairs " << table.excluded.size() << '\n';
  for (const auto& s : summary) {
    out << s.algorithm << " accgain " << s.accgain.mean << " [" << s.accgain.low << ", " << s.accgain.high << "]"
        << " future_gain " << s.future_gain.mean << " eval_ratio " << s.mean_eval_ratio << '\n';
  }
  for (const auto& [a, d] : table.excluded) out << "excluded " << a << " on " << d << '\n';
  out << "wrote " << (cfg.output_dir / "gain_table.csv").string() << '\n';
  return flagged > 0 || !table.excluded.empty();
}

void require_seeds(const RunConfig& cfg) {
  if (!cfg.seed_split || !cfg.seed_search) {
    throw ConfigError("seeds are mandatory: set seeds.split and seeds.search in the config or pass --seed-split and --seed-search");
  }
}

std::vector<DatasetEntry> load_all(const RunConfig& cfg) {
  if (cfg.datasets.empty()) throw ConfigError("no datasets configured");
  std::vector<DatasetEntry> out;
  std::set<std::string> ids;
  for (const auto& d : cfg.datasets) {
    if (!ids.insert(d.id).second) throw ConfigError("duplicate dataset id " + d.id);
    out.push_back(load_dataset(d));
  }
  return out;
}

TrialOptions trial_options(const RunConfig& cfg) {
  TrialOptions t;
  t.time_limit_secs = cfg.time_limit_secs;
  t.rule = cfg.selection_rule;
  return t;
}

int cmd_tune(const RunConfig& cfg, const std::string& algorithm_id, std::ostream& out) {
  require_seeds(cfg);
  const AlgorithmSpec& algorithm = find_algorithm(algorithm_id);
  if (cfg.datasets.empty()) throw ConfigError("tune needs --dataset or a config with datasets");
  const DatasetEntry ds = load_dataset(cfg.datasets.front());

  std::vector<std::size_t> rows(ds.data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto folds = stratified_folds(ds.data.labels, rows, cfg.k_inner, *cfg.seed_split);
  auto rbf = std::make_shared<const CvResponse>(ds.data, rows, folds, KernelSpec::Kind::rbf, TrainConfig{});
  SearchProblem problem;
  problem.rbf = as_response(rbf);
  if (algorithm.family == Family::asymp) {
    problem.linear = as_response(std::make_shared<const CvResponse>(ds.data, rows, folds, KernelSpec::Kind::linear, TrainConfig{}));
  }
  problem.features = &ds.data.features;
  problem.labels = &ds.data.labels;
  problem.seed = *cfg.seed_search;
  if (cfg.time_limit_secs) {
    problem.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*cfg.time_limit_secs));
  }
  const SearchOutcome outcome = run_search(algorithm, problem);
  const HyperPoint theta = select(outcome.ties, cfg.selection_rule, derive_seed(*cfg.seed_search, kTuneSelectTag));
  const double cv = (*rbf)(theta);

  const auto log_path = cfg.output_dir / ("tune-" + ds.id + "-" + algorithm.id + ".jsonl");
  std::ostringstream log;
  write_eval_log_jsonl(log, outcome.log);
  write_file(log_path, log.str());
  if (!outcome.linear_log.empty()) {
    std::ostringstream lin;
    write_eval_log_jsonl(lin, outcome.linear_log);
    write_file(cfg.output_dir / ("tune-" + ds.id + "-" + algorithm.id + "-linear.jsonl"), lin.str());
  }

  out.precision(10);
  out << "algorithm " << algorithm.id << '\n'
      << "dataset " << ds.id << '\n'
      << "rule " << to_string(cfg.selection_rule) << '\n'
      << "C " << theta.C() << '\n'
      << "gamma " << theta.gamma() << '\n'
      << "log2C " << theta.log2C << '\n'
      << "log2gamma " << theta.log2gamma << '\n'
      << "cv_accuracy " << cv << '\n'
      << "tie_set_size " << outcome.ties.size() << '\n'
      << "evaluations " << outcome.eval_count << '\n'
      << "eval_log " << log_path.string() << '\n';
  return kOk;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  require_seeds(cfg);
  if (cfg.algorithms.size() < 2) throw ConfigError("benchmark needs at least 2 algorithms");
  if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), cfg.baseline) == cfg.algorithms.end()) {
    throw ConfigError("baseline " + cfg.baseline + " is not among the configured algorithms");
  }
  const auto datasets = load_all(cfg);
  CampaignConfig campaign;
  campaign.algorithms = cfg.algorithms;
  campaign.baseline = cfg.baseline;
  campaign.seed_split = *cfg.seed_split;
  campaign.seed_search = *cfg.seed_search;
  campaign.k_inner = cfg.k_inner;
  campaign.trial = trial_options(cfg);
  campaign.jobs = cfg.jobs;
  campaign.bootstrap_replicates = cfg.bootstrap_replicates;
  const auto records = run_campaign(datasets, campaign, cfg.output_dir / "trials.jsonl");
  return write_reports(records, cfg.algorithms, dataset_ids(datasets), cfg, out) ? kPartial : kOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  require_seeds(cfg);
  auto records = read_trial_records(cfg.output_dir / "trials.jsonl");
  sort_records(records);
  std::vector<std::string> algorithms = cfg.algorithms;
  std::vector<std::string> datasets;
  for (const auto& d : cfg.datasets) datasets.push_back(d.id);
  if (algorithms.empty() || datasets.empty()) {
    std::set<std::string> a;
    std::set<std::string> d;
    for (const auto& r : records) {
      a.insert(r.algorithm);
      d.insert(r.dataset);
    }
    if (algorithms.empty()) algorithms.assign(a.begin(), a.end());
    if (datasets.empty()) datasets.assign(d.begin(), d.end());
  }
  // Keep only records matching the configured seeds.
  std::vector<TrialRecord> matching;
  for (const auto& r : records) {
    if (r.split_seed == dataset_split_seed(*cfg.seed_split, r.dataset) &&
        r.search_seed == trial_search_seed(*cfg.seed_search, r.dataset, r.subset)) {
      matching.push_back(r);
    }
  }
  return write_reports(matching, algorithms, datasets, cfg, out) ? kPartial : kOk;
}

int cmd_stability(const RunConfig& cfg, const std::optional<std::string>& algorithm_id, std::ostream& out) {
  require_seeds(cfg);
  const std::string id = algorithm_id ? *algorithm_id : cfg.stability_algorithm.value_or("");
  if (id.empty()) throw ConfigError("stability needs --algorithm or stability.algorithm in the config");
  if (!cfg.fold_seeds) throw ConfigError("stability needs --fold-seeds or stability.fold_seeds in the config");
  const AlgorithmSpec& algorithm = find_algorithm(id);
  if (!is_grid_like(algorithm.family)) throw ConfigError("stability requires predetermined probes");
  const auto datasets = load_all(cfg);
  const StabilityReport rep = two_run_stability(algorithm, datasets, *cfg.seed_split, cfg.fold_seeds->first,
                                                cfg.fold_seeds->second, *cfg.seed_search, trial_options(cfg));
  std::ostringstream csv;
  write_stability_csv(csv, rep);
  const auto path = cfg.output_dir / ("stability-" + algorithm.id + ".csv");
  write_file(path, csv.str());
  out << csv.str() << "wrote " << path.string() << '\n';
  return kOk;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("datasets")) {
      for (const auto& d : j.at("datasets")) {
        DatasetConfig dc;
        dc.path = d.at("path").get<std::string>();
        if (dc.path.is_relative()) dc.path = base_dir / dc.path;
        dc.id = d.value("id", dc.path.stem().string());
        dc.label_column = d.at("label").get<std::string>();
        dc.categorical_columns = d.value("categorical", std::vector<std::string>{});
        cfg.datasets.push_back(dc);
      }
    }
    cfg.algorithms = j.value("algorithms", std::vector<std::string>{});
    cfg.baseline = j.value("baseline", cfg.baseline);
    if (j.contains("seeds")) {
      cfg.seed_split = optional_field<std::uint64_t>(j.at("seeds"), "split");
      cfg.seed_search = optional_field<std::uint64_t>(j.at("seeds"), "search");
    }
    cfg.k_inner = j.value("k_inner", cfg.k_inner);
    if (j.contains("output_dir")) {
      cfg.output_dir = j.at("output_dir").get<std::string>();
      if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
    }
    cfg.time_limit_secs = optional_field<double>(j, "time_limit_secs");
    if (j.contains("selection_rule")) cfg.selection_rule = parse_selection_rule(j.at("selection_rule").get<std::string>());
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.bootstrap_replicates = j.value("bootstrap_replicates", cfg.bootstrap_replicates);
    if (j.contains("stability")) {
      const auto& s = j.at("stability");
      cfg.stability_algorithm = optional_field<std::string>(s, "algorithm");
      if (s.contains("fold_seeds")) {
        const auto seeds = s.at("fold_seeds").get<std::vector<std::uint64_t>>();
        if (seeds.size() != 2) throw ConfigError("stability.fold_seeds needs exactly two seeds");
        cfg.fold_seeds = std::make_pair(seeds[0], seeds[1]);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  for (const auto& a : cfg.algorithms) find_algorithm(a);
  if (cfg.k_inner < 2) throw ConfigError("k_inner must be at least 2");
  if (cfg.time_limit_secs && !(*cfg.time_limit_secs > 0.0)) throw ConfigError("time_limit_secs must be positive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

DatasetEntry load_dataset(const DatasetConfig& cfg) {
  CsvOptions opts;
  opts.label_column = cfg.label_column;
  opts.categorical_columns = cfg.categorical_columns;
  return {cfg.id, prepare_dataset(read_csv_file(cfg.path.string(), opts))};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SVM hyperparameter search benchmark"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::size_t> jobs;
  std::optional<std::string> output_dir;
  std::optional<std::string> algorithm;
  std::optional<std::uint64_t> seed_split;
  std::optional<std::uint64_t> seed_search;
  std::optional<double> time_limit;
  std::optional<std::string> dataset_path;
  std::optional<std::string> label_column;
  std::vector<std::string> categorical;
  std::optional<std::string> rule;
  std::vector<std::uint64_t> fold_seeds;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--jobs", jobs, "concurrent trials")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "directory for logs and reports");
  app.add_option("--seed-split", seed_split, "seed for outer split and inner folds");
  app.add_option("--seed-search", seed_search, "seed for searchers and selection");
  app.add_option("--time-limit-secs", time_limit, "per-trial time limit")->check(CLI::PositiveNumber);

  auto* tune = app.add_subcommand("tune", "search one dataset with a 5-fold surface");
  tune->add_option("--algorithm", algorithm, "searcher id")->required();
  tune->add_option("--dataset", dataset_path, "CSV file (overrides the config's first dataset)");
  tune->add_option("--label-column", label_column, "label column of --dataset");
  tune->add_option("--categorical", categorical, "categorical columns of --dataset");
  tune->add_option("--rule", rule, "selection rule");
  auto* bench = app.add_subcommand("benchmark", "run the nested cross-validation campaign");
  auto* stab = app.add_subcommand("stability", "two-run stability of a grid-like searcher");
  stab->add_option("--algorithm", algorithm, "grid-like searcher id");
  stab->add_option("--fold-seeds", fold_seeds, "two inner-fold seeds")->expected(2);
  auto* report = app.add_subcommand("report", "re-aggregate trials.jsonl without recomputation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (jobs) cfg.jobs = *jobs;
    if (output_dir) cfg.output_dir = *output_dir;
    if (seed_split) cfg.seed_split = seed_split;
    if (seed_search) cfg.seed_search = seed_search;
    if (time_limit) cfg.time_limit_secs = time_limit;
    if (rule) cfg.selection_rule = parse_selection_rule(*rule);
    if (fold_seeds.size() == 2) cfg.fold_seeds = std::make_pair(fold_seeds[0], fold_seeds[1]);
    if (dataset_path) {
      if (!label_column) throw ConfigError("--dataset needs --label-column");
      DatasetConfig dc;
      dc.path = *dataset_path;
      dc.id = dc.path.stem().string();
      dc.label_column = *label_column;
      dc.categorical_columns = categorical;
      cfg.datasets.insert(cfg.datasets.begin(), dc);
    }

    if (tune->parsed()) return cmd_tune(cfg, *algorithm, out);
    if (bench->parsed()) return cmd_benchmark(cfg, out);
    if (stab->parsed()) return cmd_stability(cfg, algorithm, out);
    if (report->parsed()) return cmd_report(cfg, out);
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace svmtune::cli
