#include "svmtune/harness.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace svmtune {
namespace {

constexpr std::uint64_t kSelectTag = 0x5e1ec7;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const TrialRecord& find_record(const std::vector<TrialRecord>& records, const std::string& algorithm,
                               const std::string& dataset, int subset) {
  for (const auto& r : records) {
    if (r.algorithm == algorithm && r.dataset == dataset && r.subset == subset) {
      if (r.flagged) throw DataError("flagged record for " + algorithm + " on " + dataset + ": " + r.flag_reason);
      return r;
    }
  }
  throw DataError("missing record for " + algorithm + " on " + dataset + " subset " + std::to_string(subset));
}

}  // namespace

std::string TrialRecord::key() const {
  return algorithm + "|" + dataset + "|" + std::to_string(subset) + "|" + std::to_string(split_seed) + "|" +
         std::to_string(search_seed);
}

SplitPlan with_inner_seed(const Dataset& ds, const SplitPlan& plan, std::uint64_t inner_seed) {
  SplitPlan out = plan;
  for (int j = 1; j <= 2; ++j) {
    const auto rows = plan.subset_rows(j);
    const auto folds = stratified_folds(ds.labels, rows, plan.k_inner, derive_seed(inner_seed, static_cast<std::uint64_t>(j)));
    for (std::size_t i = 0; i < rows.size(); ++i) out.fold_of_row[rows[i]] = folds[i];
  }
  return out;
}

TrialRun run_trial_detailed(const AlgorithmSpec& algorithm, const DatasetEntry& dataset, const SplitPlan& plan,
                            int subset, std::uint64_t seed, const TrialOptions& options) {
  if (subset != 1 && subset != 2) throw ConfigError("subset must be 1 or 2");
  if (plan.subset_of_row.size() != dataset.data.size()) throw ConfigError("split plan does not cover the dataset");
  const auto start = Clock::now();
  TrialRun run;
  TrialRecord& r = run.record;
  r.algorithm = algorithm.id;
  r.dataset = dataset.id;
  r.subset = subset;
  r.split_seed = plan.seed;
  r.search_seed = seed;
  r.budget = algorithm.budget;

  std::shared_ptr<const CvResponse> rbf;
  std::shared_ptr<const CvResponse> lin;
  try {
    const auto rows = plan.subset_rows(subset);
    const auto folds = plan.subset_folds(subset);
    const Eigen::MatrixXd x = gather_rows(dataset.data.features, rows);
    const std::vector<int> y = gather_labels(dataset.data.labels, rows);

    rbf = std::make_shared<const CvResponse>(dataset.data, rows, folds, KernelSpec::Kind::rbf, options.solver);
    SearchProblem problem;
    problem.rbf = as_response(rbf);
    if (algorithm.family == Family::asymp) {
      lin = std::make_shared<const CvResponse>(dataset.data, rows, folds, KernelSpec::Kind::linear, options.solver);
      problem.linear = as_response(lin);
    }
    problem.features = &x;
    problem.labels = &y;
    problem.seed = seed;
    if (options.time_limit_secs) {
      problem.deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(*options.time_limit_secs));
    }

    run.outcome = run_search(algorithm, problem);
    r.tie_set = run.outcome.ties;
    r.tie_set_size = r.tie_set.size();
    r.eval_count = run.outcome.eval_count;
    r.alpha = run.outcome.best_accuracy;
    r.theta = select(r.tie_set, options.rule, derive_seed(seed, kSelectTag));

    TrainConfig cfg = options.solver;
    cfg.C = r.theta.C();
    const SvmModel model = train(x, y, cfg, KernelSpec::rbf(r.theta.gamma()));
    const auto other = plan.subset_rows(3 - subset);
    r.beta = accuracy(model, gather_rows(dataset.data.features, other), gather_labels(dataset.data.labels, other));
  } catch (const TimeLimitExceeded& e) {
    r.flagged = true;
    r.flag_reason = e.what();
  } catch (const std::exception& e) {
    r.flagged = true;
    r.flag_reason = e.what();
  }
  if (r.flagged) run.outcome = {};
  r.unconverged_fits = (rbf ? rbf->unconverged_fits() : 0) + (lin ? lin->unconverged_fits() : 0);
  r.wall_time = seconds_since(start);
  return run;
}

TrialRecord run_trial(const AlgorithmSpec& algorithm, const DatasetEntry& dataset, const SplitPlan& plan, int subset,
                      std::uint64_t seed, const TrialOptions& options) {
  return run_trial_detailed(algorithm, dataset, plan, subset, seed, options).record;
}

double mean_best_accuracy(const std::vector<TrialRecord>& records, const std::string& algorithm,
                          const std::string& dataset) {
  return 0.5 * (find_record(records, algorithm, dataset, 1).alpha + find_record(records, algorithm, dataset, 2).alpha);
}

double accuracy_gain(const std::vector<TrialRecord>& records, const std::string& algorithm,
                     const std::string& baseline, const std::string& dataset) {
  return mean_best_accuracy(records, algorithm, dataset) - mean_best_accuracy(records, baseline, dataset);
}

double future_accuracy(const std::vector<TrialRecord>& records, const std::string& algorithm,
                       const std::string& dataset) {
  return 0.5 * (find_record(records, algorithm, dataset, 1).beta + find_record(records, algorithm, dataset, 2).beta);
}

double future_gain(const std::vector<TrialRecord>& records, const std::string& algorithm,
                   const std::string& baseline, const std::string& dataset) {
  return future_accuracy(records, algorithm, dataset) - future_accuracy(records, baseline, dataset);
}

CostRatio cost_ratio(const std::vector<TrialRecord>& records, const std::string& algorithm,
                     const std::string& baseline, const std::string& dataset) {
  const auto& a1 = find_record(records, algorithm, dataset, 1);
  const auto& a2 = find_record(records, algorithm, dataset, 2);
  const auto& b1 = find_record(records, baseline, dataset, 1);
  const auto& b2 = find_record(records, baseline, dataset, 2);
  const double base_time = b1.wall_time + b2.wall_time;
  const auto base_evals = static_cast<double>(b1.eval_count + b2.eval_count);
  if (!(base_time > 0.0)) throw DataError("baseline wall time is zero on " + dataset);
  if (!(base_evals > 0.0)) throw DataError("baseline used no evaluations on " + dataset);
  return {(a1.wall_time + a2.wall_time) / base_time, static_cast<double>(a1.eval_count + a2.eval_count) / base_evals};
}

GainTable build_gain_table(const std::vector<TrialRecord>& records, const std::vector<std::string>& algorithms,
                           const std::vector<std::string>& datasets, const std::string& baseline) {
  GainTable table;
  table.baseline = baseline;
  for (const auto& a : algorithms) {
    for (const auto& d : datasets) {
      try {
        GainRow row;
        row.algorithm = a;
        row.dataset = d;
        if (a == baseline) {
          // self-comparison; still requires complete records
          mean_best_accuracy(records, a, d);
          future_accuracy(records, a, d);
          row.accgain = 0.0;
          row.future_gain = 0.0;
        } else {
          row.accgain = accuracy_gain(records, a, baseline, d);
          row.future_gain = future_gain(records, a, baseline, d);
        }
        const CostRatio cost = cost_ratio(records, a, baseline, d);
        row.eval_ratio = cost.eval_ratio;
        row.time_ratio = cost.time_ratio;
        table.rows.push_back(row);
      } catch (const DataError&) {
        table.excluded.emplace_back(a, d);
      }
    }
  }
  return table;
}

std::vector<AlgorithmSummary> summarize(const GainTable& table, const std::vector<std::string>& algorithms,
                                        std::size_t replicates, std::uint64_t seed) {
  std::vector<AlgorithmSummary> out;
  for (const auto& a : algorithms) {
    std::vector<double> acc;
    std::vector<double> fut;
    std::vector<double> evals;
    std::vector<double> times;
    for (const auto& row : table.rows) {
      if (row.algorithm != a) continue;
      acc.push_back(row.accgain);
      fut.push_back(row.future_gain);
      evals.push_back(row.eval_ratio);
      times.push_back(row.time_ratio);
    }
    AlgorithmSummary s;
    s.algorithm = a;
    s.datasets = acc.size();
    s.mean_eval_ratio = mean(evals);
    s.mean_time_ratio = mean(times);
    const std::uint64_t alg_seed = derive_seed(seed, stable_hash(a));
    const auto ci = [&](const std::vector<double>& v, std::uint64_t tag) {
      if (v.size() >= 2) return bootstrap_ci_mean(v, replicates, 0.95, derive_seed(alg_seed, tag));
      CiResult c;
      c.mean = c.low = c.high = v.empty() ? 0.0 : v.front();
      c.seed = derive_seed(alg_seed, tag);
      return c;
    };
    s.accgain = ci(acc, 1);
    s.future_gain = ci(fut, 2);
    out.push_back(s);
  }
  return out;
}

// ------------------------------------------------------------- stability

namespace {

// Rank of `p` in `log` (1 = best). Entries tied with it count half, except
// members of the source run's own tie set, which share its position.
double cross_rank(const HyperPoint& p, const std::vector<Evaluation>& log, const std::vector<HyperPoint>& source_ties) {
  const PointKey key = quantize(p);
  const auto it = std::find_if(log.begin(), log.end(), [&](const Evaluation& e) { return quantize(e.point) == key; });
  if (it == log.end()) throw ConfigError("stability runs probed different points");
  std::set<PointKey> own;
  for (const auto& t : source_ties) own.insert(quantize(t));
  double rank = 1.0;
  std::set<PointKey> seen;
  for (const auto& e : log) {
    const PointKey k = quantize(e.point);
    if (!seen.insert(k).second) continue;
    if (e.accuracy > it->accuracy) {
      rank += 1.0;
    } else if (e.accuracy == it->accuracy && k != key && !own.contains(k)) {
      rank += 0.5;
    }
  }
  return rank;
}

double best_second_gap(const std::vector<Evaluation>& log) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : log) best = std::max(best, e.accuracy);
  double second = best;
  bool found = false;
  for (const auto& e : log) {
    if (e.accuracy < best && (!found || e.accuracy > second)) {
      second = e.accuracy;
      found = true;
    }
  }
  return found ? best - second : 0.0;
}

double max_of(const std::vector<Evaluation>& log) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : log) best = std::max(best, e.accuracy);
  return best;
}

}  // namespace

StabilityReport stability_from_units(const std::string& algorithm, const std::vector<StabilityUnit>& units) {
  if (units.empty()) throw ConfigError("stability needs at least one unit");
  StabilityReport rep;
  rep.algorithm = algorithm;

  struct Prepared {
    const StabilityUnit* u;
    std::vector<HyperPoint> ties1, ties2;
  };
  std::vector<Prepared> all;
  std::vector<Prepared> single;
  for (const auto& u : units) {
    if (u.log1.empty() || u.log2.empty()) throw ConfigError("stability unit has an empty log");
    Prepared p{&u, best_so_far(u.log1), best_so_far(u.log2)};
    all.push_back(p);
    if (p.ties1.size() == 1 || p.ties2.size() == 1) single.push_back(p);
  }
  rep.n_single_best = static_cast<double>(single.size());
  // With no single-best unit the per-unit measurements use every unit.
  const auto& focus = single.empty() ? all : single;

  std::vector<double> same;
  std::vector<double> ranks;
  std::vector<double> gaps;
  for (const auto& p : focus) {
    same.push_back(quantize(p.u->best1) == quantize(p.u->best2) ? 1.0 : 0.0);
    const bool only_singletons = !single.empty();
    if (!only_singletons || p.ties1.size() == 1) ranks.push_back(cross_rank(p.u->best1, p.u->log2, p.ties1));
    if (!only_singletons || p.ties2.size() == 1) ranks.push_back(cross_rank(p.u->best2, p.u->log1, p.ties2));
    gaps.push_back(best_second_gap(p.u->log1));
    gaps.push_back(best_second_gap(p.u->log2));
  }
  std::vector<double> cross_gaps;
  std::vector<double> dist;
  for (const auto& p : all) {
    cross_gaps.push_back(std::abs(max_of(p.u->log1) - max_of(p.u->log2)));
    dist.push_back(log2_distance(p.u->best1, p.u->best2));
  }
  rep.same_best_proportion = mean(same);
  rep.mean_cross_run_rank = mean(ranks);
  rep.median_best_second_gap = median(gaps);
  rep.median_cross_run_best_gap = median(cross_gaps);
  rep.mean_log_distance = mean(dist);
  return rep;
}

StabilityReport two_run_stability(const AlgorithmSpec& algorithm, const std::vector<DatasetEntry>& datasets,
                                  std::uint64_t split_seed, std::uint64_t s1, std::uint64_t s2,
                                  std::uint64_t search_seed, const TrialOptions& options) {
  if (!is_grid_like(algorithm.family)) throw ConfigError("stability requires predetermined probes");
  std::vector<StabilityUnit> units;
  TrialOptions opts = options;
  opts.rule = SelectionRule::randCg;
  for (const auto& ds : datasets) {
    const SplitPlan base = make_split_plan(ds.data, 5, dataset_split_seed(split_seed, ds.id));
    const SplitPlan p1 = with_inner_seed(ds.data, base, s1);
    const SplitPlan p2 = with_inner_seed(ds.data, base, s2);
    for (int j = 1; j <= 2; ++j) {
      const std::uint64_t seed = trial_search_seed(search_seed, ds.id, j);
      const TrialRun r1 = run_trial_detailed(algorithm, ds, p1, j, seed, opts);
      const TrialRun r2 = run_trial_detailed(algorithm, ds, p2, j, seed, opts);
      if (r1.record.flagged || r2.record.flagged) {
        throw DataError("stability trial failed on " + ds.id + ": " +
                        (r1.record.flagged ? r1.record.flag_reason : r2.record.flag_reason));
      }
      units.push_back({r1.outcome.log, r2.outcome.log, r1.record.theta, r2.record.theta});
    }
  }
  return stability_from_units(algorithm.id, units);
}

// ------------------------------------------------------------- campaigns

std::uint64_t dataset_split_seed(std::uint64_t seed_split, const std::string& dataset) {
  return derive_seed(seed_split, stable_hash(dataset));
}

std::uint64_t trial_search_seed(std::uint64_t seed_search, const std::string& dataset, int subset) {
  return derive_seed(derive_seed(seed_search, stable_hash(dataset)), static_cast<std::uint64_t>(subset));
}

void sort_records(std::vector<TrialRecord>& records) {
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.algorithm, a.dataset, a.subset, a.split_seed, a.search_seed) <
           std::tie(b.algorithm, b.dataset, b.subset, b.split_seed, b.search_seed);
  });
}

std::vector<TrialRecord> run_campaign(const std::vector<DatasetEntry>& datasets, const CampaignConfig& config,
                                      const std::filesystem::path& jsonl) {
  std::vector<const AlgorithmSpec*> algorithms;
  for (const auto& id : config.algorithms) algorithms.push_back(&find_algorithm(id));
  find_algorithm(config.baseline);

  std::vector<TrialRecord> existing = std::filesystem::exists(jsonl) ? read_trial_records(jsonl) : std::vector<TrialRecord>{};
  std::set<std::string> done;
  for (const auto& r : existing) done.insert(r.key());

  struct Work {
    const AlgorithmSpec* algorithm;
    std::size_t dataset;
    int subset;
    std::uint64_t split_seed;
    std::uint64_t search_seed;
  };
  std::vector<Work> work;
  std::set<std::string> wanted;
  for (const auto* a : algorithms) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      for (int j = 1; j <= 2; ++j) {
        TrialRecord probe;
        probe.algorithm = a->id;
        probe.dataset = datasets[d].id;
        probe.subset = j;
        probe.split_seed = dataset_split_seed(config.seed_split, datasets[d].id);
        probe.search_seed = trial_search_seed(config.seed_search, datasets[d].id, j);
        wanted.insert(probe.key());
        if (!done.contains(probe.key())) work.push_back({a, d, j, probe.split_seed, probe.search_seed});
      }
    }
  }

  // Split plans are shared by every trial on a dataset.
  std::vector<std::optional<SplitPlan>> plans(datasets.size());
  std::vector<std::string> plan_errors(datasets.size());
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    try {
      plans[d] = make_split_plan(datasets[d].data, config.k_inner, dataset_split_seed(config.seed_split, datasets[d].id));
    } catch (const Error& e) {
      plan_errors[d] = e.what();
    }
  }

  std::filesystem::create_directories(jsonl.has_parent_path() ? jsonl.parent_path() : std::filesystem::path("."));
  std::ofstream out(jsonl, std::ios::app);
  if (!out) throw DataError("cannot open " + jsonl.string() + " for appending");
  std::mutex mu;
  std::vector<TrialRecord> fresh;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const Work& w = work[i];
      TrialRecord rec;
      if (plans[w.dataset]) {
        rec = run_trial(*w.algorithm, datasets[w.dataset], *plans[w.dataset], w.subset, w.search_seed, config.trial);
      } else {
        rec.algorithm = w.algorithm->id;
        rec.dataset = datasets[w.dataset].id;
        rec.subset = w.subset;
        rec.split_seed = w.split_seed;
        rec.search_seed = w.search_seed;
        rec.budget = w.algorithm->budget;
        rec.flagged = true;
        rec.flag_reason = plan_errors[w.dataset];
      }
      const std::lock_guard lock(mu);
      out << to_json_line(rec) << '\n' << std::flush;
      fresh.push_back(std::move(rec));
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, work.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<TrialRecord> result;
  for (auto& r : existing) {
    if (wanted.contains(r.key())) result.push_back(std::move(r));
  }
  for (auto& r : fresh) result.push_back(std::move(r));
  sort_records(result);
  return result;
}

// ------------------------------------------------------------ persistence

std::string to_json_line(const TrialRecord& r) {
  nlohmann::json ties = nlohmann::json::array();
  for (const auto& p : r.tie_set) ties.push_back({p.log2C, p.log2gamma});
  const nlohmann::json j{{"algorithm", r.algorithm},
                         {"dataset", r.dataset},
                         {"subset", r.subset},
                         {"split_seed", r.split_seed},
                         {"search_seed", r.search_seed},
                         {"theta", {r.theta.log2C, r.theta.log2gamma}},
                         {"alpha", r.alpha},
                         {"beta", r.beta},
                         {"eval_count", r.eval_count},
                         {"budget", r.budget},
                         {"wall_time", r.wall_time},
                         {"tie_set_size", r.tie_set_size},
                         {"tie_set", ties},
                         {"unconverged_fits", r.unconverged_fits},
                         {"flagged", r.flagged},
                         {"flag_reason", r.flag_reason}};
  return j.dump();
}

TrialRecord trial_from_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TrialRecord r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.subset = j.at("subset").get<int>();
    r.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.search_seed = j.at("search_seed").get<std::uint64_t>();
    r.theta = {j.at("theta").at(0).get<double>(), j.at("theta").at(1).get<double>()};
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<double>();
    r.eval_count = j.at("eval_count").get<std::size_t>();
    r.budget = j.at("budget").get<std::size_t>();
    r.wall_time = j.at("wall_time").get<double>();
    r.tie_set_size = j.at("tie_set_size").get<std::size_t>();
    for (const auto& p : j.at("tie_set")) r.tie_set.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.unconverged_fits = j.value("unconverged_fits", std::size_t{0});
    r.flagged = j.at("flagged").get<bool>();
    r.flag_reason = j.value("flag_reason", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed trial record: ") + e.what());
  }
}

std::vector<TrialRecord> read_trial_records(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw DataError("cannot read " + jsonl.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(trial_from_json_line(lines[i]));
    } catch (const DataError&) {
      if (i + 1 != lines.size()) throw;
    }
  }
  return out;
}

void write_gain_table_csv(std::ostream& out, const GainTable& table) {
  out << "algorithm,dataset,accgain,future_gain,eval_ratio,time_ratio\n";
  for (const auto& r : table.rows) {
    out << r.algorithm << ',' << r.dataset << ',' << fmt(r.accgain) << ',' << fmt(r.future_gain) << ','
        << fmt(r.eval_ratio) << ',' << fmt(r.time_ratio) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<AlgorithmSummary>& summary) {
  out << "algorithm,datasets,accgain_mean,accgain_low,accgain_high,future_gain_mean,future_gain_low,"
         "future_gain_high,replicates,mean_eval_ratio,mean_time_ratio\n";
  for (const auto& s : summary) {
    out << s.algorithm << ',' << s.datasets << ',' << fmt(s.accgain.mean) << ',' << fmt(s.accgain.low) << ','
        << fmt(s.accgain.high) << ',' << fmt(s.future_gain.mean) << ',' << fmt(s.future_gain.low) << ','
        << fmt(s.future_gain.high) << ',' << s.accgain.replicates << ',' << fmt(s.mean_eval_ratio) << ','
        << fmt(s.mean_time_ratio) << '\n';
  }
}

void write_plot_data_csv(std::ostream& out, const std::vector<AlgorithmSummary>& summary) {
  out << "algorithm,mean_accgain,log10_eval_ratio\n";
  for (const auto& s : summary) {
    if (s.datasets == 0) continue;
    out << s.algorithm << ',' << fmt(s.accgain.mean) << ',' << fmt(std::log10(s.mean_eval_ratio)) << '\n';
  }
}

namespace {

constexpr const char* kStabilityRows[] = {"n_single_best",          "same_best_proportion",
                                          "mean_cross_run_rank",    "median_best_second_gap",
                                          "median_cross_run_best_gap", "mean_log_distance"};

}  // namespace

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
  const double values[] = {report.n_single_best,          report.same_best_proportion,
                           report.mean_cross_run_rank,    report.median_best_second_gap,
                           report.median_cross_run_best_gap, report.mean_log_distance};
  out << "algorithm,measurement,value\n";
  for (std::size_t i = 0; i < 6; ++i) out << report.algorithm << ',' << kStabilityRows[i] << ',' << fmt(values[i], 17) << '\n';
}

StabilityReport read_stability_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "algorithm,measurement,value") throw DataError("bad stability header");
  StabilityReport rep;
  double* slots[] = {&rep.n_single_best,          &rep.same_best_proportion,
                     &rep.mean_cross_run_rank,    &rep.median_best_second_gap,
                     &rep.median_cross_run_best_gap, &rep.mean_log_distance};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!std::getline(in, line)) throw DataError("stability report has fewer than six rows");
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw DataError("bad stability row: " + line);
    if (line.substr(a + 1, b - a - 1) != kStabilityRows[i]) throw DataError("unexpected stability row: " + line);
    rep.algorithm = line.substr(0, a);
    try {
      *slots[i] = std::stod(line.substr(b + 1));
    } catch (const std::exception&) {
      throw DataError("bad stability value: " + line);
    }
  }
  return rep;
}

}  // namespace svmtune
