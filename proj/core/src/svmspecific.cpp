#include "svmtune/svmspecific.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"
#include "svmtune/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svmtune {
namespace {

std::vector<double> endpoint_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t m, Rng& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Rounds to a multiple of 2^-36. With both c_hat and c on this lattice (and
// inside the box), c_hat - c and its sum with c are exact, so every stage-2
// point lies on the line without rounding error.
double snap_dyadic(double x) { return std::ldexp(std::round(std::ldexp(x, 36)), -36); }

}  // namespace

std::string to_string(GammaMethod m) {
  switch (m) {
    case GammaMethod::sigest: return "sigest";
    case GammaMethod::skl: return "skl";
    case GammaMethod::dbtc: return "dbtc";
    case GammaMethod::sdbtc: return "sdbtc";
  }
  return "unknown";
}

double clip_gamma(double gamma) { return std::clamp(gamma, std::exp2(kSearchBox.g_lo), std::exp2(kSearchBox.g_hi)); }

std::vector<std::size_t> sigest_sample(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DataError("sigest needs at least 2 rows");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  return sample_without_replacement(std::move(all), std::max<std::size_t>(2, n / 2), rng);
}

GammaEstimate sigest_gamma(const Eigen::MatrixXd& rows, std::uint64_t seed) {
  GammaEstimate est;
  est.method = GammaMethod::sigest;
  est.sample = sigest_sample(static_cast<std::size_t>(rows.rows()), seed);
  const Eigen::MatrixXd x = gather_rows(rows, est.sample);
  const Eigen::MatrixXd d2 = squared_distances(x, x);
  std::vector<double> pairs;
  pairs.reserve(est.sample.size() * (est.sample.size() - 1) / 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) pairs.push_back(d2(i, j));
  }
  const std::size_t mid = pairs.size() / 2;
  std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid), pairs.end());
  double median = pairs[mid];
  if (pairs.size() % 2 == 0) {
    const double below = *std::max_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (below + median);
  }
  if (!(median > 0.0)) throw DataError("degenerate geometry");
  est.median_sq_distance = median;
  est.raw_gamma = 1.0 / median;
  est.gamma = clip_gamma(est.raw_gamma);
  return est;
}

GammaEstimate skl_gamma(std::size_t d) {
  if (d == 0) throw ConfigError("skl_gamma needs at least one feature");
  GammaEstimate est;
  est.method = GammaMethod::skl;
  est.raw_gamma = 1.0 / static_cast<double>(d);
  est.gamma = clip_gamma(est.raw_gamma);
  return est;
}

namespace {

struct ClassDistances {
  Eigen::MatrixXd pp, nn, pn;
};

ClassDistances class_distances(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                               const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i : idx) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("dbtc needs both classes");
  const Eigen::MatrixXd xp = gather_rows(rows, pos);
  const Eigen::MatrixXd xn = gather_rows(rows, neg);
  return {squared_distances(xp, xp), squared_distances(xn, xn), squared_distances(xp, xn)};
}

double dbtc_from(const ClassDistances& d, double gamma) {
  const auto mean_k = [&](const Eigen::MatrixXd& m) { return (-gamma * m.array()).exp().mean(); };
  return mean_k(d.pp) + mean_k(d.nn) - 2.0 * mean_k(d.pn);
}

}  // namespace

double dbtc_distance(const Eigen::MatrixXd& rows, const std::vector<int>& labels, double gamma) {
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw ConfigError("dbtc: rows and labels differ in length");
  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return dbtc_from(class_distances(rows, labels, all), gamma);
}

GammaEstimate dbtc_gamma(const Eigen::MatrixXd& rows, const std::vector<int>& labels, std::size_t grid_size,
                         double sample_fraction, std::uint64_t seed) {
  if (grid_size < 2) throw ConfigError("dbtc grid needs at least 2 points");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) throw ConfigError("dbtc sample fraction must lie in (0, 1]");
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw ConfigError("dbtc: rows and labels differ in length");

  GammaEstimate est;
  est.method = sample_fraction < 1.0 ? GammaMethod::sdbtc : GammaMethod::dbtc;
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw DataError("dbtc needs both classes");

  if (sample_fraction < 1.0) {
    Rng rng = make_rng(seed);
    for (int attempt = 0; attempt < 2; ++attempt) {
      const auto take = [&](const std::vector<std::size_t>& cls) {
        const auto m = static_cast<std::size_t>(std::floor(sample_fraction * static_cast<double>(cls.size())));
        return sample_without_replacement(cls, m, rng);
      };
      const auto sp = take(pos);
      const auto sn = take(neg);
      if (!sp.empty() && !sn.empty()) {
        est.sample = sp;
        est.sample.insert(est.sample.end(), sn.begin(), sn.end());
        break;
      }
    }
    if (est.sample.empty()) throw DataError("dbtc sample has an empty class");
  } else {
    est.sample.resize(labels.size());
    std::iota(est.sample.begin(), est.sample.end(), std::size_t{0});
  }

  const ClassDistances d = class_distances(rows, labels, est.sample);
  double best = -1.0;
  for (double lg : endpoint_grid(kSearchBox.g_lo, kSearchBox.g_hi, grid_size)) {
    const double v = dbtc_from(d, std::exp2(lg));
    est.curve.emplace_back(lg, v);
    if (v > best) {
      best = v;
      est.raw_gamma = std::exp2(lg);
    }
  }
  est.gamma = clip_gamma(est.raw_gamma);
  return est;
}

std::vector<double> c_grid(std::size_t n_c) {
  if (n_c == 0) throw ConfigError("C grid needs at least one point");
  if (n_c == 1) return {0.0};
  return endpoint_grid(kSearchBox.c_lo, kSearchBox.c_hi, n_c);
}

std::vector<HyperPoint> fixed_gamma_c_search(SurfaceEvaluator& ev, double gamma, std::size_t n_c) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  const double lg = std::log2(clip_gamma(gamma));
  const std::size_t start = ev.evaluations();
  for (double c : c_grid(n_c)) ev.evaluate({c, lg});
  return best_so_far(std::span(ev.log()).subspan(start));
}

AsympResult asymp_search(SurfaceEvaluator& ev_linear, SurfaceEvaluator& ev_rbf, std::size_t n_pair) {
  if (n_pair < 1) throw ConfigError("asymp needs at least one point per stage");
  AsympResult out;
  double best = -1.0;
  for (double c : c_grid(n_pair)) {
    const Evaluation e = ev_linear.evaluate({snap_dyadic(c), 0.0});
    if (e.accuracy > best) {
      best = e.accuracy;
      out.log2_c_hat = e.point.log2C;
    }
  }
  const double c_hat = out.log2_c_hat;
  out.feasible_lo = std::max(kSearchBox.c_lo, c_hat - kSearchBox.g_hi);
  out.feasible_hi = std::min(kSearchBox.c_hi, c_hat - kSearchBox.g_lo);
  if (out.feasible_lo > out.feasible_hi) throw NumericalError("asymp: line misses the box");

  const std::vector<double> cs =
      n_pair == 1 ? std::vector<double>{0.5 * (out.feasible_lo + out.feasible_hi)}
                  : endpoint_grid(out.feasible_lo, out.feasible_hi, n_pair);
  const std::size_t start = ev_rbf.evaluations();
  for (double c : cs) {
    const double cs_snapped = std::clamp(snap_dyadic(c), out.feasible_lo, out.feasible_hi);
    const HyperPoint p{cs_snapped, c_hat - cs_snapped};
    if (!in_search_box(p) || p.log2gamma + p.log2C != c_hat) throw NumericalError("asymp: stage-2 point off the line");
    out.stage2.push_back(p);
    ev_rbf.evaluate(p);
  }
  out.best = best_so_far(std::span(ev_rbf.log()).subspan(start));
  return out;
}

}  // namespace svmtune
