#include "svmtune/gridlike.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace svmtune {
namespace {

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

double lattice(double lo, double hi, std::size_t i, std::size_t count) {
  if (count == 1) return 0.5 * (lo + hi);
  if (i + 1 == count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

using UnitSet = std::vector<std::array<double, 2>>;

// Good lattice point set: coordinate j of point k is (k * h_j mod m), with 0
// read as m, mapped to the cell centre (q - 0.5) / n. For m = n + 1 the last
// point is dropped (leave-one-out construction).
UnitSet glp(std::size_t n, std::size_t m, std::size_t h) {
  UnitSet pts;
  pts.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t q1 = k % m;
    std::size_t q2 = (k * h) % m;
    if (q1 == 0) q1 = m;
    if (q2 == 0) q2 = m;
    pts.push_back({(static_cast<double>(q1) - 0.5) / static_cast<double>(n),
                   (static_cast<double>(q2) - 0.5) / static_cast<double>(n)});
  }
  return pts;
}

UnitSet compute_ud(std::size_t n) {
  UnitSet best;
  double best_cd = std::numeric_limits<double>::infinity();
  for (std::size_t m : {n, n + 1}) {
    for (std::size_t h = 1; h < m; ++h) {
      if (std::gcd(h, m) != 1) continue;
      auto pts = glp(n, m, h);
      const double cd = centered_l2_discrepancy(pts);
      if (cd < best_cd) {
        best_cd = cd;
        best = std::move(pts);
      }
    }
  }
  return best;
}

}  // namespace

ProbePlan grid_points(std::size_t n, const Rect& box) {
  const std::size_t side = exact_sqrt(n);
  if (n < 4 || side * side != n) throw ConfigError("grid size must be a perfect square >= 4, got " + std::to_string(n));
  ProbePlan plan;
  plan.generator = ProbeGenerator::grid;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      plan.points.push_back({lattice(box.c_lo, box.c_hi, i, side), lattice(box.g_lo, box.g_hi, j, side)});
    }
  }
  return plan;
}

double centered_l2_discrepancy(const UnitSet& pts) {
  const auto n = static_cast<double>(pts.size());
  double term2 = 0.0;
  for (const auto& p : pts) {
    double prod = 1.0;
    for (double x : p) {
      const double a = std::abs(x - 0.5);
      prod *= 1.0 + 0.5 * a - 0.5 * a * a;
    }
    term2 += prod;
  }
  double term3 = 0.0;
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      double prod = 1.0;
      for (std::size_t d = 0; d < 2; ++d) {
        prod *= 1.0 + 0.5 * std::abs(p[d] - 0.5) + 0.5 * std::abs(q[d] - 0.5) - 0.5 * std::abs(p[d] - q[d]);
      }
      term3 += prod;
    }
  }
  return (13.0 / 12.0) * (13.0 / 12.0) - 2.0 / n * term2 + term3 / (n * n);
}

std::vector<std::array<double, 2>> ud_unit_points(std::size_t n) {
  if (n < 2) throw ConfigError("uniform design needs at least 2 points");
  static std::mutex mutex;
  static std::map<std::size_t, UnitSet> memo;
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(n); it != memo.end()) return it->second;
  }
  UnitSet pts = compute_ud(n);
  std::lock_guard lock(mutex);
  memo.emplace(n, pts);
  return pts;
}

ProbePlan ud_points(std::size_t n, const Rect& box) {
  ProbePlan plan;
  plan.generator = ProbeGenerator::ud;
  for (const auto& u : ud_unit_points(n)) plan.points.push_back(box.from_unit(u[0], u[1]));
  return plan;
}

ProbePlan rand_points(std::size_t n, std::uint64_t seed, const Rect& box) {
  if (n < 1) throw ConfigError("rand plan needs at least 1 point");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ProbePlan plan;
  plan.generator = ProbeGenerator::rand;
  plan.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u01(rng);
    const double v = u01(rng);
    plan.points.push_back(box.from_unit(u, v));
  }
  return plan;
}

std::vector<HyperPoint> normrand_raw(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("normrand plan needs at least 1 point");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> c_dist(5.0, 5.0);
  std::normal_distribution<double> g_dist(-5.0, 5.0);
  std::vector<HyperPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = c_dist(rng);
    const double g = g_dist(rng);
    out.push_back({c, g});
  }
  return out;
}

ProbePlan normrand_points(std::size_t n, std::uint64_t seed) {
  ProbePlan plan;
  plan.generator = ProbeGenerator::normrand;
  plan.seed = seed;
  for (const auto& p : normrand_raw(n, seed)) plan.points.push_back(kSearchBox.clamp(p));
  return plan;
}

std::vector<HyperPoint> run_flat(SurfaceEvaluator& ev, const ProbePlan& plan) {
  if (plan.points.empty()) throw ConfigError("empty probe plan");
  if (ev.budget_remaining() < plan.points.size()) throw ConfigError("budget smaller than probe plan");
  const std::size_t start = ev.evaluations();
  for (const auto& p : plan.points) ev.evaluate(p);
  return best_so_far(std::span(ev.log()).subspan(start));
}

Rect refinement_box(const HyperPoint& best, const std::vector<HyperPoint>& level1, const Rect& outer) {
  Rect box{outer.c_lo, outer.c_hi, outer.g_lo, outer.g_hi};
  for (const auto& p : level1) {
    if (p.log2C < best.log2C) box.c_lo = std::max(box.c_lo, p.log2C);
    if (p.log2C > best.log2C) box.c_hi = std::min(box.c_hi, p.log2C);
    if (p.log2gamma < best.log2gamma) box.g_lo = std::max(box.g_lo, p.log2gamma);
    if (p.log2gamma > best.log2gamma) box.g_hi = std::min(box.g_hi, p.log2gamma);
  }
  return box;
}

std::vector<HyperPoint> run_hier(SurfaceEvaluator& ev, ProbeGenerator generator, std::size_t n_per_level) {
  if (generator != ProbeGenerator::grid && generator != ProbeGenerator::ud) {
    throw ConfigError("hierarchical search supports grid and ud only");
  }
  if (ev.budget_remaining() < 2 * n_per_level) throw ConfigError("budget smaller than two levels");
  const auto make_plan = [&](const Rect& box) {
    return generator == ProbeGenerator::grid ? grid_points(n_per_level, box) : ud_points(n_per_level, box);
  };

  const ProbePlan level1 = make_plan(kSearchBox);
  const std::size_t start = ev.evaluations();
  for (const auto& p : level1.points) ev.evaluate(p);
  const auto l1 = std::span(ev.log()).subspan(start);
  const Evaluation* winner = &l1.front();
  for (const auto& e : l1) {
    if (e.accuracy > winner->accuracy) winner = &e;
  }
  const Evaluation x = *winner;

  const Rect sub = refinement_box(x.point, level1.points);
  const ProbePlan level2 = make_plan(sub);
  const std::size_t start2 = ev.evaluations();
  for (const auto& p : level2.points) ev.evaluate(p);

  std::vector<Evaluation> candidates{x};
  const auto l2 = std::span(ev.log()).subspan(start2);
  candidates.insert(candidates.end(), l2.begin(), l2.end());
  return best_so_far(candidates);
}

}  // namespace svmtune
