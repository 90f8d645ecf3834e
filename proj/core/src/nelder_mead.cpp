#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace svmtune {
namespace {

struct Vertex {
  HyperPoint p;
  double f;
};

HyperPoint lerp(const HyperPoint& from, const HyperPoint& to, double t) {
  return kSearchBox.clamp({from.log2C + t * (to.log2C - from.log2C), from.log2gamma + t * (to.log2gamma - from.log2gamma)});
}

// Axis step that stays inside the box: forward if it fits, else backward.
double axis_step(double x, double step, double lo, double hi) {
  if (x + step <= hi) return x + step;
  return std::max(lo, x - step);
}

enum class Outcome { converged, exhausted };

Outcome run_simplex(detail::BudgetedObjective& objective, const HyperPoint& start, const NelderMeadOptions& opts) {
  const double step_c = opts.step_fraction * kSearchBox.c_side();
  const double step_g = opts.step_fraction * kSearchBox.g_side();
  const HyperPoint x0 = kSearchBox.clamp(start);
  const std::array<HyperPoint, 3> init{
      x0, HyperPoint{axis_step(x0.log2C, step_c, kSearchBox.c_lo, kSearchBox.c_hi), x0.log2gamma},
      HyperPoint{x0.log2C, axis_step(x0.log2gamma, step_g, kSearchBox.g_lo, kSearchBox.g_hi)}};

  std::array<Vertex, 3> s{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto e = objective(init[i]);
    if (!e) return Outcome::exhausted;
    s[i] = {e->point, e->accuracy};
  }

  const auto eval = [&](const HyperPoint& p) -> std::optional<double> {
    const auto e = objective(p);
    if (!e) return std::nullopt;
    return e->accuracy;
  };

  for (;;) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
    Vertex& best = s[0];
    Vertex& mid = s[1];
    Vertex& worst = s[2];

    double diameter = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) diameter = std::max(diameter, log2_distance(s[i].p, s[j].p));
    }
    if (best.f - worst.f <= opts.ftol * (1.0 + std::abs(best.f)) || diameter <= opts.xtol) return Outcome::converged;

    const HyperPoint centroid{0.5 * (best.p.log2C + mid.p.log2C), 0.5 * (best.p.log2gamma + mid.p.log2gamma)};
    const HyperPoint xr = lerp(centroid, worst.p, -1.0);
    const auto fr = eval(xr);
    if (!fr) return Outcome::exhausted;

    if (*fr > best.f) {
      const HyperPoint xe = lerp(centroid, worst.p, -2.0);
      const auto fe = eval(xe);
      if (!fe) return Outcome::exhausted;
      worst = *fe > *fr ? Vertex{xe, *fe} : Vertex{xr, *fr};
    } else if (*fr > mid.f) {
      worst = {xr, *fr};
    } else {
      const bool outside = *fr > worst.f;
      const HyperPoint xc = outside ? lerp(centroid, xr, 0.5) : lerp(centroid, worst.p, 0.5);
      const auto fc = eval(xc);
      if (!fc) return Outcome::exhausted;
      if ((outside && *fc >= *fr) || (!outside && *fc > worst.f)) {
        worst = {xc, *fc};
      } else {
        for (std::size_t i = 1; i < 3; ++i) {
          s[i].p = lerp(best.p, s[i].p, 0.5);
          const auto fs = eval(s[i].p);
          if (!fs) return Outcome::exhausted;
          s[i].f = *fs;
        }
      }
    }
  }
}

}  // namespace

std::vector<HyperPoint> nelder_mead(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const NelderMeadOptions& opts) {
  if (cfg.budget < 3) throw ConfigError("nelder_mead needs a budget of at least 3");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  HyperPoint start = kSearchBox.center();
  while (!objective.exhausted()) {
    if (run_simplex(objective, start, opts) == Outcome::exhausted) break;
    const double u = u01(rng);
    const double v = u01(rng);
    start = kSearchBox.from_unit(u, v);
  }
  return objective.result();
}

}  // namespace svmtune
