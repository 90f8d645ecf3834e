#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svmtune {
namespace {

using Vec = Eigen::Vector2d;

Vec to_unit(const HyperPoint& p) {
  return {(p.log2C - kSearchBox.c_lo) / kSearchBox.c_side(), (p.log2gamma - kSearchBox.g_lo) / kSearchBox.g_side()};
}

HyperPoint from_unit(const Vec& u) {
  return kSearchBox.clamp(kSearchBox.from_unit(std::clamp(u[0], 0.0, 1.0), std::clamp(u[1], 0.0, 1.0)));
}

Eigen::Matrix<double, 6, 1> basis(const Vec& d) {
  Eigen::Matrix<double, 6, 1> b;
  b << 1.0, d[0], d[1], 0.5 * d[0] * d[0], d[0] * d[1], 0.5 * d[1] * d[1];
  return b;
}

// Maximizer of a + b t + 1/2 c t^2 over [lo, hi].
double maximize_1d(double b, double c, double lo, double hi) {
  const auto value = [&](double t) { return b * t + 0.5 * c * t * t; };
  double best = value(lo) >= value(hi) ? lo : hi;
  if (c < 0.0) {
    const double t = -b / c;
    if (t > lo && t < hi && value(t) > value(best)) best = t;
  }
  return best;
}

struct InterpolationSet {
  std::vector<Vec> points;
  std::vector<double> values;
};

// Six-point pattern around x: two steps along each axis (towards the interior
// when the forward step would leave the unit square) plus one diagonal point.
std::vector<Vec> pattern(const Vec& x, double radius) {
  Vec s;
  for (int d = 0; d < 2; ++d) s[d] = x[d] + 2.0 * radius <= 1.0 ? radius : -radius;
  return {x,
          x + Vec(s[0], 0.0),
          x + Vec(2.0 * s[0], 0.0),
          x + Vec(0.0, s[1]),
          x + Vec(0.0, 2.0 * s[1]),
          x + Vec(s[0], s[1])};
}

double poisedness(const std::vector<Vec>& pts, const Vec& origin, double scale) {
  Eigen::Matrix<double, 6, 6> m;
  for (int i = 0; i < 6; ++i) m.row(i) = basis((pts[static_cast<std::size_t>(i)] - origin) / scale).transpose();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(m);
  const auto& sv = svd.singularValues();
  return sv[0] > 0.0 ? sv[5] / sv[0] : 0.0;
}

constexpr double kMinPoisedness = 1e-10;

}  // namespace

double QuadraticModel::operator()(const Eigen::Vector2d& u) const {
  const Vec d = u - origin;
  return c + g.dot(d) + 0.5 * d.dot(h * d);
}

std::optional<QuadraticModel> fit_quadratic(const std::vector<Eigen::Vector2d>& points, const std::vector<double>& values) {
  if (points.size() != 6 || values.size() != 6) throw ConfigError("fit_quadratic needs exactly six points");
  QuadraticModel q;
  q.origin = points.front();
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - q.origin).lpNorm<Eigen::Infinity>());
  if (scale <= 0.0) return std::nullopt;
  if (poisedness(points, q.origin, scale) < kMinPoisedness) return std::nullopt;

  Eigen::Matrix<double, 6, 6> m;
  Eigen::Matrix<double, 6, 1> rhs;
  for (int i = 0; i < 6; ++i) {
    m.row(i) = basis((points[static_cast<std::size_t>(i)] - q.origin) / scale).transpose();
    rhs[i] = values[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix<double, 6, 1> coef = m.fullPivLu().solve(rhs);
  q.c = coef[0];
  q.g = Vec(coef[1], coef[2]) / scale;
  q.h << coef[3], coef[4], coef[4], coef[5];
  q.h /= scale * scale;
  return q;
}

Eigen::Vector2d maximize_quadratic_on_rect(const QuadraticModel& q, const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
  std::vector<Vec> candidates;
  // interior stationary point
  if (q.h(0, 0) < 0.0 && q.h.determinant() > 0.0) {
    const Vec d = q.h.ldlt().solve(-q.g);
    const Vec u = q.origin + d;
    if ((u.array() >= lo.array()).all() && (u.array() <= hi.array()).all()) candidates.push_back(u);
  }
  // edges: fix one coordinate at a bound, maximize the 1-D restriction
  for (int fixed = 0; fixed < 2; ++fixed) {
    const int free = 1 - fixed;
    for (double bound : {lo[fixed], hi[fixed]}) {
      Vec base = q.origin;
      base[fixed] = bound;
      // restriction along `free` through `base`: gradient and curvature at base
      const Vec grad = q.g + q.h * (base - q.origin);
      const double b = grad[free];
      const double c = q.h(free, free);
      const double t = maximize_1d(b, c, lo[free] - base[free], hi[free] - base[free]);
      Vec u = base;
      u[free] += t;
      candidates.push_back(u);
    }
  }
  Vec best = candidates.front();
  double best_val = q(best);
  for (const auto& u : candidates) {
    const double v = q(u);
    if (v > best_val) {
      best_val = v;
      best = u;
    }
  }
  return best;
}

std::vector<HyperPoint> quad_trust_region(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const TrustRegionOptions& opts) {
  if (cfg.budget < 6) throw ConfigError("quad_trust_region needs a budget of at least 6");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Vec start = to_unit(kSearchBox.center());
  while (!objective.exhausted()) {
    double radius = opts.initial_radius;
    InterpolationSet set;

    const auto seed_set = [&](const Vec& x) -> bool {
      set.points.clear();
      set.values.clear();
      for (const Vec& p : pattern(x, std::min(radius, 0.25))) {
        const auto e = objective(from_unit(p));
        if (!e) return false;
        set.points.push_back(to_unit(e->point));
        set.values.push_back(e->accuracy);
      }
      return true;
    };
    if (!seed_set(start)) break;

    bool exhausted = false;
    while (radius >= opts.min_radius) {
      const auto best_it = std::max_element(set.values.begin(), set.values.end());
      const auto best_idx = static_cast<std::size_t>(best_it - set.values.begin());
      const Vec xk = set.points[best_idx];
      const double fk = *best_it;

      // Re-center the interpolation set at the incumbent.
      std::swap(set.points[0], set.points[best_idx]);
      std::swap(set.values[0], set.values[best_idx]);

      auto model = fit_quadratic(set.points, set.values);
      if (!model) {
        if (!seed_set(xk)) {
          exhausted = true;
          break;
        }
        continue;
      }

      const Vec lo = (xk.array() - radius).max(0.0);
      const Vec hi = (xk.array() + radius).min(1.0);
      const Vec step = maximize_quadratic_on_rect(*model, lo, hi);
      const double predicted = (*model)(step) - (*model)(xk);
      if (!(predicted > 1e-14 * (1.0 + std::abs(fk))) || (step - xk).lpNorm<Eigen::Infinity>() <= 0.0) {
        radius *= 0.5;
        continue;
      }

      const HyperPoint proposal = from_unit(step);
      if (opts.on_proposal) opts.on_proposal(proposal);
      const auto e = objective(proposal);
      if (!e) {
        exhausted = true;
        break;
      }
      const Vec u_new = to_unit(e->point);
      const double ratio = (e->accuracy - fk) / predicted;
      const bool at_boundary = (u_new - xk).lpNorm<Eigen::Infinity>() >= 0.99 * radius;
      if (ratio >= 0.75 && at_boundary) {
        radius = std::min(2.0 * radius, opts.max_radius);
      } else if (ratio < 0.25) {
        radius *= 0.5;
      }

      // Replace the farthest point that keeps the set poised.
      const Vec centre = e->accuracy > fk ? u_new : xk;
      std::vector<std::size_t> order;
      for (std::size_t i = 1; i < 6; ++i) order.push_back(i);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (set.points[a] - centre).norm() > (set.points[b] - centre).norm();
      });
      bool replaced = false;
      for (std::size_t idx : order) {
        auto trial = set.points;
        trial[idx] = u_new;
        double scale = 0.0;
        for (const auto& p : trial) scale = std::max(scale, (p - trial[0]).lpNorm<Eigen::Infinity>());
        if (scale > 0.0 && poisedness(trial, trial[0], scale) >= kMinPoisedness) {
          set.points[idx] = u_new;
          set.values[idx] = e->accuracy;
          replaced = true;
          break;
        }
      }
      if (!replaced && e->accuracy > fk) {
        // Keep the better point; the next fit fails and re-seeds around it.
        set.points[order.front()] = u_new;
        set.values[order.front()] = e->accuracy;
      }
    }
    if (exhausted) break;
    start = Vec(u01(rng), u01(rng));
  }
  return objective.result();
}

}  // namespace svmtune
