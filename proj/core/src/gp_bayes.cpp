#include "svmtune/gridlike.hpp"
#include "svmtune/optimizers.hpp"

#include "optimizer_support.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace svmtune {
namespace {

using Vec = Eigen::Vector2d;

Vec to_unit(const HyperPoint& p) {
  return {(p.log2C - kSearchBox.c_lo) / kSearchBox.c_side(), (p.log2gamma - kSearchBox.g_lo) / kSearchBox.g_side()};
}

HyperPoint from_unit(const Vec& u) {
  return kSearchBox.clamp(kSearchBox.from_unit(std::clamp(u[0], 0.0, 1.0), std::clamp(u[1], 0.0, 1.0)));
}

double se_kernel(const Vec& a, const Vec& b, const GpHyper& h) {
  const double dc = (a[0] - b[0]) / h.length_c;
  const double dg = (a[1] - b[1]) / h.length_g;
  return h.signal_var * std::exp(-0.5 * (dc * dc + dg * dg));
}

// Cholesky with escalating jitter. Returns the jitter used.
double robust_cholesky(const Eigen::MatrixXd& k, const GpHyper& h, Eigen::MatrixXd& out) {
  double jitter = 0.0;
  const double cap = 1e-2 * h.signal_var;
  for (;;) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += h.noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      out = llt.matrixL();
      return jitter;
    }
    jitter = jitter == 0.0 ? 1e-10 * h.signal_var : jitter * 10.0;
    if (jitter > cap) throw NumericalError("ill-conditioned surrogate");
  }
}

// Lattice posterior kept in sync with a GpSurrogate: V = L^-1 K(X, lattice)
// grows by one row per observation, so per-step cost is O(n M) instead of
// O(n^2 M).
class LatticePosterior {
 public:
  LatticePosterior(std::vector<Vec> lattice) : lattice_(std::move(lattice)) {}

  void rebuild(const GpSurrogate& gp) {
    const auto n = static_cast<Eigen::Index>(gp.size());
    const auto m = static_cast<Eigen::Index>(lattice_.size());
    Eigen::MatrixXd kx(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) kx(i, j) = gp.kernel(gp.inputs()[static_cast<std::size_t>(i)], lattice_[static_cast<std::size_t>(j)]);
    }
    v_ = gp.factor().triangularView<Eigen::Lower>().solve(kx);
    colsq_ = v_.colwise().squaredNorm().transpose();
    generation_ = gp.generation();
  }

  // Call after gp.add(); rebuilds if the factor was recomputed.
  void sync(const GpSurrogate& gp) {
    if (gp.generation() != generation_ || static_cast<std::size_t>(v_.rows()) + 1 != gp.size()) {
      rebuild(gp);
      return;
    }
    const auto n = static_cast<Eigen::Index>(gp.size());
    const auto& l = gp.factor();
    const Eigen::RowVectorXd lrow = l.row(n - 1).head(n - 1);
    const double d = l(n - 1, n - 1);
    const Vec& xn = gp.inputs().back();
    Eigen::RowVectorXd knew(static_cast<Eigen::Index>(lattice_.size()));
    for (std::size_t j = 0; j < lattice_.size(); ++j) knew[static_cast<Eigen::Index>(j)] = gp.kernel(xn, lattice_[j]);
    const Eigen::RowVectorXd row = (knew - lrow * v_) / d;
    v_.conservativeResize(n, Eigen::NoChange);
    v_.row(n - 1) = row;
    colsq_ += row.transpose().cwiseAbs2();
  }

  void predict(const GpSurrogate& gp, Eigen::VectorXd& mean, Eigen::VectorXd& var) const {
    mean = (v_.transpose() * gp.whitened_targets()).array() + gp.prior_mean();
    var = (gp.hyper().signal_var - colsq_.array()).max(0.0);
  }

  const std::vector<Vec>& points() const { return lattice_; }

 private:
  std::vector<Vec> lattice_;
  Eigen::MatrixXd v_;
  Eigen::VectorXd colsq_;
  std::size_t generation_ = static_cast<std::size_t>(-1);
};

}  // namespace

GpSurrogate::GpSurrogate(std::vector<Eigen::Vector2d> inputs, std::vector<double> targets, GpHyper hyper, double prior_mean)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(hyper), prior_mean_(prior_mean) {
  if (inputs_.size() != targets_.size()) throw ConfigError("GpSurrogate: inputs and targets differ in length");
  if (inputs_.empty()) throw ConfigError("GpSurrogate: no observations");
  factorize();
}

double GpSurrogate::kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const { return se_kernel(a, b, hyper_); }

void GpSurrogate::factorize() {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel(inputs_[static_cast<std::size_t>(i)], inputs_[static_cast<std::size_t>(j)]);
    }
  }
  jitter_ = robust_cholesky(k, hyper_, chol_);
  ++generation_;
  refresh_targets();
}

void GpSurrogate::refresh_targets() {
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets_.size()));
  for (std::size_t i = 0; i < targets_.size(); ++i) y[static_cast<Eigen::Index>(i)] = targets_[i] - prior_mean_;
  white_ = chol_.triangularView<Eigen::Lower>().solve(y);
}

void GpSurrogate::add(const Eigen::Vector2d& u, double y) {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd kvec(n);
  for (Eigen::Index i = 0; i < n; ++i) kvec[i] = kernel(inputs_[static_cast<std::size_t>(i)], u);
  const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(kvec);
  const double d2 = hyper_.signal_var + hyper_.noise_var + jitter_ - l.squaredNorm();
  inputs_.push_back(u);
  targets_.push_back(y);
  if (d2 <= 1e-12 * hyper_.signal_var) {
    factorize();
    return;
  }
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 1, n + 1);
  grown.topLeftCorner(n, n) = chol_;
  grown.block(n, 0, 1, n) = l.transpose();
  grown(n, n) = std::sqrt(d2);
  chol_ = std::move(grown);
  refresh_targets();
}

GpPrediction GpSurrogate::predict(const Eigen::Vector2d& u) const {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd kvec(n);
  for (Eigen::Index i = 0; i < n; ++i) kvec[i] = kernel(inputs_[static_cast<std::size_t>(i)], u);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kvec);
  return {prior_mean_ + v.dot(white_), std::max(0.0, hyper_.signal_var - v.squaredNorm())};
}

double gp_negative_log_likelihood(const std::vector<Eigen::Vector2d>& inputs, const std::vector<double>& targets,
                                  const GpHyper& hyper) {
  const auto n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = se_kernel(inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(j)], hyper);
    }
  }
  k.diagonal().array() += hyper.noise_var;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  const Eigen::VectorXd w = llt.matrixL().solve(y);
  const Eigen::MatrixXd l = llt.matrixL();
  return 0.5 * w.squaredNorm() + l.diagonal().array().log().sum() +
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpHyper fit_gp_hyperparameters(const std::vector<Eigen::Vector2d>& inputs, const std::vector<double>& targets, Rng& rng) {
  // log-parameter box: lengths [1e-2, 10], signal [1e-2, 1e2], noise [1e-8, 1]
  const Eigen::Vector4d lo(std::log(1e-2), std::log(1e-2), std::log(1e-2), std::log(1e-8));
  const Eigen::Vector4d hi(std::log(10.0), std::log(10.0), std::log(1e2), std::log(1.0));
  const auto unpack = [&](const Eigen::VectorXd& t) {
    Eigen::Vector4d c = t.cwiseMax(lo).cwiseMin(hi);
    return GpHyper{std::exp(c[0]), std::exp(c[1]), std::exp(c[2]), std::exp(c[3])};
  };
  const auto objective = [&](const Eigen::VectorXd& t) {
    Eigen::Vector4d c = t;
    const double outside = (c - c.cwiseMax(lo).cwiseMin(hi)).squaredNorm();
    return gp_negative_log_likelihood(inputs, targets, unpack(t)) + 1e3 * outside;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::Vector4d(std::log(0.2), std::log(0.2), 0.0, std::log(1e-4)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int r = 0; r < 2; ++r) {
    Eigen::Vector4d s;
    for (int d = 0; d < 4; ++d) s[d] = lo[d] + u01(rng) * (hi[d] - lo[d]);
    starts.push_back(s);
  }
  Eigen::VectorXd best = starts.front();
  double best_val = objective(best);
  for (const auto& s : starts) {
    const Eigen::VectorXd t = detail::minimize_simplex(objective, s, 0.5, 200);
    const double v = objective(t);
    if (v < best_val) {
      best_val = v;
      best = t;
    }
  }
  return unpack(best);
}

double expected_improvement(double mean, double sigma, double best, double xi) {
  const double gain = mean - best - xi;
  if (!(sigma > 0.0)) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(0.0, gain * cdf + sigma * pdf);
}

std::vector<HyperPoint> gp_bayes_opt(SurfaceEvaluator& ev, const OptimizerConfig& cfg, const BayesOptOptions& opts) {
  const std::size_t init = opts.init_design ? opts.init_design : std::max<std::size_t>(5, cfg.budget / 10);
  if (cfg.budget < init + 1) throw ConfigError("gp_bayes_opt needs a budget of at least init_design + 1");
  if (opts.lattice_side < 2) throw ConfigError("gp_bayes_opt: lattice side must be at least 2");
  detail::BudgetedObjective objective(ev, cfg.budget);
  Rng rng = make_rng(cfg.seed);

  // distinct observations in unit coordinates
  std::vector<Vec> xs;
  std::vector<double> ys;
  std::map<PointKey, bool> seen;
  const auto record = [&](const Evaluation& e) {
    if (!seen.emplace(quantize(e.point), true).second) return false;
    xs.push_back(to_unit(e.point));
    ys.push_back(e.accuracy);
    return true;
  };

  for (const auto& p : ud_points(init).points) {
    const auto e = objective(p);
    if (!e) return objective.result();
    record(*e);
  }

  std::vector<Vec> lattice;
  const std::size_t side = opts.lattice_side;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      lattice.emplace_back(static_cast<double>(i) / static_cast<double>(side - 1),
                           static_cast<double>(j) / static_cast<double>(side - 1));
    }
  }
  LatticePosterior posterior(std::move(lattice));

  std::optional<GpSurrogate> gp;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::size_t fitted_at = 0;
  const auto standardized = [&](double y) { return (y - y_mean) / y_scale; };

  const auto refit = [&] {
    y_mean = 0.0;
    for (double y : ys) y_mean += y;
    y_mean /= static_cast<double>(ys.size());
    double ss = 0.0;
    for (double y : ys) ss += (y - y_mean) * (y - y_mean);
    y_scale = ys.size() > 1 ? std::sqrt(ss / static_cast<double>(ys.size() - 1)) : 0.0;
    if (!(y_scale > 0.0)) y_scale = 1.0;

    std::vector<double> z;
    for (double y : ys) z.push_back(standardized(y));
    // hyperparameters from an evenly strided subset when there are many points
    std::vector<Vec> fit_x;
    std::vector<double> fit_z;
    const std::size_t stride = (xs.size() + opts.max_fit_points - 1) / opts.max_fit_points;
    for (std::size_t i = 0; i < xs.size(); i += std::max<std::size_t>(stride, 1)) {
      fit_x.push_back(xs[i]);
      fit_z.push_back(z[i]);
    }
    const GpHyper hyper = fit_gp_hyperparameters(fit_x, fit_z, rng);
    gp.emplace(xs, z, hyper, 0.0);
    posterior.rebuild(*gp);
    fitted_at = xs.size();
  };
  refit();

  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  while (!objective.exhausted()) {
    posterior.predict(*gp, mean, var);
    const double best = standardized(*std::max_element(ys.begin(), ys.end()));

    Eigen::Index best_idx = 0;
    double best_ei = -1.0;
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      const double ei = expected_improvement(mean[j], std::sqrt(var[j]), best, opts.xi);
      if (ei > best_ei) {
        best_ei = ei;
        best_idx = j;
      }
    }

    // local polish: compass search on EI from the best lattice point
    Vec u = posterior.points()[static_cast<std::size_t>(best_idx)];
    const auto ei_at = [&](const Vec& x) {
      const auto pr = gp->predict(x);
      return expected_improvement(pr.mean, std::sqrt(pr.variance), best, opts.xi);
    };
    double step = 0.5 / static_cast<double>(side - 1);
    for (std::size_t s = 0; s < opts.polish_steps; ++s) {
      bool moved = false;
      for (const Vec& dir : {Vec(1, 0), Vec(-1, 0), Vec(0, 1), Vec(0, -1)}) {
        const Vec cand = (u + step * dir).cwiseMax(0.0).cwiseMin(1.0);
        const double ei = ei_at(cand);
        if (ei > best_ei) {
          best_ei = ei;
          u = cand;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }

    const auto e = objective(from_unit(u));
    if (!e) break;
    if (record(*e)) {
      if (static_cast<double>(xs.size()) >= opts.refit_growth * static_cast<double>(fitted_at)) {
        refit();
      } else {
        gp->add(xs.back(), standardized(ys.back()));
        posterior.sync(*gp);
      }
    }
  }
  return objective.result();
}

}  // namespace svmtune
