#include "svmtune/svm.hpp"

#include "svmtune/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace svmtune {

KernelSpec KernelSpec::rbf(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("rbf gamma must be positive");
  return {Kind::rbf, gamma};
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("kernel_eval: dimension mismatch");
  if (spec.kind == KernelSpec::Kind::linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-spec.gamma * d2);
}

std::size_t default_max_iterations(std::size_t n) {
  const std::size_t quadratic = 10 * n * n;
  return std::min<std::size_t>(std::max<std::size_t>(quadratic, 10'000), 1'000'000);
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return d;
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec) {
  if (a.cols() != b.cols()) throw ConfigError("cross_kernel: dimension mismatch");
  if (spec.kind == KernelSpec::Kind::linear) return a * b.transpose();
  return (-spec.gamma * squared_distances(a, b).array()).exp().matrix();
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec) {
  Eigen::MatrixXd k = cross_kernel(x, x, spec);
  // exact symmetry regardless of summation order
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
  }
  return k;
}

DenseKernelRows::DenseKernelRows(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols()) throw ConfigError("Gram matrix must be square");
}

std::span<const double> DenseKernelRows::row(std::size_t i) {
  return {gram_.col(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(gram_.rows())};
}

double DenseKernelRows::diag(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  return gram_(k, k);
}

struct OnDemandKernelRows::Impl {
  const Eigen::MatrixXd& x;
  KernelSpec spec;
  std::size_t capacity;
  std::vector<double> diagonal;
  std::list<std::size_t> lru;  // front = most recent
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> rows;

  Impl(const Eigen::MatrixXd& data, KernelSpec s, std::size_t cap) : x(data), spec(s), capacity(std::max<std::size_t>(cap, 2)) {
    diagonal.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      diagonal[static_cast<std::size_t>(i)] =
          spec.kind == KernelSpec::Kind::linear ? x.row(i).squaredNorm() : 1.0;
    }
  }

  std::span<const double> get(std::size_t i) {
    if (auto it = rows.find(i); it != rows.end()) {
      lru.splice(lru.begin(), lru, it->second.second);
      return it->second.first;
    }
    if (rows.size() >= capacity) {
      rows.erase(lru.back());
      lru.pop_back();
    }
    std::vector<double> values(static_cast<std::size_t>(x.rows()));
    const auto xi = x.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (spec.kind == KernelSpec::Kind::linear) {
        values[static_cast<std::size_t>(j)] = xi.dot(x.row(j));
      } else {
        values[static_cast<std::size_t>(j)] = std::exp(-spec.gamma * (xi - x.row(j)).squaredNorm());
      }
    }
    lru.push_front(i);
    auto& slot = rows[i];
    slot.first = std::move(values);
    slot.second = lru.begin();
    return slot.first;
  }
};

OnDemandKernelRows::OnDemandKernelRows(const Eigen::MatrixXd& x, KernelSpec spec, std::size_t cache_rows)
    : impl_(std::make_unique<Impl>(x, spec, cache_rows)) {}
OnDemandKernelRows::~OnDemandKernelRows() = default;
std::size_t OnDemandKernelRows::size() const { return static_cast<std::size_t>(impl_->x.rows()); }
std::span<const double> OnDemandKernelRows::row(std::size_t i) { return impl_->get(i); }
double OnDemandKernelRows::diag(std::size_t i) const { return impl_->diagonal[i]; }

DualSolution solve_dual(KernelRows& kernel, std::span<const int> y, const TrainConfig& cfg) {
  const std::size_t n = kernel.size();
  if (y.size() != n) throw ConfigError("solve_dual: label count does not match kernel size");
  if (!(cfg.C > 0.0) || !std::isfinite(cfg.C)) throw ConfigError("C must be positive and finite");
  if (!(cfg.kkt_tolerance > 0.0)) throw ConfigError("kkt_tolerance must be positive");
  const bool has_pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool has_neg = std::find(y.begin(), y.end(), -1) != y.end();
  if (!has_pos || !has_neg) throw DataError("training rows must contain both classes");

  constexpr double kTau = 1e-12;
  const double C = cfg.C;
  const double eps = cfg.kkt_tolerance;
  const std::size_t max_iter = cfg.max_iterations ? cfg.max_iterations : default_max_iterations(n);

  DualSolution sol;
  Eigen::VectorXd& alpha = sol.alpha;
  alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<double> grad(n, -1.0);
  std::vector<double> row_i(n);

  const auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
  const auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

  std::size_t iter = 0;
  for (;;) {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i == n || j == n || m_up - m_low < eps) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    const auto ki = kernel.row(i);
    std::copy(ki.begin(), ki.end(), row_i.begin());
    const auto kj = kernel.row(j);
    const double kii = kernel.diag(i);
    const double kjj = kernel.diag(j);
    const double kij = row_i[j];

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double ai = old_ai;
    double aj = old_aj;
    if (y[i] != y[j]) {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      double quad = kii + kjj - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    alpha[i] = ai;
    alpha[j] = aj;

    const double dai = (ai - old_ai) * y[i];
    const double daj = (aj - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (row_i[t] * dai + kj[t] * daj);
  }
  sol.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  sol.bias = -rho;
  return sol;
}

double dual_objective(const Eigen::MatrixXd& gram, std::span<const int> y, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd ya(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) ya[i] = y[static_cast<std::size_t>(i)] * alpha[i];
  return 0.5 * ya.dot(gram * ya) - alpha.sum();
}

std::vector<int> to_signed_labels(std::span<const int> labels01) {
  std::vector<int> y;
  y.reserve(labels01.size());
  for (int l : labels01) y.push_back(l == 1 ? 1 : -1);
  return y;
}

SvmModel make_model(const Eigen::MatrixXd& x, std::span<const int> y_pm, const DualSolution& sol,
                    const KernelSpec& kernel) {
  SvmModel model;
  model.kernel = kernel;
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha[i] > 0.0) {
      model.support_indices.push_back(static_cast<std::size_t>(i));
      model.dual_coefs.push_back(y_pm[static_cast<std::size_t>(i)] * sol.alpha[i]);
    }
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(model.support_indices.size()), x.cols());
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(static_cast<Eigen::Index>(model.support_indices[s]));
  }
  return model;
}

SvmModel train(const Eigen::MatrixXd& x, std::span<const int> labels, const TrainConfig& cfg,
               const KernelSpec& kernel) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ConfigError("train: row/label count mismatch");
  const auto y = to_signed_labels(labels);
  DualSolution sol;
  if (static_cast<std::size_t>(x.rows()) <= kDenseGramLimit) {
    DenseKernelRows rows(gram_matrix(x, kernel));
    sol = solve_dual(rows, y, cfg);
  } else {
    OnDemandKernelRows rows(x, kernel);
    sol = solve_dual(rows, y, cfg);
  }
  return make_model(x, y, sol, kernel);
}

double SvmModel::decision_value(std::span<const double> x) const {
  if (x.size() != dims()) throw ConfigError("predict: dimension mismatch");
  double f = bias;
  for (std::size_t s = 0; s < dual_coefs.size(); ++s) {
    const auto sv = support_vectors.row(static_cast<Eigen::Index>(s));
    double k = 0.0;
    if (kernel.kind == KernelSpec::Kind::linear) {
      for (std::size_t d = 0; d < x.size(); ++d) k += sv[static_cast<Eigen::Index>(d)] * x[d];
    } else {
      double d2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double diff = sv[static_cast<Eigen::Index>(d)] - x[d];
        d2 += diff * diff;
      }
      k = std::exp(-kernel.gamma * d2);
    }
    f += dual_coefs[s] * k;
  }
  return f;
}

int SvmModel::predict(std::span<const double> x) const { return decision_value(x) > 0.0 ? 1 : 0; }

double accuracy(const SvmModel& model, const Eigen::MatrixXd& x, std::span<const int> labels) {
  if (x.rows() == 0) throw ConfigError("accuracy: empty test set");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ConfigError("accuracy: row/label count mismatch");
  std::vector<double> buf(static_cast<std::size_t>(x.cols()));
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) buf[static_cast<std::size_t>(c)] = x(r, c);
    if (model.predict(buf) == labels[static_cast<std::size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

}  // namespace svmtune
