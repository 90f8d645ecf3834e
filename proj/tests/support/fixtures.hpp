#pragma once

#include "svmtune/dataset.hpp"
#include "svmtune/hyperpoint.hpp"
#include "svmtune/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace svmtune::fixtures {

// Two Gaussian classes with unit covariance, means `separation` apart along
// the first axis. Balanced labels, interleaved.
inline Dataset make_blobs(std::size_t n, std::size_t d, double separation, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    ds.labels[i] = y;
    for (std::size_t j = 0; j < d; ++j) ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z(rng);
    ds.features(static_cast<Eigen::Index>(i), 0) += (y == 1 ? 0.5 : -0.5) * separation;
  }
  ds.feature_means.assign(d, 0.0);
  ds.feature_sds.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

// Separation giving Bayes accuracy ~0.95 for unit-variance blobs.
inline constexpr double kBayes95Separation = 2.0 * 1.6448536269514722;

inline double concave_surrogate(const HyperPoint& p) {
  const double dc = p.log2C - 5.0;
  const double dg = p.log2gamma + 5.0;
  return -(dc * dc + dg * dg) / 100.0;
}

inline void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  for (std::size_t j = 0; j < ds.dims(); ++j) out << ds.feature_names[j] << ',';
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) out << ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << ',';
    out << (ds.labels[i] ? "pos" : "neg") << '\n';
  }
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("svmtune-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Projected-gradient (FISTA) solution of the SVM dual, with the projection
// onto {0 <= a <= C, y'a = 0} found by bisection on the multiplier.
inline Eigen::VectorXd dual_oracle(const Eigen::MatrixXd& gram, const std::vector<int>& y_pm, double c,
                                   int iterations = 50000) {
  const auto n = gram.rows();
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y_pm[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd q = yv.asDiagonal() * gram * yv.asDiagonal();
  const double lip = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff());

  const auto project = [&](const Eigen::VectorXd& v) {
    const auto at = [&](double lam) { return (v - lam * yv).cwiseMax(0.0).cwiseMin(c).eval(); };
    double lo = -1e6;
    double hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (yv.dot(at(mid)) > 0.0) lo = mid; else hi = mid;
    }
    return at(0.5 * (lo + hi));
  };

  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = q * z - Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd next = project(z - grad / lip);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - a);
    a = next;
    t = t_next;
  }
  return a;
}

}  // namespace svmtune::fixtures
