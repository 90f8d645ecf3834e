#pragma once

#include "svmtune/hyperpoint.hpp"
#include "svmtune/surface.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace svmtune {

enum class GammaMethod { sigest, skl, dbtc, sdbtc };

std::string to_string(GammaMethod m);

struct GammaEstimate {
  double gamma = 1.0;       // clipped into [2^-15, 2^3]
  double raw_gamma = 1.0;   // before clipping
  GammaMethod method = GammaMethod::skl;
  /// sigest: sampled row indices. dbtc/sdbtc: rows used per class.
  std::vector<std::size_t> sample;
  /// dbtc/sdbtc: (log2gamma, D^2) per grid point.
  std::vector<std::pair<double, double>> curve;
  /// sigest: median squared distance.
  double median_sq_distance = 0.0;
};

/// Clips gamma into the search box gamma range.
double clip_gamma(double gamma);

/// Seeded half-sample (at least 2) of 0..n-1 without replacement, ascending.
std::vector<std::size_t> sigest_sample(std::size_t n, std::uint64_t seed);

/// Median of pairwise squared distances over sigest_sample(); gamma = 1 / median.
/// Throws DataError("degenerate geometry") when the median is zero.
GammaEstimate sigest_gamma(const Eigen::MatrixXd& rows, std::uint64_t seed);

/// gamma = 1 / d.
GammaEstimate skl_gamma(std::size_t d);

/// Squared RBF feature-space distance between the two class means.
double dbtc_distance(const Eigen::MatrixXd& rows, const std::vector<int>& labels, double gamma);

/// Maximizes dbtc_distance over a grid_size-point grid of log2gamma in
/// [-15, 3] (ties to the smaller gamma). sample_fraction < 1 computes the
/// curve on a seeded per-class sample, resampling once if a class is empty.
GammaEstimate dbtc_gamma(const Eigen::MatrixXd& rows, const std::vector<int>& labels, std::size_t grid_size,
                         double sample_fraction = 1.0, std::uint64_t seed = 0);

/// Endpoint-inclusive n_c-point grid over log2C at fixed gamma; n_c = 1 probes
/// log2C = 0 only. Returns the argmax set.
std::vector<HyperPoint> fixed_gamma_c_search(SurfaceEvaluator& ev, double gamma, std::size_t n_c);

/// log2C values probed by fixed_gamma_c_search.
std::vector<double> c_grid(std::size_t n_c);

struct AsympResult {
  std::vector<HyperPoint> best;
  double log2_c_hat = 0.0;
  double feasible_lo = 0.0;
  double feasible_hi = 0.0;
  std::vector<HyperPoint> stage2;
};

/// Stage 1: n_pair-point log2C grid with a linear kernel (the evaluator ignores
/// log2gamma). Stage 2: n_pair points on log2gamma = log2C_hat - log2C across
/// the feasible log2C interval, probed on the RBF surface. log2C values of
/// both stages are rounded to multiples of 2^-36 so that log2gamma + log2C
/// equals log2C_hat exactly.
AsympResult asymp_search(SurfaceEvaluator& ev_linear, SurfaceEvaluator& ev_rbf, std::size_t n_pair);

}  // namespace svmtune
