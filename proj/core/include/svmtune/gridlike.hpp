#pragma once

#include "svmtune/hyperpoint.hpp"
#include "svmtune/surface.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace svmtune {

enum class ProbeGenerator { grid, ud, rand, normrand };

/// Predetermined probe set.
struct ProbePlan {
  std::vector<HyperPoint> points;
  ProbeGenerator generator = ProbeGenerator::grid;
  std::uint64_t seed = 0;  // unused for grid and ud
};

/// sqrt(N) x sqrt(N) lattice over `box`, endpoints included. N must be a
/// perfect square >= 4.
ProbePlan grid_points(std::size_t n, const Rect& box = kSearchBox);

/// Good-lattice-point uniform design with N >= 2 points, generator chosen to
/// minimize the centered L2 discrepancy (leave-one-out variant included).
ProbePlan ud_points(std::size_t n, const Rect& box = kSearchBox);

/// Uniform design in the unit square, before scaling.
std::vector<std::array<double, 2>> ud_unit_points(std::size_t n);

/// Squared centered L2 discrepancy of a point set in [0,1]^2.
double centered_l2_discrepancy(const std::vector<std::array<double, 2>>& unit_points);

ProbePlan rand_points(std::size_t n, std::uint64_t seed, const Rect& box = kSearchBox);

/// Raw normal draws, log2C ~ N(5, 5) and log2gamma ~ N(-5, 5), before clipping.
std::vector<HyperPoint> normrand_raw(std::size_t n, std::uint64_t seed);
/// normrand_raw clipped to the search box.
ProbePlan normrand_points(std::size_t n, std::uint64_t seed);

/// Evaluates every point in order; returns the argmax set of the log.
std::vector<HyperPoint> run_flat(SurfaceEvaluator& ev, const ProbePlan& plan);

/// Sub-box for the second level of a hierarchical search: bounded in each
/// dimension by the nearest level-1 coordinates below and above `best`, or by
/// the outer box when there is none.
Rect refinement_box(const HyperPoint& best, const std::vector<HyperPoint>& level1, const Rect& outer = kSearchBox);

/// Two-level search: a full-box plan of `n_per_level` points, then a fresh
/// plan of the same size over refinement_box() around the first-evaluated
/// level-1 maximum. Returns the argmax set over that point and the level-2
/// evaluations.
std::vector<HyperPoint> run_hier(SurfaceEvaluator& ev, ProbeGenerator generator, std::size_t n_per_level);

}  // namespace svmtune
