#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>

namespace svmtune {

/// A candidate (log2 C, log2 gamma) pair.
struct HyperPoint {
  double log2C = 0.0;
  double log2gamma = 0.0;

  double C() const;
  double gamma() const;

  friend bool operator==(const HyperPoint&, const HyperPoint&) = default;
  friend auto operator<=>(const HyperPoint&, const HyperPoint&) = default;
};

std::ostream& operator<<(std::ostream& os, const HyperPoint& p);

/// Axis-aligned rectangle in log2 space.
struct Rect {
  double c_lo;
  double c_hi;
  double g_lo;
  double g_hi;

  double c_side() const { return c_hi - c_lo; }
  double g_side() const { return g_hi - g_lo; }
  HyperPoint center() const { return {0.5 * (c_lo + c_hi), 0.5 * (g_lo + g_hi)}; }
  bool contains(const HyperPoint& p) const {
    return p.log2C >= c_lo && p.log2C <= c_hi && p.log2gamma >= g_lo && p.log2gamma <= g_hi;
  }
  HyperPoint clamp(const HyperPoint& p) const {
    return {std::clamp(p.log2C, c_lo, c_hi), std::clamp(p.log2gamma, g_lo, g_hi)};
  }
  /// Maps unit-square coordinates into the rectangle.
  HyperPoint from_unit(double u, double v) const {
    return {c_lo + u * c_side(), g_lo + v * g_side()};
  }
};

/// The fixed search box: 2^-5 <= C <= 2^15, 2^-15 <= gamma <= 2^3.
inline constexpr Rect kSearchBox{-5.0, 15.0, -15.0, 3.0};

inline bool in_search_box(const HyperPoint& p) { return kSearchBox.contains(p); }

/// Cache key quantizing both coordinates to 1e-9 in log2 units.
struct PointKey {
  std::int64_t c;
  std::int64_t g;
  friend bool operator==(const PointKey&, const PointKey&) = default;
  friend auto operator<=>(const PointKey&, const PointKey&) = default;
};

PointKey quantize(const HyperPoint& p);

double log2_distance(const HyperPoint& a, const HyperPoint& b);

}  // namespace svmtune
