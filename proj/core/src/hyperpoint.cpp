#include "svmtune/hyperpoint.hpp"

#include <cmath>

namespace svmtune {

double HyperPoint::C() const { return std::exp2(log2C); }
double HyperPoint::gamma() const { return std::exp2(log2gamma); }

std::ostream& operator<<(std::ostream& os, const HyperPoint& p) {
  return os << "(" << p.log2C << ", " << p.log2gamma << ")";
}

PointKey quantize(const HyperPoint& p) {
  return {std::llround(p.log2C * 1e9), std::llround(p.log2gamma * 1e9)};
}

double log2_distance(const HyperPoint& a, const HyperPoint& b) {
  return std::hypot(a.log2C - b.log2C, a.log2gamma - b.log2gamma);
}

}  // namespace svmtune
