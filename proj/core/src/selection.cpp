#include "svmtune/selection.hpp"

#include "svmtune/error.hpp"
#include "svmtune/random.hpp"

#include <algorithm>

namespace svmtune {

std::string to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::minCg: return "minCg";
    case SelectionRule::mingC: return "mingC";
    case SelectionRule::meanCg: return "meanCg";
    case SelectionRule::randCg: return "randCg";
    case SelectionRule::maxCg: return "maxCg";
    case SelectionRule::maxgC: return "maxgC";
  }
  return "unknown";
}

SelectionRule parse_selection_rule(std::string_view name) {
  for (SelectionRule r : kAllSelectionRules) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown selection rule: " + std::string(name));
}

HyperPoint select(std::span<const HyperPoint> ties, SelectionRule rule, std::uint64_t seed) {
  if (ties.empty()) throw ConfigError("empty tie set");
  const auto cg = [](const HyperPoint& a, const HyperPoint& b) {
    return a.log2C != b.log2C ? a.log2C < b.log2C : a.log2gamma < b.log2gamma;
  };
  const auto gc = [](const HyperPoint& a, const HyperPoint& b) {
    return a.log2gamma != b.log2gamma ? a.log2gamma < b.log2gamma : a.log2C < b.log2C;
  };
  switch (rule) {
    case SelectionRule::minCg: return *std::min_element(ties.begin(), ties.end(), cg);
    case SelectionRule::mingC: return *std::min_element(ties.begin(), ties.end(), gc);
    // maxCg: maximal C, then maximal gamma among those
    case SelectionRule::maxCg: return *std::max_element(ties.begin(), ties.end(), cg);
    case SelectionRule::maxgC: return *std::max_element(ties.begin(), ties.end(), gc);
    case SelectionRule::meanCg: {
      double c = 0.0;
      double g = 0.0;
      for (const auto& p : ties) {
        c += p.log2C;
        g += p.log2gamma;
      }
      const auto n = static_cast<double>(ties.size());
      return {c / n, g / n};
    }
    case SelectionRule::randCg: {
      std::vector<HyperPoint> sorted(ties.begin(), ties.end());
      std::sort(sorted.begin(), sorted.end(), cg);
      Rng rng = make_rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
      return sorted[pick(rng)];
    }
  }
  throw ConfigError("unknown selection rule");
}

}  // namespace svmtune
