#pragma once

#include "svmtune/hyperpoint.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svmtune {

enum class SelectionRule { minCg, mingC, meanCg, randCg, maxCg, maxgC };

inline constexpr SelectionRule kAllSelectionRules[] = {SelectionRule::minCg, SelectionRule::mingC,
                                                        SelectionRule::meanCg, SelectionRule::randCg,
                                                        SelectionRule::maxCg, SelectionRule::maxgC};

std::string to_string(SelectionRule rule);
/// Throws ConfigError for unknown names.
SelectionRule parse_selection_rule(std::string_view name);

/// Picks one pair from a non-empty tie set. meanCg averages in log2 space and
/// may return a point outside the set. randCg draws from the set sorted by
/// (log2C, log2gamma), so only the seed matters.
HyperPoint select(std::span<const HyperPoint> ties, SelectionRule rule, std::uint64_t seed = 0);

}  // namespace svmtune
