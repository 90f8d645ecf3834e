#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace svmtune {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Derives a seed from a base seed and a tag. Deterministic across runs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

/// 64-bit FNV-1a. std::hash is not stable across implementations.
std::uint64_t stable_hash(std::string_view s);

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

}  // namespace svmtune
