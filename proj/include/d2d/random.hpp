#pragma once

#include <cstdint>
#include <random>

namespace d2d {

/// One stream per drop. The engine is fully specified by the standard, so a
/// given seed reproduces the same drop on every run of the same build.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace d2d
