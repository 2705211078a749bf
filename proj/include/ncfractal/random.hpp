#pragma once

// Seeded samplers for property checks and brute-force oracles. All of them
// take the generator explicitly so that concurrent callers stay deterministic.

#include <cstdint>
#include <random>

#include "ncfractal/algebra.hpp"

namespace ncfractal {

using Rng = std::mt19937_64;

/// Self-adjoint element with independent standard normal coordinates.
Element random_self_adjoint(const Algebra& alg, Rng& rng);

/// Block-diagonal Haar-ish unitary (QR of a Ginibre matrix per block).
Element random_unitary(const Algebra& alg, Rng& rng);

/// Density of the form G G* / trace, G Ginibre per block, mixed with random
/// block weights. With `rank_one` each block gets a rank-one G.
State random_state(const Algebra& alg, Rng& rng, bool rank_one = false);

/// Random projection: per block, the span of a random number of random vectors.
Projection random_projection(const Algebra& alg, Rng& rng);

}  // namespace ncfractal
