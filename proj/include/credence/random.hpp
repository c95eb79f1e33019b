#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace credence {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a parent seed and a stream name.
///
/// All randomness in the toolkit flows from one global seed. Each consumer
/// (bootstrap replicates, minibatch noise, benchmark replicates, ...) gets its
/// own stream via `derive_seed(seed, "name", index)`, so results do not depend
/// on the order in which streams are consumed. The mix is FNV-1a over the name
/// followed by two rounds of splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
}

} // namespace credence
