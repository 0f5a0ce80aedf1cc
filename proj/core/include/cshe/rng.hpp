#ifndef CSHE_RNG_HPP
#define CSHE_RNG_HPP

#include <cstdint>

namespace cshe {

// Counter-based random numbers: every draw is a pure function of
// (seed, a, b, c), so parallel samplers need no shared state and a
// stream can be replayed from any index.
namespace rng {

// 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix(std::uint64_t x);

// Keyed counter hash.
std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Uniform draw in (0,1].
double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Standard normal draw indexed by (seed, a, b, c), Box-Muller on two
// keyed uniforms.
double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Derives an independent sub-seed (e.g. one per path).
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

} // namespace rng
} // namespace cshe

#endif
