#include "cshe/rng.hpp"

#include <cmath>

namespace cshe {
namespace rng {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix(seed ^ 0x2545f4914f6cdd1dULL);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return h;
}

double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    const std::uint64_t h = hash(seed, a, b, c);
    // 53 significant bits, shifted into (0,1].
    return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    const double u1 = uniform(seed, a, b, 2 * c);
    const double u2 = uniform(seed, a, b, 2 * c + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    return hash(seed, 0x70617468ULL, index, 0);
}

} // namespace rng
} // namespace cshe
