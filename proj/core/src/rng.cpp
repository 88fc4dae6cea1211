#include "psct/rng.h"

#include <cmath>
#include <numbers>

namespace psct {

std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::initializer_list<std::uint64_t> counters) {
    std::uint64_t h = mix64(master ^ mix64(static_cast<std::uint64_t>(stream)));
    for (std::uint64_t c : counters)
        h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    return h;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    // Rejection sampling on the top of the range; unbiased.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double Rng::normal() {
    const double u1 = 1.0 - uniform01(); // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace psct
