#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace psct {

/// Named substreams. Every random quantity in the toolkit is drawn from a
/// stream keyed by (master seed, stream tag, counters), so results never
/// depend on thread scheduling or on how many values other streams consumed.
enum class Stream : std::uint64_t {
    Plaintext = 1,
    Tuning = 2,
    Noise = 3,
    Trial = 4,
    AutoStart = 5,
    Campaign = 6,
    Test = 99,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed, a stream tag and any number of counters.
std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                          std::initializer_list<std::uint64_t> counters = {});

/// Seeded random stream with portable, bit-reproducible distributions.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// distributions are implemented here because the std:: ones are
/// implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, one output per call, two uniforms consumed).
    double normal();

private:
    std::mt19937_64 engine_;
};

} // namespace psct
