// Hand-rolled generators for property tests.
#pragma once

#include "psct/aes.h"
#include "psct/rng.h"

#include <cstdint>
#include <vector>

namespace psct::testkit {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(derive_seed(seed, Stream::Test)) {}

    std::uint64_t u64() { return rng_.next_u64(); }
    std::uint8_t byte() { return static_cast<std::uint8_t>(rng_.next_u64()); }
    std::size_t index(std::size_t bound) { return static_cast<std::size_t>(rng_.uniform_index(bound)); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
    double unit() { return rng_.uniform01(); }
    double normal() { return rng_.normal(); }

    aes::Bytes16 block() {
        aes::Bytes16 b{};
        for (auto& x : b)
            x = byte();
        return b;
    }
    aes::AesKey key() { return aes::AesKey{block()}; }
    aes::AesState state() { return aes::AesState{block()}; }

    std::vector<double> normals(std::size_t n, double scale = 1.0, double offset = 0.0) {
        std::vector<double> v(n);
        for (auto& x : v)
            x = offset + scale * normal();
        return v;
    }

    /// y = rho * x + noise, so the pair has a known nonzero correlation.
    std::vector<double> correlated(const std::vector<double>& x, double rho) {
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = rho * x[i] + normal();
        return y;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[index(i)]);
    }

private:
    Rng rng_;
};

} // namespace psct::testkit
