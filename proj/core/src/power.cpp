#include "psct/power.h"

#include "psct/error.h"
#include "psct/parallel.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace psct::power {

void PowerModelParams::validate() const {
    if (!(v_nominal > 0.0))
        throw ConfigError("v_nominal must be > 0");
    if (!(background_jitter_sd >= 0.0) || !(noise_sd >= 0.0))
        throw ConfigError("standard deviations must be >= 0");
    if (!(io_leak_weight >= 0.0))
        throw ConfigError("io_leak_weight must be >= 0");
    if (!std::isfinite(background_mean))
        throw ConfigError("background_mean must be finite");
}

void TracePool::validate() const {
    if (powers.empty())
        throw DataError("trace pool is empty");
    if (ciphertexts.size() != powers.size())
        throw DataError("trace pool has " + std::to_string(ciphertexts.size()) +
                        " ciphertexts but " + std::to_string(powers.size()) + " power samples");
    if (!ids.empty() && ids.size() != powers.size())
        throw DataError("trace pool id list has the wrong length");
    for (double p : powers)
        if (!std::isfinite(p))
            throw DataError("trace pool contains a non-finite power sample");
}

TracePool TracePool::subset(std::span<const std::size_t> positions) const {
    TracePool out;
    out.scenario_label = scenario_label;
    out.master_seed = master_seed;
    out.params = params;
    out.ciphertexts.reserve(positions.size());
    out.powers.reserve(positions.size());
    out.ids.reserve(positions.size());
    for (std::size_t p : positions) {
        out.ciphertexts.push_back(ciphertexts.at(p));
        out.powers.push_back(powers.at(p));
        out.ids.push_back(id_at(p));
    }
    return out;
}

HdVector hd_vector(const aes::AesState& prev, const aes::AesState& next) {
    HdVector hd{};
    for (std::size_t i = 0; i < aes::kBlockBytes; ++i)
        hd[i] = std::popcount(static_cast<unsigned>(prev.bytes[i] ^ next.bytes[i]));
    return hd;
}

ToggleBits toggle_bits(const aes::AesState& prev, const aes::AesState& next) {
    ToggleBits t{};
    for (std::size_t i = 0; i < aes::kBlockBytes; ++i)
        t[i] = prev.bytes[i] ^ next.bytes[i];
    return t;
}

double trace_power(const ToggleBits& text_toggles, const tuning::TuningAssignment& assign,
                   const PowerModelParams& params, Rng& rng, std::size_t other_toggles) {
    double text = 0.0;
    double io = 0.0;
    for (std::size_t b = 0; b < aes::kBlockBytes; ++b) {
        const unsigned mask = text_toggles[b];
        if (mask == 0)
            continue;
        for (std::size_t bit = 0; bit < 8; ++bit) {
            if (mask & (1u << bit)) {
                const std::size_t ff = 8 * b + bit;
                text += assign.text_strength[ff];
                io += assign.io_strength[ff];
            }
        }
    }
    const double text_scale = (assign.text_vcc / params.v_nominal) * (assign.text_vcc / params.v_nominal);
    const double other_scale = assign.other_strength * (assign.other_vcc / params.v_nominal) *
                               (assign.other_vcc / params.v_nominal);

    const double jitter = rng.normal();
    const double noise = rng.normal();

    const double background = params.background_mean + params.background_jitter_sd * jitter +
                              static_cast<double>(other_toggles);
    return text * text_scale + params.io_leak_weight * io + other_scale * background +
           params.noise_sd * noise;
}

double trace_power(const HdVector& hd, const tuning::TuningAssignment& assign,
                   const PowerModelParams& params, Rng& rng) {
    ToggleBits bits{};
    for (std::size_t b = 0; b < aes::kBlockBytes; ++b) {
        if (hd[b] < 0 || hd[b] > 8)
            throw ConfigError("hd element " + std::to_string(hd[b]) + " outside 0..8");
        bits[b] = static_cast<std::uint8_t>((1u << hd[b]) - 1u);
    }
    return trace_power(bits, assign, params, rng);
}

aes::AesState pool_plaintext(std::uint64_t master_seed, std::uint64_t index) {
    Rng rng(derive_seed(master_seed, Stream::Plaintext, {index}));
    aes::AesState pt;
    for (std::size_t i = 0; i < aes::kBlockBytes; i += 8) {
        const std::uint64_t word = rng.next_u64();
        for (std::size_t j = 0; j < 8; ++j)
            pt.bytes[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
    }
    return pt;
}

TracePool synthesize_pool(const aes::AesKey& key, std::size_t n_traces,
                          const tuning::TuningScenario& scenario, const PowerModelParams& params,
                          std::uint64_t master_seed, unsigned workers) {
    if (n_traces == 0)
        throw ConfigError("synthesize_pool needs n_traces >= 1");
    params.validate();
    scenario.validate();

    TracePool pool;
    pool.scenario_label = scenario.label;
    pool.master_seed = master_seed;
    pool.params = params;
    pool.ciphertexts.resize(n_traces);
    pool.powers.resize(n_traces);

    parallel_for(n_traces, workers, [&](std::size_t i) {
        const auto trace = aes::encrypt_block(key, pool_plaintext(master_seed, i));
        Rng tune_rng(derive_seed(master_seed, Stream::Tuning, {i}));
        Rng noise_rng(derive_seed(master_seed, Stream::Noise, {i}));
        const auto assign = tuning::sample_assignment(scenario, tune_rng);
        pool.powers[i] = trace_power(toggle_bits(trace.before_last_round(), trace.ciphertext()),
                                     assign, params, noise_rng);
        pool.ciphertexts[i] = trace.ciphertext().bytes;
    });
    return pool;
}

PowerStats power_stats(std::span<const double> powers) {
    PowerStats s;
    if (powers.empty())
        return s;
    double sum = 0.0;
    s.min = powers[0];
    s.max = powers[0];
    for (double p : powers) {
        sum += p;
        s.min = std::min(s.min, p);
        s.max = std::max(s.max, p);
    }
    s.mean = sum / static_cast<double>(powers.size());
    double ss = 0.0;
    for (double p : powers)
        ss += (p - s.mean) * (p - s.mean);
    s.sd = powers.size() > 1 ? std::sqrt(ss / static_cast<double>(powers.size() - 1)) : 0.0;
    return s;
}

} // namespace psct::power
