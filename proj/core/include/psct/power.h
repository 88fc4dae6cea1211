#pragma once

#include "psct/aes.h"
#include "psct/rng.h"
#include "psct/tuning.h"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace psct::power {

/// Parameters of the zero-delay peak-power model.
struct PowerModelParams {
    double v_nominal = 1.0;
    /// Data-independent load of the non-text registers and logic.
    double background_mean = 0.0;
    double background_jitter_sd = 0.0;
    /// Additive measurement noise; 0 reproduces noiseless zero-delay simulation.
    double noise_sd = 0.0;
    /// Weight of the IO-pin toggles in FPGA-style IO emulation.
    double io_leak_weight = 0.0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    friend bool operator==(const PowerModelParams&, const PowerModelParams&) = default;
};

/// Ciphertexts plus one peak-power sample per encryption.
struct TracePool {
    std::vector<aes::Bytes16> ciphertexts;
    std::vector<double> powers;
    std::string scenario_label;
    std::uint64_t master_seed = 0;
    PowerModelParams params;
    /// Stable trace identity (index in the originally generated pool). Empty
    /// means identity == position.
    std::vector<std::uint32_t> ids;

    std::size_t size() const { return powers.size(); }
    std::uint32_t id_at(std::size_t pos) const {
        return ids.empty() ? static_cast<std::uint32_t>(pos) : ids[pos];
    }

    /// Throws DataError on length mismatch, empty pool or non-finite power.
    void validate() const;

    /// Traces at the given positions, carrying their identities along.
    TracePool subset(std::span<const std::size_t> positions) const;

    friend bool operator==(const TracePool&, const TracePool&) = default;
};

using HdVector = std::array<int, aes::kBlockBytes>;

/// Bit-level toggle mask of the 128 text FFs: bit i of byte b is FF 8*b + i.
using ToggleBits = aes::Bytes16;

/// Per-register-position Hamming distance between two consecutive states.
HdVector hd_vector(const aes::AesState& prev, const aes::AesState& next);

ToggleBits toggle_bits(const aes::AesState& prev, const aes::AesState& next);

/// Peak power of one clock edge:
///
///   P = sum_toggled_ff strength(ff) * (vcc_text / v_nominal)^2
///     + io_leak_weight * sum_toggled_ff io_strength(ff)
///     + other_strength * (vcc_other / v_nominal)^2 * (background_mean + jitter + other_toggles)
///     + noise
///
/// Jitter and noise are drawn from `rng` (two normal deviates, always consumed).
double trace_power(const ToggleBits& text_toggles, const tuning::TuningAssignment& assign,
                   const PowerModelParams& params, Rng& rng, std::size_t other_toggles = 0);

/// Byte-count form: byte i toggles its hd[i] lowest bits. Throws ConfigError
/// if any element is outside 0..8.
double trace_power(const HdVector& hd, const tuning::TuningAssignment& assign,
                   const PowerModelParams& params, Rng& rng);

/// Plaintext of trace `index` of a pool generated with `master_seed`. Depends
/// on nothing else, so every scenario generated from one seed shares plaintexts.
aes::AesState pool_plaintext(std::uint64_t master_seed, std::uint64_t index);

/// Deterministic pool synthesis: one last-round power sample per encryption.
/// Results are identical for any worker count.
TracePool synthesize_pool(const aes::AesKey& key, std::size_t n_traces,
                          const tuning::TuningScenario& scenario, const PowerModelParams& params,
                          std::uint64_t master_seed, unsigned workers = 1);

/// Mean, spread and extremes of the power samples (average peak power).
struct PowerStats {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

PowerStats power_stats(std::span<const double> powers);

} // namespace psct::power
