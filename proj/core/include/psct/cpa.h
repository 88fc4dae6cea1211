#pragma once

#include "psct/aes.h"
#include "psct/power.h"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace psct::cpa {

inline constexpr std::size_t kGuesses = 256;
inline constexpr std::size_t kBytes = aes::kBlockBytes;
inline constexpr double kDefaultOutlierThreshold = 4.0;

/// Hypothetical HD power for the last-round register transition.
///
/// For ciphertext position b and key guess k the modeled register is the one
/// at aes::last_round_source(b): it switches from InvSBox(ct[b] ^ k) to the
/// ciphertext byte stored in that same register.
std::uint8_t hypothesis(const aes::Bytes16& ciphertext, std::size_t byte_index, std::uint8_t guess);

/// Per byte, per guess, per trace hypothesis values (0..8).
class HypothesisMatrix {
public:
    HypothesisMatrix() = default;
    explicit HypothesisMatrix(std::size_t n_traces);

    std::size_t n_traces() const { return n_traces_; }

    std::uint8_t at(std::size_t byte, std::size_t guess, std::size_t trace) const {
        return values_[(byte * kGuesses + guess) * n_traces_ + trace];
    }
    std::uint8_t& at(std::size_t byte, std::size_t guess, std::size_t trace) {
        return values_[(byte * kGuesses + guess) * n_traces_ + trace];
    }

    /// All traces for one (byte, guess) pair.
    std::span<const std::uint8_t> row(std::size_t byte, std::size_t guess) const {
        return {values_.data() + (byte * kGuesses + guess) * n_traces_, n_traces_};
    }
    std::span<std::uint8_t> row(std::size_t byte, std::size_t guess) {
        return {values_.data() + (byte * kGuesses + guess) * n_traces_, n_traces_};
    }

    HypothesisMatrix subset(std::span<const std::size_t> traces) const;

private:
    std::size_t n_traces_ = 0;
    std::vector<std::uint8_t> values_;
};

/// Throws DataError when ciphertexts is empty.
HypothesisMatrix build_hypotheses(std::span<const aes::Bytes16> ciphertexts);

struct PearsonResult {
    double value = 0.0;
    /// Set when either input has zero variance (value is then 0).
    bool degenerate = false;
};

/// Two-pass Pearson correlation. Throws ConfigError on length mismatch or N < 2.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Single-pass Pearson accumulator (Welford co-moment updates).
class StreamingPearson {
public:
    void add(double x, double y);
    std::size_t count() const { return n_; }
    PearsonResult result() const;

private:
    std::size_t n_ = 0;
    double mean_x_ = 0.0;
    double mean_y_ = 0.0;
    double m2_x_ = 0.0;
    double m2_y_ = 0.0;
    double c_xy_ = 0.0;
};

using PccGrid = std::array<std::array<double, kGuesses>, kBytes>;

struct CpaResult {
    PccGrid pcc{};
    /// Per byte, guesses sorted by |pcc| descending (ties: lower guess first).
    std::array<std::array<std::uint8_t, kGuesses>, kBytes> ranking{};
    /// Per byte: (|top| - |runner-up|) / SD of |pcc| over all guesses.
    std::array<double, kBytes> margins{};
    aes::AesKey recovered_key;
    std::size_t n_traces_used = 0;
};

/// Ranks, margins and recovered key from a correlation grid.
CpaResult summarize(const PccGrid& pcc, std::size_t n_traces);

/// Correlates powers against every hypothesis row. Throws DataError on
/// mismatched lengths and ConfigError when fewer than 2 traces are given.
CpaResult run_cpa(std::span<const double> powers, const HypothesisMatrix& hyp);
CpaResult run_cpa(const power::TracePool& pool);

/// Designer view: the recovered key equals the round-10 key of `true_key`.
bool is_disclosed(const CpaResult& result, const aes::AesKey& true_key);

/// Attacker view: every byte's best guess stands out by at least `threshold`.
bool significant_outlier(const CpaResult& result, double threshold = kDefaultOutlierThreshold);

/// Incremental CPA over a growing trace set, used by campaigns.
///
/// Hypothesis sums are kept as exact integers; power sums are accumulated in
/// insertion order, so the result depends only on the sequence of added traces.
/// Powers should be centred by the caller (any constant offset is fine for the
/// correlation, but a large one costs precision).
class IncrementalCpa {
public:
    IncrementalCpa();

    void add(const aes::Bytes16& ciphertext, double power);
    std::size_t count() const { return n_; }

    PccGrid correlations() const;
    /// Top guess per byte by |pcc| (ties: lower guess).
    aes::AesKey best_key() const;

private:
    double pcc_at(std::size_t idx, double power_var_term) const;
    std::size_t n_ = 0;
    double sum_p_ = 0.0;
    double sum_p2_ = 0.0;
    std::vector<std::uint32_t> sum_h_;
    std::vector<std::uint32_t> sum_h2_;
    std::vector<double> sum_hp_;
};

} // namespace psct::cpa
