#include "psct/cpa.h"

#include "psct/error.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace psct::cpa {

namespace {

/// table[(c1 << 16) | (c2 << 8) | k] = popcount(InvSBox(c1 ^ k) ^ c2), 16 MiB.
const std::vector<std::uint8_t>& hd_table() {
    static const std::vector<std::uint8_t> table = [] {
        std::vector<std::uint8_t> t(std::size_t{1} << 24);
        for (unsigned c1 = 0; c1 < 256; ++c1) {
            std::array<std::uint8_t, 256> pre{};
            for (unsigned k = 0; k < 256; ++k)
                pre[k] = aes::inv_sbox(static_cast<std::uint8_t>(c1 ^ k));
            for (unsigned c2 = 0; c2 < 256; ++c2) {
                std::uint8_t* row = &t[(std::size_t{c1} << 16) | (std::size_t{c2} << 8)];
                for (unsigned k = 0; k < 256; ++k)
                    row[k] = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(pre[k] ^ c2)));
            }
        }
        return t;
    }();
    return table;
}

const std::uint8_t* hd_row(const aes::Bytes16& ct, std::size_t byte) {
    const std::size_t c1 = ct[byte];
    const std::size_t c2 = ct[aes::last_round_source(byte)];
    return &hd_table()[(c1 << 16) | (c2 << 8)];
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

} // namespace

std::uint8_t hypothesis(const aes::Bytes16& ciphertext, std::size_t byte_index, std::uint8_t guess) {
    const std::uint8_t pre = aes::invert_last_round_byte(ciphertext[byte_index], guess, byte_index);
    const std::uint8_t post = ciphertext[aes::last_round_source(byte_index)];
    return static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(pre ^ post)));
}

HypothesisMatrix::HypothesisMatrix(std::size_t n_traces)
    : n_traces_(n_traces), values_(kBytes * kGuesses * n_traces) {}

HypothesisMatrix HypothesisMatrix::subset(std::span<const std::size_t> traces) const {
    HypothesisMatrix out(traces.size());
    for (std::size_t b = 0; b < kBytes; ++b)
        for (std::size_t k = 0; k < kGuesses; ++k) {
            const auto src = row(b, k);
            auto dst = out.row(b, k);
            for (std::size_t i = 0; i < traces.size(); ++i)
                dst[i] = src[traces[i]];
        }
    return out;
}

HypothesisMatrix build_hypotheses(std::span<const aes::Bytes16> ciphertexts) {
    if (ciphertexts.empty())
        throw DataError("build_hypotheses needs at least one ciphertext");
    HypothesisMatrix hyp(ciphertexts.size());
    for (std::size_t b = 0; b < kBytes; ++b)
        for (std::size_t k = 0; k < kGuesses; ++k) {
            auto row = hyp.row(b, k);
            for (std::size_t t = 0; t < ciphertexts.size(); ++t)
                row[t] = hypothesis(ciphertexts[t], b, static_cast<std::uint8_t>(k));
        }
    return hyp;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ConfigError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
    if (x.size() < 2)
        throw ConfigError("pearson needs at least 2 samples");

    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    if (*xmin == *xmax || *ymin == *ymax)
        return {0.0, true};

    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        return {0.0, true};
    return {clamp_unit(sxy / std::sqrt(sxx * syy)), false};
}

void StreamingPearson::add(double x, double y) {
    ++n_;
    const double n = static_cast<double>(n_);
    const double dx = x - mean_x_;
    mean_x_ += dx / n;
    const double dy = y - mean_y_;
    mean_y_ += dy / n;
    m2_x_ += dx * (x - mean_x_);
    m2_y_ += dy * (y - mean_y_);
    c_xy_ += dx * (y - mean_y_);
}

PearsonResult StreamingPearson::result() const {
    if (n_ < 2 || m2_x_ <= 0.0 || m2_y_ <= 0.0)
        return {0.0, true};
    return {clamp_unit(c_xy_ / std::sqrt(m2_x_ * m2_y_)), false};
}

CpaResult summarize(const PccGrid& pcc, std::size_t n_traces) {
    CpaResult r;
    r.pcc = pcc;
    r.n_traces_used = n_traces;
    for (std::size_t b = 0; b < kBytes; ++b) {
        std::array<double, kGuesses> mag{};
        for (std::size_t k = 0; k < kGuesses; ++k)
            mag[k] = std::fabs(pcc[b][k]);

        auto& rank = r.ranking[b];
        std::iota(rank.begin(), rank.end(), std::uint8_t{0});
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::uint8_t a, std::uint8_t c) { return mag[a] > mag[c]; });
        r.recovered_key.bytes[b] = rank[0];

        double mean = 0.0;
        for (double m : mag)
            mean += m;
        mean /= static_cast<double>(kGuesses);
        double var = 0.0;
        for (double m : mag)
            var += (m - mean) * (m - mean);
        const double sd = std::sqrt(var / static_cast<double>(kGuesses));
        r.margins[b] = sd > 0.0 ? (mag[rank[0]] - mag[rank[1]]) / sd : 0.0;
    }
    return r;
}

CpaResult run_cpa(std::span<const double> powers, const HypothesisMatrix& hyp) {
    if (powers.size() != hyp.n_traces())
        throw DataError("run_cpa: " + std::to_string(powers.size()) + " power samples but " +
                        std::to_string(hyp.n_traces()) + " hypothesis columns");
    if (powers.size() < 2)
        throw ConfigError("run_cpa needs at least 2 traces");

    PccGrid grid{};
    std::vector<double> h(powers.size());
    for (std::size_t b = 0; b < kBytes; ++b)
        for (std::size_t k = 0; k < kGuesses; ++k) {
            const auto row = hyp.row(b, k);
            std::copy(row.begin(), row.end(), h.begin());
            grid[b][k] = pearson(powers, h).value;
        }
    return summarize(grid, powers.size());
}

CpaResult run_cpa(const power::TracePool& pool) {
    pool.validate();
    return run_cpa(pool.powers, build_hypotheses(pool.ciphertexts));
}

bool is_disclosed(const CpaResult& result, const aes::AesKey& true_key) {
    return result.recovered_key == aes::last_round_key(true_key);
}

bool significant_outlier(const CpaResult& result, double threshold) {
    return *std::min_element(result.margins.begin(), result.margins.end()) >= threshold;
}

IncrementalCpa::IncrementalCpa()
    : sum_h_(kBytes * kGuesses, 0), sum_h2_(kBytes * kGuesses, 0), sum_hp_(kBytes * kGuesses, 0.0) {
    hd_table(); // build outside any timed loop
}

void IncrementalCpa::add(const aes::Bytes16& ciphertext, double power) {
    ++n_;
    sum_p_ += power;
    sum_p2_ += power * power;
    for (std::size_t b = 0; b < kBytes; ++b) {
        const std::uint8_t* row = hd_row(ciphertext, b);
        std::uint32_t* sh = &sum_h_[b * kGuesses];
        std::uint32_t* sh2 = &sum_h2_[b * kGuesses];
        double* shp = &sum_hp_[b * kGuesses];
        for (std::size_t k = 0; k < kGuesses; ++k) {
            const std::uint32_t h = row[k];
            sh[k] += h;
            sh2[k] += h * h;
            shp[k] += static_cast<double>(h) * power;
        }
    }
}

double IncrementalCpa::pcc_at(std::size_t idx, double power_var_term) const {
    const auto n = static_cast<std::int64_t>(n_);
    const auto sh = static_cast<std::int64_t>(sum_h_[idx]);
    const std::int64_t hvar = n * static_cast<std::int64_t>(sum_h2_[idx]) - sh * sh;
    if (hvar <= 0 || !(power_var_term > 0.0))
        return 0.0;
    const double num = static_cast<double>(n) * sum_hp_[idx] - static_cast<double>(sh) * sum_p_;
    return clamp_unit(num / std::sqrt(static_cast<double>(hvar) * power_var_term));
}

PccGrid IncrementalCpa::correlations() const {
    PccGrid grid{};
    if (n_ < 2)
        return grid;
    const double pvar = static_cast<double>(n_) * sum_p2_ - sum_p_ * sum_p_;
    for (std::size_t b = 0; b < kBytes; ++b)
        for (std::size_t k = 0; k < kGuesses; ++k)
            grid[b][k] = pcc_at(b * kGuesses + k, pvar);
    return grid;
}

aes::AesKey IncrementalCpa::best_key() const {
    aes::AesKey key;
    if (n_ < 2)
        return key;
    const double pvar = static_cast<double>(n_) * sum_p2_ - sum_p_ * sum_p_;
    for (std::size_t b = 0; b < kBytes; ++b) {
        double best = -1.0;
        for (std::size_t k = 0; k < kGuesses; ++k) {
            const double m = std::fabs(pcc_at(b * kGuesses + k, pvar));
            if (m > best) {
                best = m;
                key.bytes[b] = static_cast<std::uint8_t>(k);
            }
        }
    }
    return key;
}

} // namespace psct::cpa
