#pragma once

#include "psct/aes.h"
#include "psct/cpa.h"
#include "psct/power.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace psct::campaign {

/// #TTD(c, t) campaign settings.
struct TtdConfig {
    double confidence = 0.90;
    std::size_t trials = 1000;
    std::size_t step = 5;
    /// Starting trace count; nullopt selects it by exploratory sampling.
    std::optional<std::size_t> start;
    /// Largest trace count probed; 0 means the pool size.
    std::size_t max_n = 0;
    unsigned workers = 1;

    /// Throws ConfigError if any field is out of range.
    void validate() const;
};

struct CurvePoint {
    std::size_t n = 0;
    std::size_t successes = 0;
    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CampaignRun {
    std::uint64_t master_seed = 0;
    std::size_t start = 0;
    std::vector<CurvePoint> curve;
    /// nullopt: not disclosed within the pool.
    std::optional<std::size_t> ttd;
    friend bool operator==(const CampaignRun&, const CampaignRun&) = default;
};

/// One scenario's campaigns over a shared pool.
struct CampaignReport {
    std::string scenario_label;
    /// SHA-256 over the pool ciphertexts in trace-identity order.
    std::string pool_provenance;
    std::size_t pool_size = 0;
    double confidence = 0.9;
    std::size_t trials = 0;
    std::size_t step = 0;
    std::size_t max_n = 0;
    std::string seed_rule;
    std::vector<CampaignRun> runs;

    /// TTD of the first run.
    std::optional<std::size_t> ttd() const { return runs.empty() ? std::nullopt : runs.front().ttd; }
    friend bool operator==(const CampaignReport&, const CampaignReport&) = default;
};

std::string pool_provenance(const power::TracePool& pool);

/// Stepped campaign: for n = start, start + step, ... run `trials` CPA trials on
/// random n-subsets and stop at the first n where successes / trials >= confidence.
///
/// Trial i draws its traces as the prefix of a permutation of trace identities
/// seeded by (master_seed, i), so every n-subset is uniform without
/// replacement and results do not depend on pool storage order or worker count.
CampaignReport run_campaign(const power::TracePool& pool, const aes::AesKey& true_key,
                            const TtdConfig& cfg, std::uint64_t master_seed);

/// `repeats` independent campaigns; run r uses derive_seed(master, Campaign, {r}).
CampaignReport run_campaigns(const power::TracePool& pool, const aes::AesKey& true_key,
                             const TtdConfig& cfg, std::uint64_t master_seed, std::size_t repeats);

/// Doubling search n = step, 2 step, 4 step, ... with max(10, trials / 20)
/// trials per probe. Returns the largest probe below the confidence, at least
/// `step`, at most the largest probe not exceeding max_n.
std::size_t auto_start(const power::TracePool& pool, const aes::AesKey& true_key,
                       const TtdConfig& cfg, std::uint64_t master_seed);

struct RejectionReport {
    std::size_t sets_total = 0;
    std::size_t sets_rejected = 0;
    std::size_t leftover_traces = 0;
    std::vector<double> set_margins; // min over bytes, at full set size
    std::vector<bool> rejected;
};

/// Splits the pool into consecutive sets, attacks each set on its own without
/// the key, and keeps only sets showing a significant outlier. Traces beyond
/// the last full set are dropped and counted in leftover_traces.
std::pair<power::TracePool, RejectionReport>
reject_noisy_sets(const power::TracePool& pool, std::size_t set_size,
                  double threshold = cpa::kDefaultOutlierThreshold, unsigned workers = 1);

/// TTD value that may be a lower bound (campaign never disclosed the key).
struct TtdValue {
    double value = 0.0;
    bool lower_bound = false;
};

struct ScenarioSummary {
    std::string label;
    std::size_t campaigns = 0;
    std::size_t undisclosed = 0;
    TtdValue min;
    TtdValue median;
    TtdValue max;
    TtdValue mean;
};

enum class Bound { Exact, Lower, Upper, Unknown };

/// ttd(a) / ttd(b) on medians.
struct ResilienceRatio {
    std::size_t a = 0;
    std::size_t b = 0;
    double ratio = 0.0;
    Bound bound = Bound::Exact;
};

struct Comparison {
    std::vector<ScenarioSummary> scenarios;
    std::vector<ResilienceRatio> ratios;
};

/// Per-report TTD distributions and pairwise resilience ratios. Undisclosed
/// runs count as max_n with a lower-bound flag. Throws ConfigError with fewer
/// than two reports and DataError when pool provenances differ.
Comparison compare_scenarios(const std::vector<CampaignReport>& reports);

std::string format_ratio(const ResilienceRatio& r);

} // namespace psct::campaign
