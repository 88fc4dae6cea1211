#pragma once

#include "psct/aes.h"
#include "psct/campaign.h"
#include "psct/cpa.h"
#include "psct/power.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace psct::report {

/// Library version string.
const char* version();

/// Everything needed to re-derive an output file.
struct Provenance {
    std::string config_digest;
    std::string scenario_digest;
    std::uint64_t master_seed = 0;
    std::string command;
};

std::string campaign_json(const campaign::CampaignReport& report, const Provenance& prov);

/// Inverse of campaign_json (provenance is not returned). Throws DataError.
campaign::CampaignReport parse_campaign_json(const std::string& text);
campaign::CampaignReport load_campaign_json(const std::string& path);

/// "run,n,successes" rows of every success curve.
std::string campaign_csv(const campaign::CampaignReport& report);

struct AttackVerdict {
    bool designer_mode = false;
    bool disclosed = false;       // designer mode only
    bool outlier = false;         // min margin >= threshold
    double threshold = cpa::kDefaultOutlierThreshold;
};

/// Per-byte top guesses with their pcc and the byte's margin.
std::string cpa_json(const cpa::CpaResult& result, const AttackVerdict& verdict,
                     const Provenance& prov, std::size_t top = 5);

struct ProgressionRow {
    std::size_t n = 0;
    std::array<double, cpa::kBytes> best_pcc{};
    /// pcc of the correct round-10 key byte (designer mode only).
    std::optional<std::array<double, cpa::kBytes>> key_pcc;
};

/// pcc of the best guess (and the true guess if a key is given) per byte after
/// every `step` traces in pool order.
std::vector<ProgressionRow> pcc_progression(const power::TracePool& pool, std::size_t step,
                                            const std::optional<aes::AesKey>& true_key);
std::string progression_csv(const std::vector<ProgressionRow>& rows);

std::string comparison_json(const campaign::Comparison& cmp,
                            const std::vector<campaign::CampaignReport>& reports,
                            const Provenance& prov);
std::string comparison_csv(const campaign::Comparison& cmp);

std::string power_stats_json(const power::PowerStats& stats, const std::string& label,
                             std::size_t n_traces, const Provenance& prov);

void write_text(const std::string& path, const std::string& content);

} // namespace psct::report
