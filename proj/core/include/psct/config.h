#pragma once

#include "psct/aes.h"
#include "psct/campaign.h"
#include "psct/digest.h"
#include "psct/power.h"
#include "psct/tuning.h"
#include "psct/vcd.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace psct::config {

/// VCD ingestion settings.
struct VcdSettings {
    std::string clock = "clk";
    std::vector<vcd::GroupRule> groups;
    std::string text_group = "text";
    std::string other_group; // empty: no other-FF group
    vcd::CycleSelection selection;
    std::string ciphertexts; // sidecar path
};

/// One JSON file describing a full experiment.
///
///   {
///     "key": "<32 hex>", "pool_size": 5000, "master_seed": 1,
///     "params": {"v_nominal": 1.08, "background_mean": 0, ...},
///     "ttd": {"confidence": 0.9, "trials": 100, "step": 5, "start": "auto", "max_n": 0},
///     "outlier_threshold": 4.0, "repeats": 1, "workers": 4, "output_dir": "out",
///     "static_grid": {"strengths": [...], "vccs": [...]},
///     "scenarios": [{"label": "...", "shared_rail": true, "groups": [
///         {"group": "all|text|other", "mode": {"strength": "static", "vcc": "dynamic"},
///          "strength": 1, "vcc": 1.08, "strengths": [...], "vccs": [...],
///          "io_emulation": "off" | {"mode": "static", "strength": 4}
///                              | {"mode": "dynamic", "strengths": [4, 16]}}]}],
///     "vcd": {"clock": "clk", "groups": [{"name": "text", "patterns": ["s_*"]}], ...}
///   }
struct ExperimentConfig {
    aes::AesKey key;
    std::size_t pool_size = 5000;
    std::uint64_t master_seed = 1;
    power::PowerModelParams params;
    campaign::TtdConfig ttd;
    double outlier_threshold = 4.0;
    std::size_t repeats = 1;
    std::string output_dir = ".";
    std::vector<tuning::TuningScenario> scenarios;
    std::optional<VcdSettings> vcd;
    /// SHA-256 of the canonical (sorted-key, compact) form of the input JSON.
    std::string digest;

    /// Throws ConfigError naming the known labels.
    const tuning::TuningScenario& scenario(const std::string& label) const;
};

/// Throws ConfigError with the offending key on any schema violation.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON of a scenario; identical scenarios give identical text.
std::string scenario_json(const tuning::TuningScenario& scenario);
Digest scenario_digest(const tuning::TuningScenario& scenario);

} // namespace psct::config
