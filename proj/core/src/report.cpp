#include "psct/report.h"

#include "psct/error.h"
#include "psct/hex.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef PSCT_VERSION_STRING
#define PSCT_VERSION_STRING "unknown"
#endif

namespace psct::report {

using nlohmann::ordered_json;

const char* version() { return PSCT_VERSION_STRING; }

namespace {

ordered_json provenance_json(const Provenance& p) {
    return {{"tool", "psct"},
            {"version", version()},
            {"command", p.command},
            {"config_digest", p.config_digest},
            {"scenario_digest", p.scenario_digest},
            {"master_seed", p.master_seed}};
}

ordered_json ttd_value(const campaign::TtdValue& v) {
    return {{"value", v.value}, {"lower_bound", v.lower_bound}};
}

const char* bound_name(campaign::Bound b) {
    switch (b) {
    case campaign::Bound::Exact: return "exact";
    case campaign::Bound::Lower: return "lower";
    case campaign::Bound::Upper: return "upper";
    case campaign::Bound::Unknown: return "unknown";
    }
    return "unknown";
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

std::string campaign_json(const campaign::CampaignReport& r, const Provenance& prov) {
    ordered_json runs = ordered_json::array();
    for (const auto& run : r.runs) {
        ordered_json curve = ordered_json::array();
        for (const auto& p : run.curve)
            curve.push_back({p.n, p.successes});
        runs.push_back({{"master_seed", run.master_seed},
                        {"start", run.start},
                        {"ttd", run.ttd ? ordered_json(*run.ttd) : ordered_json(nullptr)},
                        {"curve", curve}});
    }
    const ordered_json j = {{"provenance", provenance_json(prov)},
                            {"scenario", r.scenario_label},
                            {"pool_provenance", r.pool_provenance},
                            {"pool_size", r.pool_size},
                            {"confidence", r.confidence},
                            {"trials", r.trials},
                            {"step", r.step},
                            {"max_n", r.max_n},
                            {"seed_rule", r.seed_rule},
                            {"ttd", r.ttd() ? ordered_json(*r.ttd()) : ordered_json("not disclosed")},
                            {"runs", runs}};
    return j.dump(2) + "\n";
}

campaign::CampaignReport parse_campaign_json(const std::string& text) {
    try {
        const auto j = ordered_json::parse(text);
        campaign::CampaignReport r;
        r.scenario_label = j.at("scenario").get<std::string>();
        r.pool_provenance = j.at("pool_provenance").get<std::string>();
        r.pool_size = j.at("pool_size").get<std::size_t>();
        r.confidence = j.at("confidence").get<double>();
        r.trials = j.at("trials").get<std::size_t>();
        r.step = j.at("step").get<std::size_t>();
        r.max_n = j.at("max_n").get<std::size_t>();
        r.seed_rule = j.at("seed_rule").get<std::string>();
        for (const auto& run : j.at("runs")) {
            campaign::CampaignRun cr;
            cr.master_seed = run.at("master_seed").get<std::uint64_t>();
            cr.start = run.at("start").get<std::size_t>();
            if (!run.at("ttd").is_null())
                cr.ttd = run.at("ttd").get<std::size_t>();
            for (const auto& p : run.at("curve"))
                cr.curve.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
            r.runs.push_back(std::move(cr));
        }
        return r;
    } catch (const ordered_json::exception& e) {
        throw DataError(std::string("malformed campaign report: ") + e.what());
    }
}

campaign::CampaignReport load_campaign_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open campaign report '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_campaign_json(ss.str());
}

std::string campaign_csv(const campaign::CampaignReport& r) {
    std::ostringstream os;
    os << "run,n,successes\n";
    for (std::size_t i = 0; i < r.runs.size(); ++i)
        for (const auto& p : r.runs[i].curve)
            os << i << ',' << p.n << ',' << p.successes << '\n';
    return os.str();
}

std::string cpa_json(const cpa::CpaResult& result, const AttackVerdict& verdict,
                     const Provenance& prov, std::size_t top) {
    top = std::min(top, cpa::kGuesses);
    ordered_json bytes = ordered_json::array();
    for (std::size_t b = 0; b < cpa::kBytes; ++b) {
        ordered_json cands = ordered_json::array();
        for (std::size_t i = 0; i < top; ++i) {
            const std::uint8_t g = result.ranking[b][i];
            cands.push_back({{"guess", g}, {"pcc", result.pcc[b][g]}});
        }
        bytes.push_back({{"byte", b}, {"margin", result.margins[b]}, {"top", cands}});
    }
    const aes::AesKey master = aes::invert_key_schedule(result.recovered_key);
    ordered_json j = {{"provenance", provenance_json(prov)},
                      {"n_traces", result.n_traces_used},
                      {"mode", verdict.designer_mode ? "designer" : "attacker"},
                      {"recovered_round10_key", to_hex(result.recovered_key.bytes)},
                      {"derived_cipher_key", to_hex(master.bytes)},
                      {"min_margin", *std::min_element(result.margins.begin(), result.margins.end())},
                      {"threshold", verdict.threshold},
                      {"significant_outlier", verdict.outlier}};
    if (verdict.designer_mode)
        j["disclosed"] = verdict.disclosed;
    j["bytes"] = bytes;
    return j.dump(2) + "\n";
}

std::vector<ProgressionRow> pcc_progression(const power::TracePool& pool, std::size_t step,
                                            const std::optional<aes::AesKey>& true_key) {
    pool.validate();
    if (step == 0)
        throw ConfigError("progression step must be >= 1");
    const aes::AesKey k10 = true_key ? aes::last_round_key(*true_key) : aes::AesKey{};

    std::vector<ProgressionRow> rows;
    cpa::IncrementalCpa inc;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        inc.add(pool.ciphertexts[i], pool.powers[i]);
        const std::size_t n = i + 1;
        if (n < 2 || (n % step != 0 && n != pool.size()))
            continue;
        const cpa::PccGrid grid = inc.correlations();
        ProgressionRow row;
        row.n = n;
        for (std::size_t b = 0; b < cpa::kBytes; ++b) {
            double best = 0.0;
            for (double v : grid[b])
                best = std::max(best, std::fabs(v));
            row.best_pcc[b] = best;
        }
        if (true_key) {
            row.key_pcc.emplace();
            for (std::size_t b = 0; b < cpa::kBytes; ++b)
                (*row.key_pcc)[b] = grid[b][k10.bytes[b]];
        }
        rows.push_back(row);
    }
    return rows;
}

std::string progression_csv(const std::vector<ProgressionRow>& rows) {
    std::ostringstream os;
    os << "n";
    for (std::size_t b = 0; b < cpa::kBytes; ++b)
        os << ",best_" << b;
    const bool with_key = !rows.empty() && rows.front().key_pcc;
    if (with_key)
        for (std::size_t b = 0; b < cpa::kBytes; ++b)
            os << ",key_" << b;
    os << '\n';
    for (const auto& r : rows) {
        os << r.n;
        for (double v : r.best_pcc)
            os << ',' << fmt(v);
        if (with_key)
            for (double v : *r.key_pcc)
                os << ',' << fmt(v);
        os << '\n';
    }
    return os.str();
}

std::string comparison_json(const campaign::Comparison& cmp,
                            const std::vector<campaign::CampaignReport>& reports,
                            const Provenance& prov) {
    ordered_json scenarios = ordered_json::array();
    for (const auto& s : cmp.scenarios)
        scenarios.push_back({{"label", s.label},
                             {"campaigns", s.campaigns},
                             {"undisclosed", s.undisclosed},
                             {"min", ttd_value(s.min)},
                             {"median", ttd_value(s.median)},
                             {"max", ttd_value(s.max)},
                             {"mean", ttd_value(s.mean)}});
    ordered_json ratios = ordered_json::array();
    for (const auto& r : cmp.ratios)
        ratios.push_back({{"a", cmp.scenarios[r.a].label},
                          {"b", cmp.scenarios[r.b].label},
                          {"ratio", r.ratio},
                          {"bound", bound_name(r.bound)},
                          {"display", campaign::format_ratio(r)}});
    ordered_json inputs = ordered_json::array();
    for (const auto& r : reports)
        inputs.push_back({{"scenario", r.scenario_label},
                          {"trials", r.trials},
                          {"confidence", r.confidence},
                          {"step", r.step},
                          {"seed_rule", r.seed_rule}});
    const ordered_json j = {{"provenance", provenance_json(prov)},
                            {"pool_provenance", reports.empty() ? "" : reports.front().pool_provenance},
                            {"inputs", inputs},
                            {"scenarios", scenarios},
                            {"ratios", ratios}};
    return j.dump(2) + "\n";
}

std::string comparison_csv(const campaign::Comparison& cmp) {
    std::ostringstream os;
    os << "label,campaigns,undisclosed,min,median,max,mean,lower_bound\n";
    for (const auto& s : cmp.scenarios)
        os << s.label << ',' << s.campaigns << ',' << s.undisclosed << ',' << fmt(s.min.value) << ','
           << fmt(s.median.value) << ',' << fmt(s.max.value) << ',' << fmt(s.mean.value) << ','
           << (s.median.lower_bound ? 1 : 0) << '\n';
    return os.str();
}

std::string power_stats_json(const power::PowerStats& stats, const std::string& label,
                             std::size_t n_traces, const Provenance& prov) {
    const ordered_json j = {{"provenance", provenance_json(prov)},
                            {"scenario", label},
                            {"n_traces", n_traces},
                            {"average_peak_power", stats.mean},
                            {"sd", stats.sd},
                            {"min", stats.min},
                            {"max", stats.max}};
    return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw DataError("write to '" + path + "' failed");
}

} // namespace psct::report
