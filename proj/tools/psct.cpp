// psct: synthesize traces under tuning scenarios, attack them, run #TTD campaigns.

#include "psct/campaign.h"
#include "psct/config.h"
#include "psct/cpa.h"
#include "psct/error.h"
#include "psct/hex.h"
#include "psct/power.h"
#include "psct/report.h"
#include "psct/trace_file.h"
#include "psct/vcd.h"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace psct;

enum Exit : int { kOk = 0, kNegative = 1, kUsage = 2, kData = 3 };

std::string joined_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i)
        out += (i ? " " : "") + std::string(argv[i]);
    return out;
}

std::string output_path(const config::ExperimentConfig& cfg, const std::string& given,
                        const std::string& fallback) {
    if (!given.empty())
        return given;
    return (std::filesystem::path(cfg.output_dir) / fallback).string();
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        report::write_text(path, content);
}

struct GenArgs {
    std::string config;
    std::string scenario;
    std::string out;
    std::optional<std::size_t> pool_size;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
};

struct AttackArgs {
    std::string traces;
    std::string key;
    double threshold = cpa::kDefaultOutlierThreshold;
    std::size_t top = 5;
    std::string out;
    std::string progression;
    std::size_t progression_step = 50;
};

struct CampaignArgs {
    std::string config;
    std::string scenario;
    std::string traces;
    std::string key;
    std::string out_json;
    std::string out_csv;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> step;
    std::optional<std::size_t> start;
    std::optional<double> confidence;
    std::optional<std::size_t> repeats;
    std::optional<std::size_t> max_n;
    std::optional<std::size_t> reject_set_size;
    std::optional<unsigned> workers;
};

struct CompareArgs {
    std::vector<std::string> reports;
    std::string out;
    std::string csv;
};

struct IngestArgs {
    std::string config;
    std::string vcd;
    std::string scenario;
    std::string ciphertexts;
    std::string clock;
    std::vector<std::string> groups;
    std::string text_group;
    std::string other_group;
    std::optional<std::size_t> stride;
    std::optional<std::size_t> offset;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct ReportArgs {
    std::vector<std::string> traces;
    std::string out;
};

power::TracePool generate(const config::ExperimentConfig& cfg, const tuning::TuningScenario& sc,
                          std::size_t n, std::uint64_t seed, unsigned workers) {
    return power::synthesize_pool(cfg.key, n, sc, cfg.params, seed, workers);
}

int cmd_gen(const GenArgs& a) {
    const auto cfg = config::load_config(a.config);
    const auto& sc = cfg.scenario(a.scenario);
    const std::size_t n = a.pool_size.value_or(cfg.pool_size);
    const std::uint64_t seed = a.seed.value_or(cfg.master_seed);
    const unsigned workers = a.workers.value_or(cfg.ttd.workers);
    if (n == 0)
        throw ConfigError("--pool-size must be >= 1");

    const auto pool = generate(cfg, sc, n, seed, workers);
    const std::string out = output_path(cfg, a.out, sc.label + ".xvlt");
    io::write_trace_file(out, pool, config::scenario_digest(sc));
    std::cerr << "wrote " << n << " traces of '" << sc.label << "' to " << out << " (config "
              << cfg.digest.substr(0, 12) << ", seed " << seed << ")\n";
    return kOk;
}

int cmd_attack(const AttackArgs& a, const std::string& command) {
    const auto tf = io::read_trace_file(a.traces);
    const auto result = cpa::run_cpa(tf.pool);

    report::AttackVerdict v;
    v.threshold = a.threshold;
    v.outlier = cpa::significant_outlier(result, a.threshold);
    std::optional<aes::AesKey> key;
    if (!a.key.empty()) {
        key = aes::AesKey{parse_hex16(a.key)};
        v.designer_mode = true;
        v.disclosed = cpa::is_disclosed(result, *key);
    }
    const report::Provenance prov{"", digest_hex(tf.scenario_hash), tf.pool.master_seed, command};
    emit(a.out, report::cpa_json(result, v, prov, a.top));
    if (!a.progression.empty())
        report::write_text(a.progression, report::progression_csv(
                                              report::pcc_progression(tf.pool, a.progression_step, key)));

    if (v.designer_mode) {
        std::cerr << (v.disclosed ? "disclosed" : "not disclosed") << '\n';
        return v.disclosed ? kOk : kNegative;
    }
    std::cerr << (v.outlier ? "significant outlier" : "no significant outlier") << '\n';
    return v.outlier ? kOk : kNegative;
}

int cmd_campaign(const CampaignArgs& a, const std::string& command) {
    const auto cfg = config::load_config(a.config);
    campaign::TtdConfig ttd = cfg.ttd;
    if (a.trials) ttd.trials = *a.trials;
    if (a.step) ttd.step = *a.step;
    if (a.start) ttd.start = *a.start;
    if (a.confidence) ttd.confidence = *a.confidence;
    if (a.max_n) ttd.max_n = *a.max_n;
    if (a.workers) ttd.workers = *a.workers;
    const std::uint64_t seed = a.seed.value_or(cfg.master_seed);
    const std::size_t repeats = a.repeats.value_or(cfg.repeats);
    const aes::AesKey key = a.key.empty() ? cfg.key : aes::AesKey{parse_hex16(a.key)};

    power::TracePool pool;
    std::string scenario_digest;
    if (!a.traces.empty()) {
        auto tf = io::read_trace_file(a.traces);
        pool = std::move(tf.pool);
        scenario_digest = digest_hex(tf.scenario_hash);
    } else {
        if (a.scenario.empty())
            throw ConfigError("campaign needs --scenario or --traces");
        const auto& sc = cfg.scenario(a.scenario);
        pool = generate(cfg, sc, cfg.pool_size, seed, ttd.workers);
        scenario_digest = digest_hex(config::scenario_digest(sc));
    }

    if (a.reject_set_size) {
        auto [kept, rep] = campaign::reject_noisy_sets(pool, *a.reject_set_size, cfg.outlier_threshold,
                                                       ttd.workers);
        std::cerr << "rejected " << rep.sets_rejected << " of " << rep.sets_total << " sets ("
                  << rep.leftover_traces << " leftover traces dropped)\n";
        if (kept.size() == 0)
            throw DataError("every trace set was rejected");
        kept.scenario_label = pool.scenario_label;
        pool = std::move(kept);
    }

    const auto rep = campaign::run_campaigns(pool, key, ttd, seed, repeats);
    const report::Provenance prov{cfg.digest, scenario_digest, seed, command};
    const std::string label = rep.scenario_label.empty() ? "campaign" : rep.scenario_label;
    emit(output_path(cfg, a.out_json, label + ".campaign.json"), report::campaign_json(rep, prov));
    report::write_text(output_path(cfg, a.out_csv, label + ".curve.csv"), report::campaign_csv(rep));

    for (const auto& run : rep.runs)
        std::cerr << label << ": #TTD(" << ttd.confidence * 100 << "%, " << ttd.trials
                  << ") = " << (run.ttd ? std::to_string(*run.ttd) : "not disclosed within " +
                                                                     std::to_string(rep.max_n))
                  << '\n';
    const bool all = std::all_of(rep.runs.begin(), rep.runs.end(), [](const auto& r) { return r.ttd; });
    return all ? kOk : kNegative;
}

int cmd_compare(const CompareArgs& a, const std::string& command) {
    if (a.reports.size() < 2)
        throw ConfigError("compare needs at least two campaign reports");
    std::vector<campaign::CampaignReport> reports;
    for (const auto& p : a.reports)
        reports.push_back(report::load_campaign_json(p));
    const auto cmp = campaign::compare_scenarios(reports);
    const report::Provenance prov{"", "", 0, command};
    emit(a.out, report::comparison_json(cmp, reports, prov));
    if (!a.csv.empty())
        report::write_text(a.csv, report::comparison_csv(cmp));
    for (const auto& r : cmp.ratios)
        std::cerr << cmp.scenarios[r.a].label << " / " << cmp.scenarios[r.b].label << " = "
                  << campaign::format_ratio(r) << '\n';
    return kOk;
}

int cmd_ingest(const IngestArgs& a) {
    const auto cfg = config::load_config(a.config);
    config::VcdSettings vs = cfg.vcd.value_or(config::VcdSettings{});
    if (!a.clock.empty()) vs.clock = a.clock;
    if (!a.ciphertexts.empty()) vs.ciphertexts = a.ciphertexts;
    if (!a.text_group.empty()) vs.text_group = a.text_group;
    if (!a.other_group.empty()) vs.other_group = a.other_group;
    if (a.stride) vs.selection.stride = *a.stride;
    if (a.offset) vs.selection.offset = *a.offset;
    if (!a.groups.empty()) {
        vs.groups.clear();
        for (const auto& g : a.groups) {
            const auto eq = g.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError("--group expects name=pattern[,pattern...], got '" + g + "'");
            vcd::GroupRule rule{g.substr(0, eq), {}};
            std::string rest = g.substr(eq + 1);
            for (std::size_t pos = 0; pos <= rest.size();) {
                const auto comma = std::min(rest.find(',', pos), rest.size());
                if (comma > pos)
                    rule.patterns.push_back(rest.substr(pos, comma - pos));
                pos = comma + 1;
            }
            vs.groups.push_back(std::move(rule));
        }
    }
    if (vs.groups.empty())
        throw ConfigError("no signal groups: give --group or a vcd.groups config section");
    if (vs.ciphertexts.empty())
        throw ConfigError("no ciphertext sidecar: give --ciphertexts or vcd.ciphertexts");

    const auto& sc = cfg.scenario(a.scenario);
    const std::uint64_t seed = a.seed.value_or(cfg.master_seed);
    const auto doc = vcd::parse_vcd_file(a.vcd);
    for (const auto& w : doc.warnings)
        std::cerr << "warning: " << w << '\n';
    const auto profile = vcd::extract_toggles(doc, vs.clock, vs.groups);
    const auto cts = vcd::read_ciphertext_sidecar_file(vs.ciphertexts);
    const auto pool = vcd::toggles_to_pool(profile, cts, sc, cfg.params, seed, vs.selection,
                                           vs.text_group, vs.other_group);
    const std::string out = output_path(cfg, a.out, sc.label + ".vcd.xvlt");
    io::write_trace_file(out, pool, config::scenario_digest(sc));
    std::cerr << "wrote " << pool.size() << " traces from " << profile.per_cycle.size()
              << " clock cycles to " << out << '\n';
    return kOk;
}

int cmd_report(const ReportArgs& a, const std::string& command) {
    std::string out;
    for (const auto& path : a.traces) {
        const auto tf = io::read_trace_file(path);
        const report::Provenance prov{"", digest_hex(tf.scenario_hash), tf.pool.master_seed, command};
        out += report::power_stats_json(power::power_stats(tf.pool.powers), tf.pool.scenario_label,
                                        tf.pool.size(), prov);
    }
    emit(a.out, out);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driver-strength / VCC tuning against last-round CPA on AES-128"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(psct::report::version()));
    const std::string command = joined_args(argc, argv);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Synthesize a trace pool for one scenario");
    g->add_option("-c,--config", gen.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    g->add_option("-s,--scenario", gen.scenario, "Scenario label")->required();
    g->add_option("-o,--out", gen.out, "Trace file (default <output_dir>/<label>.xvlt)");
    g->add_option("-n,--pool-size", gen.pool_size, "Override pool size");
    g->add_option("--seed", gen.seed, "Override master seed");
    g->add_option("-j,--workers", gen.workers, "Worker threads (default PSCT_WORKERS or cores)");

    AttackArgs atk;
    auto* at = app.add_subcommand("attack", "CPA on a trace file; designer mode with --key");
    at->add_option("traces", atk.traces, "Trace file")->required()->check(CLI::ExistingFile);
    at->add_option("-k,--key", atk.key, "Cipher key (32 hex digits) for designer mode");
    at->add_option("-t,--threshold", atk.threshold, "Outlier margin threshold")->check(CLI::NonNegativeNumber);
    at->add_option("--top", atk.top, "Candidates per byte in the report");
    at->add_option("-o,--out", atk.out, "Report path (default stdout)");
    at->add_option("--progression", atk.progression, "Write pcc-vs-ntraces CSV here");
    at->add_option("--progression-step", atk.progression_step, "Rows every N traces")->check(CLI::PositiveNumber);

    CampaignArgs cam;
    auto* ca = app.add_subcommand("campaign", "Stepped #TTD(c, t) campaign");
    ca->add_option("-c,--config", cam.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    auto* ca_sc = ca->add_option("-s,--scenario", cam.scenario, "Scenario label (generates the pool)");
    auto* ca_tr = ca->add_option("--traces", cam.traces, "Existing trace file")->check(CLI::ExistingFile);
    ca_sc->excludes(ca_tr);
    ca->add_option("-k,--key", cam.key, "Override cipher key");
    ca->add_option("-o,--out", cam.out_json, "Report JSON (default <output_dir>/<label>.campaign.json)");
    ca->add_option("--csv", cam.out_csv, "Curve CSV (default <output_dir>/<label>.curve.csv)");
    ca->add_option("--seed", cam.seed, "Override master seed");
    ca->add_option("--trials", cam.trials, "Trials per step")->check(CLI::PositiveNumber);
    ca->add_option("--step", cam.step, "Trace-count step")->check(CLI::PositiveNumber);
    ca->add_option("--start", cam.start, "Starting trace count (default: auto)")->check(CLI::PositiveNumber);
    ca->add_option("--confidence", cam.confidence, "Success-rate target")->check(CLI::Range(0.0, 1.0));
    ca->add_option("--max-n", cam.max_n, "Largest trace count probed");
    ca->add_option("--repeats", cam.repeats, "Independent campaigns")->check(CLI::PositiveNumber);
    ca->add_option("--reject-set-size", cam.reject_set_size, "Drop sets without a significant outlier first")
        ->check(CLI::PositiveNumber);
    ca->add_option("-j,--workers", cam.workers, "Worker threads");

    CompareArgs cmp;
    auto* co = app.add_subcommand("compare", "TTD distributions and resilience ratios");
    co->add_option("reports", cmp.reports, "Campaign report JSON files")->check(CLI::ExistingFile);
    co->add_option("-o,--out", cmp.out, "Comparison JSON (default stdout)");
    co->add_option("--csv", cmp.csv, "Summary CSV");

    IngestArgs ing;
    auto* in = app.add_subcommand("ingest-vcd", "Turn a zero-delay VCD into a trace file");
    in->add_option("-c,--config", ing.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    in->add_option("vcd", ing.vcd, "VCD file")->required()->check(CLI::ExistingFile);
    in->add_option("-s,--scenario", ing.scenario, "Scenario label")->required();
    in->add_option("--ciphertexts", ing.ciphertexts, "Ciphertext sidecar (32 hex per line)");
    in->add_option("--clock", ing.clock, "Clock signal name");
    in->add_option("--group", ing.groups, "name=glob[,glob...] (repeatable)");
    in->add_option("--text-group", ing.text_group, "Group driving the text FFs");
    in->add_option("--other-group", ing.other_group, "Group added to the background load");
    in->add_option("--stride", ing.stride, "Cycles per encryption")->check(CLI::PositiveNumber);
    in->add_option("--offset", ing.offset, "First encryption cycle");
    in->add_option("--seed", ing.seed, "Override master seed");
    in->add_option("-o,--out", ing.out, "Trace file");

    ReportArgs rep;
    auto* re = app.add_subcommand("report", "Average peak power statistics of trace files");
    re->add_option("traces", rep.traces, "Trace files")->required()->check(CLI::ExistingFile);
    re->add_option("-o,--out", rep.out, "Output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*at) return cmd_attack(atk, command);
        if (*ca) return cmd_campaign(cam, command);
        if (*co) return cmd_compare(cmp, command);
        if (*in) return cmd_ingest(ing);
        if (*re) return cmd_report(rep, command);
    } catch (const psct::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const psct::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
