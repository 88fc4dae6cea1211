#include "psct/config.h"
#include "psct/error.h"
#include "psct/hex.h"
#include "psct/report.h"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace psct;
using nlohmann::json;

namespace {

std::string minimal(const std::string& extra = "") {
    return R"({"key": "000102030405060708090a0b0c0d0e0f")" + extra + "}";
}

void expect_config_error(const std::string& text, const std::string& fragment) {
    try {
        config::parse_config(text);
        ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

campaign::CampaignReport sample_report() {
    campaign::CampaignReport r;
    r.scenario_label = "dyn";
    r.pool_provenance = std::string(64, 'a');
    r.pool_size = 5000;
    r.confidence = 0.9;
    r.trials = 100;
    r.step = 5;
    r.max_n = 5000;
    r.seed_rule = "rule";
    r.runs.push_back({42, 320, {{320, 10}, {325, 95}}, 325});
    r.runs.push_back({43, 320, {{320, 1}}, std::nullopt});
    return r;
}

} // namespace

TEST(Config, Defaults) {
    const auto c = config::parse_config(minimal());
    EXPECT_EQ(to_hex(c.key.bytes), "000102030405060708090a0b0c0d0e0f");
    EXPECT_EQ(c.pool_size, 5000u);
    EXPECT_EQ(c.master_seed, 1u);
    EXPECT_EQ(c.ttd.confidence, 0.9);
    EXPECT_FALSE(c.ttd.start);
    EXPECT_EQ(c.outlier_threshold, 4.0);
    EXPECT_EQ(c.repeats, 1u);
    EXPECT_TRUE(c.scenarios.empty());
    EXPECT_FALSE(c.vcd);
    EXPECT_EQ(c.digest.size(), 64u);
}

TEST(Config, DigestIgnoresFormatting) {
    const auto a = config::parse_config(R"({"key":"000102030405060708090a0b0c0d0e0f","pool_size":10})");
    const auto b = config::parse_config("{ \"pool_size\" : 10,\n \"key\": \"000102030405060708090a0b0c0d0e0f\" }");
    EXPECT_EQ(a.digest, b.digest);
    EXPECT_NE(a.digest, config::parse_config(minimal(R"(, "pool_size": 11)")).digest);
}

TEST(Config, AsicFile) {
    const auto c = config::load_config(std::string(PSCT_CONFIG_DIR) + "/asic.json");
    EXPECT_EQ(c.params.v_nominal, 1.08);
    EXPECT_EQ(c.scenarios.size(), 15u + 5u);
    EXPECT_EQ(c.scenario("static-X0.5-0.9V").text_ff.strength.fixed, 0.5);
    const auto& dx = c.scenario("dynamic-x");
    EXPECT_EQ(dx.text_ff.strength.mode, tuning::Mode::Dynamic);
    EXPECT_EQ(dx.text_ff.strength.universe.values(), (std::vector<double>{0.5, 4}));
    EXPECT_EQ(dx.text_ff.vcc.fixed, 1.08);
    EXPECT_TRUE(dx.shared_rail);
    const auto& split = c.scenario("split-dynamic-text");
    EXPECT_FALSE(split.shared_rail);
    EXPECT_TRUE(split.other_ff.is_static());
    EXPECT_FALSE(split.text_ff.is_static());
    EXPECT_TRUE(c.scenario("baseline").is_static());
    try {
        c.scenario("nope");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("dynamic-joint"), std::string::npos);
    }
}

TEST(Config, FpgaFile) {
    const auto c = config::load_config(std::string(PSCT_CONFIG_DIR) + "/fpga.json");
    EXPECT_EQ(c.params.io_leak_weight, 2.0);
    EXPECT_EQ(c.repeats, 3u);
    const auto& io = c.scenario("dynamic-io").text_ff.io;
    EXPECT_EQ(io.kind, tuning::IoEmulation::Kind::Dynamic);
    EXPECT_EQ(io.universe.values(), (std::vector<double>{4, 16}));
}

TEST(Config, ScenarioGroups) {
    const auto c = config::parse_config(minimal(R"(, "params": {"v_nominal": 1.0}, "scenarios": [
        {"label": "s", "groups": [{"mode": {"vcc": "dynamic"}, "vccs": [0.9, 1.0]}]},
        {"label": "t", "shared_rail": true, "groups": [
            {"group": "text", "io_emulation": {"mode": "static", "strength": 4}}]}])"));
    const auto& s = c.scenario("s");
    EXPECT_EQ(s.text_ff.strength.fixed, 1.0);
    EXPECT_EQ(s.text_ff.vcc.mode, tuning::Mode::Dynamic);
    EXPECT_EQ(s.other_ff, s.text_ff);
    const auto& t = c.scenario("t");
    EXPECT_TRUE(t.shared_rail);
    EXPECT_EQ(t.text_ff.io.kind, tuning::IoEmulation::Kind::Static);
    EXPECT_EQ(t.text_ff.io.fixed, 4.0);
    EXPECT_EQ(t.other_ff.io.kind, tuning::IoEmulation::Kind::Off);
    EXPECT_EQ(t.text_ff.vcc.fixed, 1.0);
}

TEST(Config, Errors) {
    expect_config_error("{", "not valid JSON");
    expect_config_error("[]", "root");
    expect_config_error("{}", "key");
    expect_config_error(R"({"key": "0011"})", "key");
    expect_config_error(minimal(R"(, "pool_size": 0)"), "pool_size");
    expect_config_error(minimal(R"(, "pool_size": -3)"), "pool_size");
    expect_config_error(minimal(R"(, "ttd": {"confidence": 2})"), "ttd");
    expect_config_error(minimal(R"(, "ttd": {"step": "x"})"), "ttd.step");
    expect_config_error(minimal(R"(, "repeats": 0)"), "repeats");
    expect_config_error(minimal(R"(, "params": {"v_nominal": 0})"), "params");
    expect_config_error(minimal(R"(, "scenarios": [{"groups": [{}]}])"), "label");
    expect_config_error(minimal(R"(, "scenarios": [{"label": "a", "groups": []}])"), "groups");
    expect_config_error(minimal(R"(, "scenarios": [{"label": "a", "groups": [{"group": "io"}]}])"),
                        "group");
    expect_config_error(
        minimal(R"(, "scenarios": [{"label": "a", "groups": [{"group": "all"}, {"group": "text"}]}])"),
        "all");
    expect_config_error(
        minimal(R"(, "scenarios": [{"label": "a", "groups": [{}]}, {"label": "a", "groups": [{}]}])"),
        "duplicate");
    expect_config_error(minimal(R"(, "scenarios": [{"label": "a", "groups": [
        {"mode": {"strength": "dynamic"}, "strengths": [1]}]}])"),
                        "scenarios[0]");
    expect_config_error(minimal(R"(, "static_grid": {"strengths": [1]})"), "static_grid");
    expect_config_error(minimal(R"(, "vcd": {"groups": []})"), "vcd.groups");
    EXPECT_THROW(config::load_config("/nonexistent/psct.json"), ConfigError);
}

TEST(Config, VcdSettings) {
    const auto c = config::parse_config(minimal(R"(, "vcd": {"clock": "tb.clk", "groups": [
        {"name": "text", "patterns": ["tb.dut.s*"]}, {"name": "ctl", "patterns": ["tb.dut.fsm*", "tb.rst"]}],
        "other_group": "ctl", "stride": 11, "offset": 10, "ciphertexts": "ct.txt"})"));
    ASSERT_TRUE(c.vcd);
    EXPECT_EQ(c.vcd->clock, "tb.clk");
    EXPECT_EQ(c.vcd->groups.size(), 2u);
    EXPECT_EQ(c.vcd->groups[1].patterns.size(), 2u);
    EXPECT_EQ(c.vcd->text_group, "text");
    EXPECT_EQ(c.vcd->other_group, "ctl");
    EXPECT_EQ(c.vcd->selection.stride, 11u);
    EXPECT_EQ(c.vcd->selection.offset, 10u);
    EXPECT_EQ(c.vcd->ciphertexts, "ct.txt");
}

TEST(ScenarioDigest, CanonicalAndSensitive) {
    const auto c = config::load_config(std::string(PSCT_CONFIG_DIR) + "/asic.json");
    const auto& a = c.scenario("dynamic-joint");
    EXPECT_EQ(config::scenario_digest(a), config::scenario_digest(a));
    EXPECT_EQ(config::scenario_digest(a), sha256(config::scenario_json(a)));
    EXPECT_NE(config::scenario_digest(a), config::scenario_digest(c.scenario("dynamic-x")));
    auto renamed = a;
    renamed.label = "other";
    EXPECT_NE(config::scenario_digest(a), config::scenario_digest(renamed));
    EXPECT_TRUE(json::parse(config::scenario_json(a)).is_object());
}

TEST(Report, CampaignJsonRoundTrip) {
    const auto r = sample_report();
    const std::string text = report::campaign_json(r, {"cfg", "scn", 7, "psct campaign"});
    EXPECT_EQ(report::parse_campaign_json(text), r);
    const auto j = json::parse(text);
    EXPECT_EQ(j["ttd"], 325);
    EXPECT_EQ(j["provenance"]["master_seed"], 7);
    EXPECT_EQ(j["provenance"]["version"], report::version());
    EXPECT_TRUE(j["runs"][1]["ttd"].is_null());
    auto undisclosed = r;
    std::swap(undisclosed.runs[0], undisclosed.runs[1]);
    EXPECT_EQ(json::parse(report::campaign_json(undisclosed, {}))["ttd"], "not disclosed");
}

TEST(Report, MalformedCampaignJson) {
    EXPECT_THROW(report::parse_campaign_json("{"), DataError);
    EXPECT_THROW(report::parse_campaign_json(R"({"scenario": "x"})"), DataError);
    EXPECT_THROW(report::load_campaign_json("/nonexistent.campaign.json"), DataError);
}

TEST(Report, CampaignCsv) {
    EXPECT_EQ(report::campaign_csv(sample_report()), "run,n,successes\n0,320,10\n0,325,95\n1,320,1\n");
}

TEST(Report, CpaJson) {
    cpa::PccGrid grid{};
    for (auto& row : grid) {
        row[3] = 0.9;
        row[5] = -0.2;
        row[8] = 0.1;
    }
    const auto res = cpa::summarize(grid, 123);
    const auto text = report::cpa_json(res, {true, false, true, 4.0}, {}, 2);
    const auto j = json::parse(text);
    EXPECT_EQ(j["n_traces"], 123);
    EXPECT_EQ(j["mode"], "designer");
    EXPECT_EQ(j["recovered_round10_key"], "03030303030303030303030303030303");
    EXPECT_EQ(j["derived_cipher_key"], to_hex(aes::invert_key_schedule(res.recovered_key).bytes));
    EXPECT_EQ(j["disclosed"], false);
    ASSERT_EQ(j["bytes"].size(), 16u);
    ASSERT_EQ(j["bytes"][0]["top"].size(), 2u);
    EXPECT_EQ(j["bytes"][0]["top"][1]["guess"], 5);
    EXPECT_FALSE(json::parse(report::cpa_json(res, {}, {}))
                     .contains("disclosed"));
}

TEST(Report, ComparisonOutputs) {
    auto a = sample_report();
    auto b = sample_report();
    b.scenario_label = "base";
    b.runs = {{1, 5, {}, 100}};
    const auto cmp = campaign::compare_scenarios({a, b});
    const auto j = json::parse(report::comparison_json(cmp, {a, b}, {}));
    EXPECT_EQ(j["scenarios"].size(), 2u);
    EXPECT_EQ(j["ratios"][0]["a"], "dyn");
    EXPECT_EQ(j["ratios"][0]["display"], campaign::format_ratio(cmp.ratios[0]));
    EXPECT_EQ(j["pool_provenance"], a.pool_provenance);
    const std::string csv = report::comparison_csv(cmp);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,campaigns,undisclosed,min,median,max,mean,lower_bound");
    EXPECT_NE(csv.find("dyn,2,1,"), std::string::npos);
}

TEST(Report, ProgressionMatchesFullAttack) {
    const aes::AesKey key{parse_hex16("2b7e151628aed2a6abf7158809cf4f3c")};
    power::PowerModelParams p;
    p.v_nominal = 1.08;
    const auto pool = power::synthesize_pool(
        key, 250,
        tuning::TuningScenario::uniform("b", {tuning::StrengthSetting::fixed_at(1),
                                              tuning::VccSetting::fixed_at(1.08, 1.08),
                                              tuning::IoEmulation::off()}),
        p, 3);
    const auto rows = report::pcc_progression(pool, 100, key);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].n, 100u);
    EXPECT_EQ(rows[2].n, 250u);
    const auto full = cpa::run_cpa(pool);
    const auto k10 = aes::last_round_key(key);
    for (std::size_t b = 0; b < 16; ++b) {
        EXPECT_NEAR(rows[2].best_pcc[b], std::fabs(full.pcc[b][full.ranking[b][0]]), 1e-9);
        EXPECT_NEAR((*rows[2].key_pcc)[b], full.pcc[b][k10.bytes[b]], 1e-9);
    }
    EXPECT_FALSE(report::pcc_progression(pool, 100, std::nullopt)[0].key_pcc);
    const auto csv = report::progression_csv(rows);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(std::count(csv.begin(), csv.begin() + csv.find('\n'), ','), 32);
    EXPECT_THROW(report::pcc_progression(pool, 0, key), ConfigError);
}
