#include "psct/campaign.h"
#include "psct/error.h"
#include "psct/hex.h"
#include "psct/rng.h"

#include "gen.h"

#include <gtest/gtest.h>

#include <numeric>

using namespace psct;
using psct::testkit::Gen;

namespace {

const aes::AesKey kKey = {parse_hex16("2b7e151628aed2a6abf7158809cf4f3c")};

tuning::TuningScenario baseline() {
    return tuning::TuningScenario::uniform(
        "baseline", {tuning::StrengthSetting::fixed_at(1), tuning::VccSetting::fixed_at(1.08, 1.08),
                     tuning::IoEmulation::off()});
}

power::PowerModelParams asic() {
    power::PowerModelParams p;
    p.v_nominal = 1.08;
    return p;
}

const power::TracePool& small_pool() {
    static const auto pool = power::synthesize_pool(kKey, 1500, baseline(), asic(), 7);
    return pool;
}

campaign::TtdConfig quick(std::size_t trials = 20) {
    campaign::TtdConfig c;
    c.trials = trials;
    c.step = 25;
    c.start = 200;
    return c;
}

power::TracePool noise_pool(std::size_t n, std::uint64_t seed) {
    auto pool = power::synthesize_pool(kKey, n, baseline(), asic(), seed);
    Gen g(seed);
    pool.powers = g.normals(n);
    return pool;
}

campaign::CampaignReport report_with(const std::string& label, std::vector<std::optional<std::size_t>> ttds,
                                     std::size_t max_n = 5000) {
    campaign::CampaignReport r;
    r.scenario_label = label;
    r.pool_provenance = "abc";
    r.max_n = max_n;
    for (auto t : ttds) {
        campaign::CampaignRun run;
        run.ttd = t;
        r.runs.push_back(run);
    }
    return r;
}

} // namespace

TEST(TtdConfig, Validation) {
    campaign::TtdConfig c;
    EXPECT_NO_THROW(c.validate());
    c.confidence = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.trials = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.step = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.start = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.start = 600;
    c.max_n = 500;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Campaign, ZeroConfidenceStopsAtStart) {
    auto cfg = quick(5);
    cfg.confidence = 0.0;
    const auto r = campaign::run_campaign(small_pool(), kKey, cfg, 1);
    ASSERT_EQ(r.runs.size(), 1u);
    EXPECT_EQ(r.ttd(), 200u);
    EXPECT_EQ(r.runs[0].curve.size(), 1u);
}

TEST(Campaign, CurveCrossesExactlyAtTtd) {
    const auto cfg = quick();
    const auto r = campaign::run_campaign(small_pool(), kKey, cfg, 2);
    ASSERT_TRUE(r.ttd());
    const auto& curve = r.runs[0].curve;
    ASSERT_FALSE(curve.empty());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_EQ(curve[i].n, 200 + 25 * i);
        const double rate = double(curve[i].successes) / double(cfg.trials);
        if (i + 1 < curve.size())
            EXPECT_LT(rate, cfg.confidence);
        else
            EXPECT_GE(rate, cfg.confidence);
    }
    EXPECT_EQ(curve.back().n, *r.ttd());
    EXPECT_EQ(r.pool_provenance, campaign::pool_provenance(small_pool()));
    EXPECT_EQ(r.scenario_label, "baseline");
    EXPECT_EQ(r.max_n, 1500u);
}

TEST(Campaign, IndependentOfStorageOrder) {
    const auto cfg = quick();
    std::vector<std::size_t> perm(small_pool().size());
    std::iota(perm.begin(), perm.end(), 0);
    Gen g(3);
    g.shuffle(perm);
    const auto shuffled = small_pool().subset(perm);
    ASSERT_NE(shuffled.powers, small_pool().powers);
    EXPECT_EQ(campaign::run_campaign(small_pool(), kKey, cfg, 4),
              campaign::run_campaign(shuffled, kKey, cfg, 4));
}

TEST(Campaign, IndependentOfWorkerCount) {
    auto cfg = quick();
    cfg.start.reset();
    cfg.workers = 1;
    const auto ref = campaign::run_campaign(small_pool(), kKey, cfg, 5);
    for (unsigned w : {4u, 16u}) {
        cfg.workers = w;
        EXPECT_EQ(campaign::run_campaign(small_pool(), kKey, cfg, 5), ref) << w;
    }
}

TEST(Campaign, SeedChangesTrials) {
    const auto cfg = quick();
    const auto a = campaign::run_campaign(small_pool(), kKey, cfg, 6);
    const auto b = campaign::run_campaign(small_pool(), kKey, cfg, 7);
    EXPECT_NE(a.runs[0].curve, b.runs[0].curve);
}

TEST(Campaign, UndisclosedWithinMaxN) {
    auto cfg = quick(5);
    cfg.start = 100;
    cfg.step = 100;
    cfg.max_n = 400;
    const auto r = campaign::run_campaign(noise_pool(800, 8), kKey, cfg, 1);
    EXPECT_FALSE(r.ttd());
    EXPECT_EQ(r.runs[0].curve.size(), 4u);
    EXPECT_EQ(r.runs[0].curve.back().n, 400u);
    EXPECT_EQ(r.max_n, 400u);
}

TEST(Campaign, RepeatsUseDerivedSeeds) {
    const auto cfg = quick(10);
    const auto r = campaign::run_campaigns(small_pool(), kKey, cfg, 9, 3);
    ASSERT_EQ(r.runs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.runs[i].master_seed, derive_seed(9, Stream::Campaign, {i}));
        EXPECT_EQ(r.runs[i], campaign::run_campaign(small_pool(), kKey, cfg, r.runs[i].master_seed).runs[0]);
    }
    EXPECT_THROW(campaign::run_campaigns(small_pool(), kKey, cfg, 9, 0), ConfigError);
}

TEST(AutoStart, DoublingGrid) {
    auto cfg = quick();
    cfg.start.reset();
    const std::size_t s = campaign::auto_start(small_pool(), kKey, cfg, 10);
    std::size_t probe = cfg.step;
    while (probe < s)
        probe *= 2;
    EXPECT_EQ(probe, s);
    EXPECT_LE(s, small_pool().size());
    const auto r = campaign::run_campaign(small_pool(), kKey, cfg, 10);
    EXPECT_EQ(r.runs[0].start, s);
    ASSERT_TRUE(r.ttd());
    EXPECT_GE(*r.ttd(), s);
}

TEST(AutoStart, Clamps) {
    auto cfg = quick(20);
    cfg.start.reset();
    cfg.confidence = 0.0;
    EXPECT_EQ(campaign::auto_start(small_pool(), kKey, cfg, 1), cfg.step);
    cfg.confidence = 1.0;
    cfg.max_n = 300;
    const std::size_t s = campaign::auto_start(noise_pool(600, 11), kKey, cfg, 1);
    EXPECT_EQ(s, 200u); // 25, 50, 100, 200 probed; 400 > max_n
}

TEST(Rejection, NoiseSetsAreDropped) {
    auto pool = power::synthesize_pool(kKey, 6007, baseline(), asic(), 12);
    Gen g(12);
    for (std::size_t i = 2000; i < 4000; ++i)
        pool.powers[i] = 60 + 3 * g.normal();
    const auto [kept, rep] = campaign::reject_noisy_sets(pool, 2000, 4.0, 4);
    EXPECT_EQ(rep.sets_total, 3u);
    EXPECT_EQ(rep.leftover_traces, 7u);
    EXPECT_EQ(rep.sets_rejected, 1u);
    EXPECT_EQ(rep.rejected, (std::vector<bool>{false, true, false}));
    EXPECT_GT(rep.set_margins[0], 4.0);
    EXPECT_LT(rep.set_margins[1], 4.0);
    ASSERT_EQ(kept.size(), 4000u);
    EXPECT_EQ(kept.id_at(0), 0u);
    EXPECT_EQ(kept.id_at(2000), 4000u);
    EXPECT_EQ(kept.powers[2000], pool.powers[4000]);
}

TEST(Rejection, Contract) {
    EXPECT_THROW(campaign::reject_noisy_sets(small_pool(), 1), ConfigError);
    EXPECT_THROW(campaign::reject_noisy_sets(small_pool(), 1501), ConfigError);
}

TEST(Compare, IdenticalScenariosGiveUnitRatio) {
    const auto a = report_with("a", {700});
    const auto cmp = campaign::compare_scenarios({a, report_with("b", {700})});
    ASSERT_EQ(cmp.ratios.size(), 2u);
    EXPECT_EQ(cmp.ratios[0].ratio, 1.0);
    EXPECT_EQ(campaign::format_ratio(cmp.ratios[0]), "1.00x");
}

TEST(Compare, RatioOfMedians) {
    const auto cmp = campaign::compare_scenarios(
        {report_with("dyn", {1400, 1300, 1500}), report_with("base", {700, 800})});
    EXPECT_EQ(cmp.scenarios[0].median.value, 1400);
    EXPECT_EQ(cmp.scenarios[1].median.value, 750);
    EXPECT_EQ(cmp.scenarios[0].min.value, 1300);
    EXPECT_EQ(cmp.scenarios[0].max.value, 1500);
    EXPECT_EQ(cmp.ratios[0].a, 0u);
    EXPECT_NEAR(cmp.ratios[0].ratio, 1400.0 / 750.0, 1e-12);
    const auto exact = campaign::compare_scenarios({report_with("x", {1400}), report_with("y", {700})});
    EXPECT_EQ(exact.ratios[0].ratio, 2.0);
    EXPECT_EQ(exact.ratios[1].ratio, 0.5);
}

TEST(Compare, UndisclosedIsLowerBound) {
    const auto cmp = campaign::compare_scenarios(
        {report_with("dyn", {std::nullopt}, 5900), report_with("base", {500})});
    EXPECT_EQ(cmp.scenarios[0].undisclosed, 1u);
    EXPECT_TRUE(cmp.scenarios[0].median.lower_bound);
    EXPECT_EQ(cmp.ratios[0].bound, campaign::Bound::Lower);
    EXPECT_EQ(campaign::format_ratio(cmp.ratios[0]), ">11.80x");
    EXPECT_EQ(cmp.ratios[1].bound, campaign::Bound::Upper);
    EXPECT_EQ(campaign::format_ratio(cmp.ratios[1]), "<0.08x");
    const auto both = campaign::compare_scenarios(
        {report_with("a", {std::nullopt}), report_with("b", {std::nullopt})});
    EXPECT_EQ(campaign::format_ratio(both.ratios[0]), "?");
}

TEST(Compare, Contract) {
    EXPECT_THROW(campaign::compare_scenarios({report_with("a", {1})}), ConfigError);
    EXPECT_THROW(campaign::compare_scenarios({}), ConfigError);
    auto b = report_with("b", {1});
    b.pool_provenance = "def";
    EXPECT_THROW(campaign::compare_scenarios({report_with("a", {1}), b}), DataError);
}

TEST(PoolProvenance, FollowsIdentityNotPosition) {
    std::vector<std::size_t> rev(small_pool().size());
    std::iota(rev.rbegin(), rev.rend(), 0);
    EXPECT_EQ(campaign::pool_provenance(small_pool().subset(rev)), campaign::pool_provenance(small_pool()));
    const auto other = power::synthesize_pool(kKey, 1500, baseline(), asic(), 8);
    EXPECT_NE(campaign::pool_provenance(other), campaign::pool_provenance(small_pool()));
}
