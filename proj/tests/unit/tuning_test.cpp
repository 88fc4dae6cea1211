#include "psct/error.h"
#include "psct/tuning.h"

#include "gen.h"

#include <gtest/gtest.h>

#include <set>

using namespace psct;
using namespace psct::tuning;

namespace {

const StrengthUniverse kAsicX({0.5, 1, 2, 3, 4});
const VccUniverse kAsicV({0.9, 0.99, 1.08}, 1.08);
const StrengthUniverse kPair({0.5, 4});

TuningScenario dynamic_joint() {
    return TuningScenario::uniform(
        "joint", {StrengthSetting::dynamic_over(kPair), VccSetting::dynamic_over(kAsicV), IoEmulation::off()});
}

} // namespace

TEST(Universe, RejectsMalformedValues) {
    EXPECT_THROW(StrengthUniverse(std::vector<double>{}), ConfigError);
    EXPECT_THROW(StrengthUniverse({1, 1}), ConfigError);
    EXPECT_THROW(StrengthUniverse({2, 1}), ConfigError);
    EXPECT_THROW(StrengthUniverse({0, 1}), ConfigError);
    EXPECT_THROW(VccUniverse({0.9}, 0.0), ConfigError);
    EXPECT_THROW(VccUniverse({-0.9, 1.0}, 1.0), ConfigError);
    EXPECT_NO_THROW(VccUniverse({0.9, 1.08}, 1.08));
}

TEST(GroupPolicy, StaticValueMustBeInUniverse) {
    GroupPolicy p{StrengthSetting::fixed_at(5, kAsicX), VccSetting::fixed_at(1.08, kAsicV), IoEmulation::off()};
    EXPECT_THROW(p.validate(), ConfigError);
    p.strength = StrengthSetting::fixed_at(4, kAsicX);
    EXPECT_NO_THROW(p.validate());
    p.vcc = VccSetting::fixed_at(1.0, kAsicV);
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(SampleAssignment, StaticScenarioYieldsFixedValues) {
    const auto sc = TuningScenario::uniform(
        "s", {StrengthSetting::fixed_at(4, kAsicX), VccSetting::fixed_at(1.08, kAsicV), IoEmulation::off()});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto a = sample_assignment(sc, rng);
        for (double s : a.text_strength)
            ASSERT_EQ(s, 4.0);
        ASSERT_EQ(a.text_vcc, 1.08);
        ASSERT_EQ(a.other_vcc, 1.08);
        ASSERT_EQ(a.other_strength, 4.0);
    }
}

TEST(SampleAssignment, StaticStreamHasZeroVariance) {
    const auto sc = TuningScenario::uniform(
        "s", {StrengthSetting::fixed_at(2, kAsicX), VccSetting::fixed_at(0.99, kAsicV), IoEmulation::fixed_at(4)});
    Rng rng(1);
    const auto first = sample_assignment(sc, rng);
    for (int i = 0; i < 100; ++i)
        ASSERT_EQ(sample_assignment(sc, rng), first);
}

TEST(SampleAssignment, RejectsSingletonDynamicUniverse) {
    Rng rng(1);
    const auto bad_x = TuningScenario::uniform(
        "bad", {StrengthSetting::dynamic_over(StrengthUniverse({2})), VccSetting::fixed_at(1.08, kAsicV),
                IoEmulation::off()});
    EXPECT_THROW(sample_assignment(bad_x, rng), ConfigError);
    const auto bad_v = TuningScenario::uniform(
        "bad", {StrengthSetting::fixed_at(1, kAsicX), VccSetting::dynamic_over(VccUniverse({1.08}, 1.08)),
                IoEmulation::off()});
    EXPECT_THROW(sample_assignment(bad_v, rng), ConfigError);
    const auto bad_io = TuningScenario::uniform(
        "bad", {StrengthSetting::fixed_at(1, kAsicX), VccSetting::fixed_at(1.08, kAsicV),
                IoEmulation::dynamic_over(StrengthUniverse({16}))});
    EXPECT_THROW(sample_assignment(bad_io, rng), ConfigError);
}

TEST(SampleAssignment, PairFrequencyPerFlipFlopIsHalf) {
    const auto sc = dynamic_joint();
    Rng rng(2024);
    const int draws = 100000;
    std::array<int, kTextFlipFlops> low{};
    for (int i = 0; i < draws; ++i) {
        const auto a = sample_assignment(sc, rng);
        for (std::size_t f = 0; f < kTextFlipFlops; ++f)
            low[f] += a.text_strength[f] == 0.5;
    }
    for (std::size_t f = 0; f < kTextFlipFlops; ++f) {
        const double freq = static_cast<double>(low[f]) / draws;
        EXPECT_NEAR(freq, 0.5, 0.01) << "ff " << f;
    }
}

TEST(SampleAssignment, DynamicValuesAlwaysFromUniverse) {
    const auto sc = dynamic_joint();
    Rng rng(3);
    std::set<double> vccs;
    for (int i = 0; i < 3000; ++i) {
        const auto a = sample_assignment(sc, rng);
        for (double s : a.text_strength)
            ASSERT_TRUE(s == 0.5 || s == 4.0);
        ASSERT_TRUE(kAsicV.contains(a.text_vcc));
        ASSERT_EQ(a.other_vcc, a.text_vcc); // shared rail
        vccs.insert(a.text_vcc);
    }
    EXPECT_EQ(vccs.size(), 3u);
}

TEST(SampleAssignment, SeparateRailsDrawIndependently) {
    TuningScenario sc = dynamic_joint();
    sc.shared_rail = false;
    Rng rng(4);
    int differ = 0;
    for (int i = 0; i < 300; ++i) {
        const auto a = sample_assignment(sc, rng);
        differ += a.text_vcc != a.other_vcc;
    }
    EXPECT_GT(differ, 100);
}

TEST(SampleAssignment, DeterministicPerSeed) {
    const auto sc = dynamic_joint();
    Rng a(77), b(77);
    for (int i = 0; i < 50; ++i)
        ASSERT_EQ(sample_assignment(sc, a), sample_assignment(sc, b));
}

TEST(SampleAssignment, DifferentSeedsDiffer) {
    const auto sc = dynamic_joint();
    testkit::Gen g(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::uint64_t s1 = g.u64();
        const std::uint64_t s2 = s1 + 1 + g.index(1000);
        Rng a(s1), b(s2);
        bool any = false;
        for (int i = 0; i < 100 && !any; ++i)
            any = !(sample_assignment(sc, a) == sample_assignment(sc, b));
        EXPECT_TRUE(any);
    }
}

TEST(SampleAssignment, IoEmulationDraws) {
    const auto sc = TuningScenario::uniform(
        "io", {StrengthSetting::fixed_at(1, StrengthUniverse({1})), VccSetting::fixed_at(1.0, VccUniverse({1.0}, 1.0)),
               IoEmulation::dynamic_over(StrengthUniverse({4, 16}))});
    Rng rng(6);
    const auto a = sample_assignment(sc, rng);
    std::set<double> seen(a.io_strength.begin(), a.io_strength.end());
    EXPECT_EQ(seen, (std::set<double>{4, 16}));
    const auto off = TuningScenario::uniform("off", {StrengthSetting::fixed_at(1, StrengthUniverse({1})),
                                                     VccSetting::fixed_at(1.0, VccUniverse({1.0}, 1.0)),
                                                     IoEmulation::off()});
    for (double s : sample_assignment(off, rng).io_strength)
        EXPECT_EQ(s, 0.0);
}

TEST(StaticGrid, FiveByThreeGivesFifteen) {
    const auto grid = enumerate_static_grid(kAsicX, kAsicV);
    ASSERT_EQ(grid.size(), 15u);
    std::set<std::string> labels;
    for (const auto& s : grid) {
        EXPECT_TRUE(s.is_static());
        EXPECT_EQ(s.text_ff, s.other_ff);
        labels.insert(s.label);
    }
    EXPECT_EQ(labels.size(), 15u);
    EXPECT_EQ(grid.front().text_ff.strength.fixed, 0.5);
    EXPECT_EQ(grid.front().text_ff.vcc.fixed, 0.9);
    EXPECT_EQ(grid.back().text_ff.strength.fixed, 4.0);
    EXPECT_EQ(grid.back().text_ff.vcc.fixed, 1.08);
}

TEST(StaticGrid, SingleValues) {
    EXPECT_EQ(enumerate_static_grid(StrengthUniverse({1}), VccUniverse({1.0}, 1.0)).size(), 1u);
}

TEST(StaticGrid, PerGroupCompositionGivesHundred) {
    const StrengthUniverse x5({0.5, 1, 2, 3, 4});
    const VccUniverse v2({0.9, 1.08}, 1.08);
    const auto text = enumerate_static_grid(x5, v2);
    const auto other = enumerate_static_grid(x5, v2);
    const auto combined = combine_group_grids(text, other);
    ASSERT_EQ(combined.size(), 100u);
    std::set<std::string> labels;
    for (const auto& s : combined) {
        EXPECT_FALSE(s.shared_rail);
        labels.insert(s.label);
    }
    EXPECT_EQ(labels.size(), 100u);
}
