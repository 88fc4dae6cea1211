#include "psct/aes.h"
#include "psct/cpa.h"
#include "psct/power.h"
#include "psct/rng.h"
#include "psct/vcd.h"

#include <benchmark/benchmark.h>

#include <sstream>

using namespace psct;

namespace {

const aes::AesKey kKey{{0x2b, 0x7e, 0x15, 0x16, 0x28, 0xae, 0xd2, 0xa6, 0xab, 0xf7, 0x15, 0x88, 0x09, 0xcf, 0x4f, 0x3c}};

tuning::TuningScenario dynamic_joint() {
    return tuning::TuningScenario::uniform(
        "dyn", {tuning::StrengthSetting::dynamic_over(tuning::StrengthUniverse({0.5, 4})),
                tuning::VccSetting::dynamic_over(tuning::VccUniverse({0.9, 0.99, 1.08}, 1.08)),
                tuning::IoEmulation::off()});
}

power::PowerModelParams asic() {
    power::PowerModelParams p;
    p.v_nominal = 1.08;
    return p;
}

void BM_EncryptBlock(benchmark::State& state) {
    aes::AesState pt{};
    for (auto _ : state) {
        const auto tr = aes::encrypt_block(kKey, pt);
        pt.bytes[0] = tr.ciphertext().bytes[0];
        benchmark::DoNotOptimize(pt);
    }
}
BENCHMARK(BM_EncryptBlock);

void BM_SynthesizePool(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(power::synthesize_pool(kKey, n, dynamic_joint(), asic(), 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizePool)->Arg(1000)->Arg(10000);

void BM_IncrementalCpaAdd(benchmark::State& state) {
    const auto pool = power::synthesize_pool(kKey, 4096, dynamic_joint(), asic(), 2);
    cpa::IncrementalCpa inc;
    std::size_t i = 0;
    for (auto _ : state) {
        inc.add(pool.ciphertexts[i], pool.powers[i]);
        i = (i + 1) & 4095;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IncrementalCpaAdd);

void BM_IncrementalCpaCorrelations(benchmark::State& state) {
    const auto pool = power::synthesize_pool(kKey, 1000, dynamic_joint(), asic(), 3);
    cpa::IncrementalCpa inc;
    for (std::size_t i = 0; i < pool.size(); ++i)
        inc.add(pool.ciphertexts[i], pool.powers[i]);
    for (auto _ : state)
        benchmark::DoNotOptimize(inc.best_key());
}
BENCHMARK(BM_IncrementalCpaCorrelations);

void BM_RunCpa(benchmark::State& state) {
    const auto pool = power::synthesize_pool(kKey, static_cast<std::size_t>(state.range(0)), dynamic_joint(),
                                             asic(), 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(cpa::run_cpa(pool));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunCpa)->Arg(1000)->Arg(5000);

std::string counter_vcd(std::size_t cycles) {
    std::ostringstream os;
    os << "$timescale 1ns $end\n$scope module tb $end\n$var wire 1 ! clk $end\n"
          "$var reg 16 \" count [15:0] $end\n$upscope $end\n$enddefinitions $end\n#0\n0!\nb0 \"\n";
    for (std::size_t c = 0; c < cycles; ++c) {
        os << '#' << 10 * c + 5 << "\n1!\nb";
        for (int bit = 15; bit >= 0; --bit)
            os << (((c + 1) >> bit) & 1);
        os << " \"\n#" << 10 * c + 10 << "\n0!\n";
    }
    return os.str();
}

void BM_ParseAndExtractVcd(benchmark::State& state) {
    const std::string text = counter_vcd(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const auto doc = vcd::parse_vcd_string(text);
        benchmark::DoNotOptimize(vcd::extract_toggles(doc, "clk", {{"count", {"count"}}}));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseAndExtractVcd)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
