#include "psct/campaign.h"

#include "psct/digest.h"
#include "psct/error.h"
#include "psct/parallel.h"
#include "psct/rng.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace psct::campaign {

namespace {

/// Lazily drawn uniform permutation of [0, n): Fisher-Yates with displaced
/// entries kept in a sparse map, so drawing k elements costs O(k).
class LazyPermutation {
public:
    LazyPermutation(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {}

    std::size_t drawn() const { return next_; }

    std::uint32_t draw() {
        const std::uint32_t j = static_cast<std::uint32_t>(next_);
        const std::uint32_t r = static_cast<std::uint32_t>(j + rng_.uniform_index(n_ - j));
        const std::uint32_t vj = value(j);
        const std::uint32_t vr = value(r);
        displaced_[r] = vj;
        ++next_;
        return vr;
    }

private:
    std::uint32_t value(std::uint32_t i) const {
        const auto it = displaced_.find(i);
        return it == displaced_.end() ? i : it->second;
    }

    std::size_t n_;
    std::size_t next_ = 0;
    Rng rng_;
    std::unordered_map<std::uint32_t, std::uint32_t> displaced_;
};

/// Pool view ordered by trace identity, with powers centred on their mean.
struct IdentityView {
    std::vector<std::size_t> by_id;
    std::vector<double> centred; // indexed by position
    aes::AesKey round10;

    IdentityView(const power::TracePool& pool, const aes::AesKey& key) {
        by_id.resize(pool.size());
        std::iota(by_id.begin(), by_id.end(), std::size_t{0});
        std::sort(by_id.begin(), by_id.end(),
                  [&](std::size_t a, std::size_t b) { return pool.id_at(a) < pool.id_at(b); });
        double sum = 0.0;
        for (std::size_t p : by_id)
            sum += pool.powers[p];
        const double mean = sum / static_cast<double>(pool.size());
        centred.resize(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i)
            centred[i] = pool.powers[i] - mean;
        round10 = aes::last_round_key(key);
    }
};

struct Trial {
    LazyPermutation perm;
    cpa::IncrementalCpa acc;

    Trial(std::size_t n, std::uint64_t seed) : perm(n, seed) {}

    void grow_to(std::size_t n, const power::TracePool& pool, const IdentityView& view) {
        while (perm.drawn() < n) {
            const std::size_t pos = view.by_id[perm.draw()];
            acc.add(pool.ciphertexts[pos], view.centred[pos]);
        }
    }
};

std::size_t effective_max(const TtdConfig& cfg, std::size_t pool_size) {
    return cfg.max_n == 0 ? pool_size : std::min(cfg.max_n, pool_size);
}

bool reached(std::size_t successes, std::size_t trials, double confidence) {
    return static_cast<double>(successes) / static_cast<double>(trials) >= confidence;
}

/// Successes out of `trials` fresh trials of exactly n traces each.
std::size_t probe(const power::TracePool& pool, const IdentityView& view, std::size_t n,
                  std::size_t trials, std::uint64_t master_seed, unsigned workers) {
    std::vector<char> ok(trials, 0);
    parallel_for(trials, workers, [&](std::size_t i) {
        Trial t(pool.size(), derive_seed(master_seed, Stream::AutoStart, {n, i}));
        t.grow_to(n, pool, view);
        ok[i] = t.acc.best_key() == view.round10;
    });
    return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
}

std::size_t auto_start_impl(const power::TracePool& pool, const IdentityView& view,
                            const TtdConfig& cfg, std::uint64_t master_seed) {
    const std::size_t max_n = effective_max(cfg, pool.size());
    const std::size_t probe_trials = std::max<std::size_t>(10, cfg.trials / 20);
    std::size_t below = cfg.step;
    for (std::size_t n = cfg.step; n <= max_n; n *= 2) {
        const std::size_t ok = probe(pool, view, n, probe_trials, master_seed, cfg.workers);
        if (reached(ok, probe_trials, cfg.confidence))
            return below;
        below = n;
    }
    return below;
}

const char* kSeedRule =
    "trial i of run r samples the first n entries of a uniform permutation of trace ids "
    "seeded by derive_seed(run_seed, Trial, {i}); run_seed = master for single runs, "
    "derive_seed(master, Campaign, {r}) for repeats";

} // namespace

void TtdConfig::validate() const {
    if (!(confidence >= 0.0 && confidence <= 1.0))
        throw ConfigError("confidence must lie in [0, 1]");
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    if (step < 1)
        throw ConfigError("step must be >= 1");
    if (start && *start < 1)
        throw ConfigError("start must be >= 1");
    if (start && max_n != 0 && *start > max_n)
        throw ConfigError("start exceeds max_n");
}

std::string pool_provenance(const power::TracePool& pool) {
    std::vector<std::size_t> by_id(pool.size());
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return pool.id_at(a) < pool.id_at(b); });
    std::vector<std::uint8_t> bytes;
    bytes.reserve(pool.size() * aes::kBlockBytes);
    for (std::size_t p : by_id)
        bytes.insert(bytes.end(), pool.ciphertexts[p].begin(), pool.ciphertexts[p].end());
    return digest_hex(sha256(bytes));
}

std::size_t auto_start(const power::TracePool& pool, const aes::AesKey& true_key,
                       const TtdConfig& cfg, std::uint64_t master_seed) {
    cfg.validate();
    pool.validate();
    if (pool.size() < 2)
        throw ConfigError("auto_start needs a pool of at least 2 traces");
    const IdentityView view(pool, true_key);
    return auto_start_impl(pool, view, cfg, master_seed);
}

CampaignReport run_campaign(const power::TracePool& pool, const aes::AesKey& true_key,
                            const TtdConfig& cfg, std::uint64_t master_seed) {
    cfg.validate();
    pool.validate();
    const IdentityView view(pool, true_key);
    const std::size_t max_n = effective_max(cfg, pool.size());

    CampaignReport report;
    report.scenario_label = pool.scenario_label;
    report.pool_provenance = pool_provenance(pool);
    report.pool_size = pool.size();
    report.confidence = cfg.confidence;
    report.trials = cfg.trials;
    report.step = cfg.step;
    report.max_n = max_n;
    report.seed_rule = kSeedRule;

    CampaignRun run;
    run.master_seed = master_seed;
    run.start = cfg.start ? *cfg.start : auto_start_impl(pool, view, cfg, master_seed);
    if (run.start > max_n)
        throw ConfigError("campaign start " + std::to_string(run.start) + " exceeds pool size " +
                          std::to_string(max_n));

    std::vector<std::unique_ptr<Trial>> trials;
    trials.reserve(cfg.trials);
    for (std::size_t i = 0; i < cfg.trials; ++i)
        trials.push_back(std::make_unique<Trial>(
            pool.size(), derive_seed(master_seed, Stream::Trial, {i})));

    std::vector<char> ok(cfg.trials, 0);
    for (std::size_t n = run.start; n <= max_n; n += cfg.step) {
        parallel_for(cfg.trials, cfg.workers, [&](std::size_t i) {
            trials[i]->grow_to(n, pool, view);
            ok[i] = trials[i]->acc.best_key() == view.round10;
        });
        const auto successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
        run.curve.push_back({n, successes});
        if (reached(successes, cfg.trials, cfg.confidence)) {
            run.ttd = n;
            break;
        }
    }
    report.runs.push_back(std::move(run));
    return report;
}

CampaignReport run_campaigns(const power::TracePool& pool, const aes::AesKey& true_key,
                             const TtdConfig& cfg, std::uint64_t master_seed, std::size_t repeats) {
    if (repeats < 1)
        throw ConfigError("repeats must be >= 1");
    CampaignReport report;
    for (std::size_t r = 0; r < repeats; ++r) {
        auto one = run_campaign(pool, true_key, cfg, derive_seed(master_seed, Stream::Campaign, {r}));
        if (r == 0) {
            report = std::move(one);
        } else {
            report.runs.push_back(std::move(one.runs.front()));
        }
    }
    return report;
}

std::pair<power::TracePool, RejectionReport>
reject_noisy_sets(const power::TracePool& pool, std::size_t set_size, double threshold,
                  unsigned workers) {
    pool.validate();
    if (set_size < 2)
        throw ConfigError("set_size must be >= 2");
    if (set_size > pool.size())
        throw ConfigError("set_size " + std::to_string(set_size) + " exceeds pool size " +
                          std::to_string(pool.size()));

    RejectionReport rep;
    rep.sets_total = pool.size() / set_size;
    rep.leftover_traces = pool.size() % set_size;
    rep.set_margins.assign(rep.sets_total, 0.0);
    rep.rejected.assign(rep.sets_total, false);

    std::vector<char> keep(rep.sets_total, 0);
    parallel_for(rep.sets_total, workers, [&](std::size_t s) {
        std::vector<std::size_t> positions(set_size);
        std::iota(positions.begin(), positions.end(), s * set_size);
        const auto result = cpa::run_cpa(pool.subset(positions));
        rep.set_margins[s] = *std::min_element(result.margins.begin(), result.margins.end());
        keep[s] = cpa::significant_outlier(result, threshold);
    });

    std::vector<std::size_t> survivors;
    for (std::size_t s = 0; s < rep.sets_total; ++s) {
        rep.rejected[s] = !keep[s];
        if (keep[s]) {
            for (std::size_t i = 0; i < set_size; ++i)
                survivors.push_back(s * set_size + i);
        } else {
            ++rep.sets_rejected;
        }
    }
    auto filtered = pool.subset(survivors);
    return {std::move(filtered), rep};
}

namespace {

ScenarioSummary summarize_report(const CampaignReport& r) {
    ScenarioSummary s;
    s.label = r.scenario_label;
    s.campaigns = r.runs.size();
    std::vector<TtdValue> values;
    for (const auto& run : r.runs) {
        if (run.ttd) {
            values.push_back({static_cast<double>(*run.ttd), false});
        } else {
            values.push_back({static_cast<double>(r.max_n), true});
            ++s.undisclosed;
        }
    }
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end(),
              [](const TtdValue& a, const TtdValue& b) { return a.value < b.value; });
    s.min = values.front();
    s.max = values.back();
    const std::size_t m = values.size();
    if (m % 2 == 1) {
        s.median = values[m / 2];
    } else {
        s.median = {(values[m / 2 - 1].value + values[m / 2].value) / 2.0,
                    values[m / 2 - 1].lower_bound || values[m / 2].lower_bound};
    }
    double sum = 0.0;
    bool any_bound = false;
    for (const auto& v : values) {
        sum += v.value;
        any_bound = any_bound || v.lower_bound;
    }
    s.mean = {sum / static_cast<double>(m), any_bound};
    return s;
}

} // namespace

Comparison compare_scenarios(const std::vector<CampaignReport>& reports) {
    if (reports.size() < 2)
        throw ConfigError("compare needs at least two campaign reports");
    for (const auto& r : reports) {
        if (r.pool_provenance != reports.front().pool_provenance)
            throw DataError("reports '" + reports.front().scenario_label + "' and '" +
                            r.scenario_label +
                            "' were run on different key/plaintext pools (provenance mismatch)");
    }
    Comparison cmp;
    for (const auto& r : reports)
        cmp.scenarios.push_back(summarize_report(r));

    for (std::size_t a = 0; a < cmp.scenarios.size(); ++a) {
        for (std::size_t b = 0; b < cmp.scenarios.size(); ++b) {
            if (a == b)
                continue;
            const TtdValue& x = cmp.scenarios[a].median;
            const TtdValue& y = cmp.scenarios[b].median;
            ResilienceRatio rr{a, b, y.value > 0.0 ? x.value / y.value : 0.0, Bound::Exact};
            if (x.lower_bound && y.lower_bound)
                rr.bound = Bound::Unknown;
            else if (x.lower_bound)
                rr.bound = Bound::Lower;
            else if (y.lower_bound)
                rr.bound = Bound::Upper;
            cmp.ratios.push_back(rr);
        }
    }
    return cmp;
}

std::string format_ratio(const ResilienceRatio& r) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    switch (r.bound) {
    case Bound::Exact:
        break;
    case Bound::Lower:
        os << '>';
        break;
    case Bound::Upper:
        os << '<';
        break;
    case Bound::Unknown:
        return "?";
    }
    os << r.ratio << 'x';
    return os.str();
}

} // namespace psct::campaign
