#include "psct/tuning.h"

#include "psct/error.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace psct::tuning {

namespace {

void check_ordered_positive(const std::vector<double>& values, const char* what) {
    if (values.empty())
        throw ConfigError(std::string(what) + " universe is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw ConfigError(std::string(what) + " values must be finite and > 0");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw ConfigError(std::string(what) + " values must be strictly increasing");
    }
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double pick(const std::vector<double>& values, Rng& rng) {
    return values[rng.uniform_index(values.size())];
}

} // namespace

StrengthUniverse::StrengthUniverse(std::vector<double> values) : values_(std::move(values)) {
    check_ordered_positive(values_, "strength");
}

bool StrengthUniverse::contains(double v) const {
    return std::find(values_.begin(), values_.end(), v) != values_.end();
}

VccUniverse::VccUniverse(std::vector<double> values, double nominal)
    : values_(std::move(values)), nominal_(nominal) {
    check_ordered_positive(values_, "vcc");
    if (!(nominal_ > 0.0))
        throw ConfigError("nominal vcc must be > 0");
}

bool VccUniverse::contains(double v) const {
    return std::find(values_.begin(), values_.end(), v) != values_.end();
}

StrengthSetting StrengthSetting::fixed_at(double value) {
    return fixed_at(value, StrengthUniverse({value}));
}

StrengthSetting StrengthSetting::fixed_at(double value, StrengthUniverse universe) {
    return {Mode::Static, value, std::move(universe)};
}

StrengthSetting StrengthSetting::dynamic_over(StrengthUniverse universe) {
    const double first = universe.values().empty() ? 0.0 : universe.values().front();
    return {Mode::Dynamic, first, std::move(universe)};
}

VccSetting VccSetting::fixed_at(double value, double nominal) {
    return fixed_at(value, VccUniverse({value}, nominal));
}

VccSetting VccSetting::fixed_at(double value, VccUniverse universe) {
    return {Mode::Static, value, std::move(universe)};
}

VccSetting VccSetting::dynamic_over(VccUniverse universe) {
    const double first = universe.values().empty() ? 0.0 : universe.values().front();
    return {Mode::Dynamic, first, std::move(universe)};
}

IoEmulation IoEmulation::fixed_at(double strength) {
    return {Kind::Static, strength, StrengthUniverse({strength})};
}

IoEmulation IoEmulation::dynamic_over(StrengthUniverse universe) {
    return {Kind::Dynamic, 0.0, std::move(universe)};
}

void GroupPolicy::validate() const {
    if (strength.universe.size() == 0)
        throw ConfigError("strength setting has no universe");
    if (vcc.universe.size() == 0)
        throw ConfigError("vcc setting has no universe");
    if (strength.mode == Mode::Static && !strength.universe.contains(strength.fixed))
        throw ConfigError("static strength " + num(strength.fixed) + " not in declared universe");
    if (vcc.mode == Mode::Static && !vcc.universe.contains(vcc.fixed))
        throw ConfigError("static vcc " + num(vcc.fixed) + " not in declared universe");
    if (strength.mode == Mode::Dynamic && strength.universe.size() < 2)
        throw ConfigError("dynamic strength over a single value is degenerate");
    if (vcc.mode == Mode::Dynamic && vcc.universe.size() < 2)
        throw ConfigError("dynamic vcc over a single value is degenerate");
    switch (io.kind) {
    case IoEmulation::Kind::Off:
        break;
    case IoEmulation::Kind::Static:
        if (!(io.fixed > 0.0))
            throw ConfigError("static io strength must be > 0");
        break;
    case IoEmulation::Kind::Dynamic:
        if (io.universe.size() < 2)
            throw ConfigError("dynamic io emulation over a single value is degenerate");
        break;
    }
}

bool GroupPolicy::is_static() const {
    return strength.mode == Mode::Static && vcc.mode == Mode::Static &&
           io.kind != IoEmulation::Kind::Dynamic;
}

void TuningScenario::validate() const {
    text_ff.validate();
    other_ff.validate();
}

TuningScenario TuningScenario::uniform(std::string label, const GroupPolicy& policy) {
    return {std::move(label), policy, policy, true};
}

TuningAssignment sample_assignment(const TuningScenario& scenario, Rng& rng) {
    scenario.validate();
    TuningAssignment a;

    const GroupPolicy& text = scenario.text_ff;
    if (text.strength.mode == Mode::Static) {
        a.text_strength.fill(text.strength.fixed);
    } else {
        for (double& s : a.text_strength)
            s = pick(text.strength.universe.values(), rng);
    }

    switch (text.io.kind) {
    case IoEmulation::Kind::Off:
        a.io_strength.fill(0.0);
        break;
    case IoEmulation::Kind::Static:
        a.io_strength.fill(text.io.fixed);
        break;
    case IoEmulation::Kind::Dynamic:
        for (double& s : a.io_strength)
            s = pick(text.io.universe.values(), rng);
        break;
    }

    a.text_vcc = text.vcc.mode == Mode::Static ? text.vcc.fixed
                                               : pick(text.vcc.universe.values(), rng);

    const GroupPolicy& other = scenario.other_ff;
    // The non-text registers are aggregated into one background load.
    a.other_strength = other.strength.mode == Mode::Static
                           ? other.strength.fixed
                           : pick(other.strength.universe.values(), rng);

    if (scenario.shared_rail)
        a.other_vcc = a.text_vcc;
    else
        a.other_vcc = other.vcc.mode == Mode::Static ? other.vcc.fixed
                                                     : pick(other.vcc.universe.values(), rng);
    return a;
}

std::vector<TuningScenario> enumerate_static_grid(const StrengthUniverse& strengths,
                                                  const VccUniverse& vccs) {
    if (strengths.size() == 0 || vccs.size() == 0)
        throw ConfigError("static grid needs non-empty universes");
    std::vector<TuningScenario> grid;
    grid.reserve(strengths.size() * vccs.size());
    for (double s : strengths.values()) {
        for (double v : vccs.values()) {
            GroupPolicy p{StrengthSetting::fixed_at(s, strengths), VccSetting::fixed_at(v, vccs),
                          IoEmulation::off()};
            grid.push_back(TuningScenario::uniform("static-X" + num(s) + "-" + num(v) + "V", p));
        }
    }
    return grid;
}

std::vector<TuningScenario> combine_group_grids(const std::vector<TuningScenario>& text_grid,
                                                const std::vector<TuningScenario>& other_grid) {
    std::vector<TuningScenario> out;
    out.reserve(text_grid.size() * other_grid.size());
    for (const auto& t : text_grid) {
        for (const auto& o : other_grid) {
            out.push_back({"text[" + t.label + "]/other[" + o.label + "]", t.text_ff, o.other_ff,
                           false});
        }
    }
    return out;
}

} // namespace psct::tuning
