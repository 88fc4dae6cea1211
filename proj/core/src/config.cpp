#include "psct/config.h"

#include "psct/error.h"
#include "psct/hex.h"
#include "psct/parallel.h"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace psct::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config " + where + ": " + what);
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number())
        fail(where, "expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& where) {
    if (!v.is_number_unsigned())
        fail(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string())
        fail(where, "expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array())
        fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

tuning::Mode mode_of(const json& v, const std::string& where) {
    const std::string m = text(v, where);
    if (m == "static")
        return tuning::Mode::Static;
    if (m == "dynamic")
        return tuning::Mode::Dynamic;
    fail(where, "mode must be \"static\" or \"dynamic\", got \"" + m + "\"");
}

template <typename F>
auto guarded(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
}

tuning::IoEmulation parse_io(const json& v, const std::string& where) {
    if (v.is_string()) {
        if (v.get<std::string>() == "off")
            return tuning::IoEmulation::off();
        fail(where, "expected \"off\" or an object");
    }
    if (!v.is_object())
        fail(where, "expected \"off\" or an object");
    const json* m = find(v, "mode");
    if (!m)
        fail(where, "missing \"mode\"");
    if (mode_of(*m, where + ".mode") == tuning::Mode::Static) {
        const json* s = find(v, "strength");
        if (!s)
            fail(where, "static IO emulation needs \"strength\"");
        return tuning::IoEmulation::fixed_at(number(*s, where + ".strength"));
    }
    const json* s = find(v, "strengths");
    if (!s)
        fail(where, "dynamic IO emulation needs \"strengths\"");
    return guarded(where, [&] {
        return tuning::IoEmulation::dynamic_over(tuning::StrengthUniverse(numbers(*s, where + ".strengths")));
    });
}

tuning::GroupPolicy parse_group(const json& g, double v_nominal, const std::string& where) {
    tuning::Mode ms = tuning::Mode::Static;
    tuning::Mode mv = tuning::Mode::Static;
    if (const json* mode = find(g, "mode")) {
        if (!mode->is_object())
            fail(where + ".mode", "expected {\"strength\": ..., \"vcc\": ...}");
        if (const json* s = find(*mode, "strength"))
            ms = mode_of(*s, where + ".mode.strength");
        if (const json* v = find(*mode, "vcc"))
            mv = mode_of(*v, where + ".mode.vcc");
    }

    const json* strengths = find(g, "strengths");
    const json* vccs = find(g, "vccs");
    const json* strength = find(g, "strength");
    const json* vcc = find(g, "vcc");
    if (ms == tuning::Mode::Dynamic && !strengths)
        fail(where, "dynamic strength needs \"strengths\"");
    if (mv == tuning::Mode::Dynamic && !vccs)
        fail(where, "dynamic vcc needs \"vccs\"");

    const double s_fixed = strength ? number(*strength, where + ".strength") : 1.0;
    const double v_fixed = vcc ? number(*vcc, where + ".vcc") : v_nominal;

    tuning::GroupPolicy p;
    guarded(where, [&] {
        const tuning::StrengthUniverse su(strengths ? numbers(*strengths, where + ".strengths")
                                                    : std::vector<double>{s_fixed});
        const tuning::VccUniverse vu(vccs ? numbers(*vccs, where + ".vccs") : std::vector<double>{v_fixed},
                                     v_nominal);
        p.strength = ms == tuning::Mode::Static ? tuning::StrengthSetting::fixed_at(s_fixed, su)
                                                : tuning::StrengthSetting::dynamic_over(su);
        p.vcc = mv == tuning::Mode::Static ? tuning::VccSetting::fixed_at(v_fixed, vu)
                                           : tuning::VccSetting::dynamic_over(vu);
        return 0;
    });
    if (const json* io = find(g, "io_emulation"))
        p.io = parse_io(*io, where + ".io_emulation");
    guarded(where, [&] {
        p.validate();
        return 0;
    });
    return p;
}

tuning::TuningScenario parse_scenario(const json& s, double v_nominal, const std::string& where) {
    if (!s.is_object())
        fail(where, "expected an object");
    const json* label = find(s, "label");
    if (!label)
        fail(where, "missing \"label\"");
    const json* groups = find(s, "groups");
    if (!groups || !groups->is_array() || groups->empty())
        fail(where, "\"groups\" must be a non-empty array");

    tuning::TuningScenario sc;
    sc.label = text(*label, where + ".label");
    const tuning::GroupPolicy nominal = parse_group(json::object(), v_nominal, where);
    sc.text_ff = nominal;
    sc.other_ff = nominal;
    bool split = false;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < groups->size(); ++i) {
        const std::string gw = where + ".groups[" + std::to_string(i) + "]";
        const json& g = (*groups)[i];
        if (!g.is_object())
            fail(gw, "expected an object");
        const json* name = find(g, "group");
        const std::string which = name ? text(*name, gw + ".group") : "all";
        if (!seen.insert(which).second)
            fail(gw, "group \"" + which + "\" given twice");
        const tuning::GroupPolicy p = parse_group(g, v_nominal, gw);
        if (which == "all") {
            sc.text_ff = p;
            sc.other_ff = p;
        } else if (which == "text") {
            sc.text_ff = p;
            split = true;
        } else if (which == "other") {
            sc.other_ff = p;
            split = true;
        } else {
            fail(gw + ".group", "expected \"all\", \"text\" or \"other\", got \"" + which + "\"");
        }
    }
    if (seen.count("all") && split)
        fail(where, "\"all\" cannot be combined with per-group policies");
    sc.shared_rail = !split;
    if (const json* r = find(s, "shared_rail")) {
        if (!r->is_boolean())
            fail(where + ".shared_rail", "expected a boolean");
        sc.shared_rail = r->get<bool>();
    }
    return sc;
}

VcdSettings parse_vcd_settings(const json& v) {
    if (!v.is_object())
        fail("vcd", "expected an object");
    VcdSettings out;
    if (const json* c = find(v, "clock"))
        out.clock = text(*c, "vcd.clock");
    const json* groups = find(v, "groups");
    if (!groups || !groups->is_array() || groups->empty())
        fail("vcd.groups", "expected a non-empty array");
    for (std::size_t i = 0; i < groups->size(); ++i) {
        const std::string w = "vcd.groups[" + std::to_string(i) + "]";
        const json& g = (*groups)[i];
        const json* name = find(g, "name");
        const json* pats = find(g, "patterns");
        if (!name || !pats || !pats->is_array())
            fail(w, "needs \"name\" and a \"patterns\" array");
        vcd::GroupRule rule{text(*name, w + ".name"), {}};
        for (const auto& p : *pats)
            rule.patterns.push_back(text(p, w + ".patterns"));
        out.groups.push_back(std::move(rule));
    }
    if (const json* t = find(v, "text_group"))
        out.text_group = text(*t, "vcd.text_group");
    if (const json* o = find(v, "other_group"))
        out.other_group = text(*o, "vcd.other_group");
    if (const json* s = find(v, "stride"))
        out.selection.stride = count(*s, "vcd.stride");
    if (const json* o = find(v, "offset"))
        out.selection.offset = count(*o, "vcd.offset");
    if (out.selection.stride == 0)
        fail("vcd.stride", "must be >= 1");
    if (const json* c = find(v, "ciphertexts"))
        out.ciphertexts = text(*c, "vcd.ciphertexts");
    return out;
}

} // namespace

const tuning::TuningScenario& ExperimentConfig::scenario(const std::string& label) const {
    for (const auto& s : scenarios)
        if (s.label == label)
            return s;
    std::string known;
    for (const auto& s : scenarios)
        known += (known.empty() ? "" : ", ") + s.label;
    throw ConfigError("unknown scenario label '" + label + "' (known: " + known + ")");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object())
        fail("root", "expected an object");

    ExperimentConfig cfg;
    cfg.digest = digest_hex(sha256(root.dump()));

    const json* key = find(root, "key");
    if (!key)
        fail("key", "missing");
    cfg.key.bytes = guarded("key", [&] { return parse_hex16(text(*key, "key")); });
    if (const json* n = find(root, "pool_size"))
        cfg.pool_size = count(*n, "pool_size");
    if (cfg.pool_size == 0)
        fail("pool_size", "must be >= 1");
    if (const json* s = find(root, "master_seed"))
        cfg.master_seed = count(*s, "master_seed");

    if (const json* p = find(root, "params")) {
        if (!p->is_object())
            fail("params", "expected an object");
        auto field = [&](const char* name, double& dst) {
            if (const json* v = find(*p, name))
                dst = number(*v, std::string("params.") + name);
        };
        field("v_nominal", cfg.params.v_nominal);
        field("background_mean", cfg.params.background_mean);
        field("background_jitter_sd", cfg.params.background_jitter_sd);
        field("noise_sd", cfg.params.noise_sd);
        field("io_leak_weight", cfg.params.io_leak_weight);
    }
    guarded("params", [&] {
        cfg.params.validate();
        return 0;
    });

    cfg.ttd.workers = default_workers();
    if (const json* t = find(root, "ttd")) {
        if (!t->is_object())
            fail("ttd", "expected an object");
        if (const json* v = find(*t, "confidence"))
            cfg.ttd.confidence = number(*v, "ttd.confidence");
        if (const json* v = find(*t, "trials"))
            cfg.ttd.trials = count(*v, "ttd.trials");
        if (const json* v = find(*t, "step"))
            cfg.ttd.step = count(*v, "ttd.step");
        if (const json* v = find(*t, "start"); v && !(v->is_string() && v->get<std::string>() == "auto"))
            cfg.ttd.start = count(*v, "ttd.start");
        if (const json* v = find(*t, "max_n"))
            cfg.ttd.max_n = count(*v, "ttd.max_n");
    }
    if (const json* w = find(root, "workers"))
        cfg.ttd.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, count(*w, "workers")));
    guarded("ttd", [&] {
        cfg.ttd.validate();
        return 0;
    });

    if (const json* t = find(root, "outlier_threshold"))
        cfg.outlier_threshold = number(*t, "outlier_threshold");
    if (!(cfg.outlier_threshold >= 0.0))
        fail("outlier_threshold", "must be >= 0");
    if (const json* r = find(root, "repeats"))
        cfg.repeats = count(*r, "repeats");
    if (cfg.repeats == 0)
        fail("repeats", "must be >= 1");
    if (const json* o = find(root, "output_dir"))
        cfg.output_dir = text(*o, "output_dir");

    if (const json* grid = find(root, "static_grid")) {
        const json* s = find(*grid, "strengths");
        const json* v = find(*grid, "vccs");
        if (!s || !v)
            fail("static_grid", "needs \"strengths\" and \"vccs\"");
        auto scenarios = guarded("static_grid", [&] {
            return tuning::enumerate_static_grid(
                tuning::StrengthUniverse(numbers(*s, "static_grid.strengths")),
                tuning::VccUniverse(numbers(*v, "static_grid.vccs"), cfg.params.v_nominal));
        });
        cfg.scenarios.insert(cfg.scenarios.end(), scenarios.begin(), scenarios.end());
    }
    if (const json* list = find(root, "scenarios")) {
        if (!list->is_array())
            fail("scenarios", "expected an array");
        for (std::size_t i = 0; i < list->size(); ++i)
            cfg.scenarios.push_back(
                parse_scenario((*list)[i], cfg.params.v_nominal, "scenarios[" + std::to_string(i) + "]"));
    }
    std::set<std::string> labels;
    for (const auto& s : cfg.scenarios)
        if (!labels.insert(s.label).second)
            fail("scenarios", "duplicate label '" + s.label + "'");

    if (const json* v = find(root, "vcd"))
        cfg.vcd = parse_vcd_settings(*v);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

const char* mode_name(tuning::Mode m) { return m == tuning::Mode::Static ? "static" : "dynamic"; }

json policy_json(const tuning::GroupPolicy& p) {
    json io;
    switch (p.io.kind) {
    case tuning::IoEmulation::Kind::Off:
        io = "off";
        break;
    case tuning::IoEmulation::Kind::Static:
        io = {{"mode", "static"}, {"strength", p.io.fixed}};
        break;
    case tuning::IoEmulation::Kind::Dynamic:
        io = {{"mode", "dynamic"}, {"strengths", p.io.universe.values()}};
        break;
    }
    json out = {{"mode", {{"strength", mode_name(p.strength.mode)}, {"vcc", mode_name(p.vcc.mode)}}},
                {"strengths", p.strength.universe.values()},
                {"vccs", p.vcc.universe.values()},
                {"v_nominal", p.vcc.universe.nominal()},
                {"io_emulation", io}};
    if (p.strength.mode == tuning::Mode::Static)
        out["strength"] = p.strength.fixed;
    if (p.vcc.mode == tuning::Mode::Static)
        out["vcc"] = p.vcc.fixed;
    return out;
}

} // namespace

std::string scenario_json(const tuning::TuningScenario& scenario) {
    const json j = {{"label", scenario.label},
                    {"shared_rail", scenario.shared_rail},
                    {"text", policy_json(scenario.text_ff)},
                    {"other", policy_json(scenario.other_ff)}};
    return j.dump();
}

Digest scenario_digest(const tuning::TuningScenario& scenario) {
    return sha256(scenario_json(scenario));
}

} // namespace psct::config
