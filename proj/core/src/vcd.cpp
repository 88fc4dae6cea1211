#include "psct/vcd.h"

#include "psct/hex.h"
#include "psct/rng.h"

#include <fnmatch.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace psct::vcd {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DataError("vcd line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

struct Token {
    std::string text;
    std::size_t line;
};

/// Whitespace tokenizer that remembers line numbers.
class Lexer {
public:
    explicit Lexer(std::istream& in) : in_(in) {}

    std::optional<Token> next() {
        while (pos_ >= current_.size()) {
            if (!std::getline(in_, current_))
                return std::nullopt;
            ++line_;
            pos_ = 0;
        }
        while (pos_ < current_.size() && std::isspace(static_cast<unsigned char>(current_[pos_])))
            ++pos_;
        if (pos_ >= current_.size())
            return next();
        const std::size_t begin = pos_;
        while (pos_ < current_.size() && !std::isspace(static_cast<unsigned char>(current_[pos_])))
            ++pos_;
        return Token{current_.substr(begin, pos_ - begin), line_};
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::string current_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

bool is_scalar_char(char c) {
    switch (c) {
    case '0': case '1': case 'x': case 'X': case 'z': case 'Z':
        return true;
    default:
        return false;
    }
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string leaf_of(const std::string& name) {
    const auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(dot + 1);
}

Timescale parse_timescale(const std::vector<Token>& toks, std::size_t line) {
    std::string joined;
    for (const auto& t : toks)
        joined += t.text;
    std::size_t i = 0;
    while (i < joined.size() && std::isdigit(static_cast<unsigned char>(joined[i])))
        ++i;
    if (i == 0)
        throw ParseError(line, "malformed $timescale '" + joined + "'");
    Timescale ts;
    ts.magnitude = std::stoi(joined.substr(0, i));
    ts.unit = joined.substr(i);
    static const std::set<std::string> units = {"s", "ms", "us", "ns", "ps", "fs"};
    if ((ts.magnitude != 1 && ts.magnitude != 10 && ts.magnitude != 100) || !units.count(ts.unit))
        throw ParseError(line, "malformed $timescale '" + joined + "'");
    return ts;
}

/// Collects tokens up to the closing $end of a directive.
std::vector<Token> until_end(Lexer& lex, const Token& opener) {
    std::vector<Token> out;
    while (auto t = lex.next()) {
        if (t->text == "$end")
            return out;
        out.push_back(*t);
    }
    throw ParseError(lex.line(), "missing $end for " + opener.text + " opened on line " +
                                     std::to_string(opener.line));
}

} // namespace

std::string VcdDocument::find_code(std::string_view name) const {
    for (const auto& [code, sig] : signals) {
        if (sig.name == name)
            return code;
        for (const auto& a : sig.aliases)
            if (a == name)
                return code;
    }
    std::optional<std::string> found;
    for (const auto& [code, sig] : signals) {
        if (leaf_of(sig.name) == name) {
            if (found)
                throw DataError("signal name '" + std::string(name) + "' is ambiguous");
            found = code;
        }
    }
    if (!found)
        throw DataError("signal '" + std::string(name) + "' not found in VCD");
    return *found;
}

VcdDocument parse_vcd(std::istream& in) {
    VcdDocument doc;
    Lexer lex(in);
    std::vector<std::string> scope;
    bool definitions_done = false;

    // Header.
    while (auto tok = lex.next()) {
        const std::string& t = tok->text;
        if (t == "$enddefinitions") {
            until_end(lex, *tok);
            definitions_done = true;
            break;
        }
        if (t == "$timescale") {
            doc.timescale = parse_timescale(until_end(lex, *tok), tok->line);
        } else if (t == "$scope") {
            const auto body = until_end(lex, *tok);
            if (body.size() != 2)
                throw ParseError(tok->line, "malformed $scope");
            scope.push_back(body[1].text);
        } else if (t == "$upscope") {
            until_end(lex, *tok);
            if (scope.empty())
                throw ParseError(tok->line, "$upscope without open scope");
            scope.pop_back();
        } else if (t == "$var") {
            const auto body = until_end(lex, *tok);
            if (body.size() < 4)
                throw ParseError(tok->line, "malformed $var declaration");
            if (!all_digits(body[1].text) || std::stoul(body[1].text) == 0)
                throw ParseError(tok->line, "malformed $var width '" + body[1].text + "'");
            const std::size_t width = std::stoul(body[1].text);
            std::string name;
            for (const auto& s : scope)
                name += s + ".";
            name += body[3].text;
            const std::string& code = body[2].text;
            auto it = doc.signals.find(code);
            if (it == doc.signals.end()) {
                doc.signals.emplace(code, Signal{name, width, {}});
                doc.declaration_order.push_back(code);
            } else {
                if (it->second.width != width)
                    throw ParseError(tok->line, "code '" + code + "' redeclared with another width");
                it->second.aliases.push_back(name);
            }
        } else if (t == "$date" || t == "$version" || t == "$comment") {
            until_end(lex, *tok);
        } else if (!t.empty() && t[0] == '$') {
            until_end(lex, *tok);
            doc.warnings.push_back("line " + std::to_string(tok->line) + ": skipped directive " + t);
        } else {
            throw ParseError(tok->line, "unexpected token '" + t + "' in header");
        }
    }
    if (!definitions_done)
        throw ParseError(lex.line(), "truncated header: missing $enddefinitions");

    // Value changes.
    std::uint64_t now = 0;
    std::optional<std::uint64_t> last_stamp;
    bool in_block = false;
    bool warned_real = false;

    auto truncated = [&](std::size_t line, const std::string& what) {
        const std::string where =
            last_stamp ? "after timestamp #" + std::to_string(*last_stamp) : "before first timestamp";
        return ParseError(line, "truncated input " + where + ": " + what);
    };
    auto record = [&](const Token& tok, const std::string& code, std::string value) {
        auto it = doc.signals.find(code);
        if (it == doc.signals.end())
            throw ParseError(tok.line, "undeclared identifier code '" + code + "'");
        const std::size_t width = it->second.width;
        if (value.size() > width)
            throw ParseError(tok.line, "value wider than " + std::to_string(width) +
                                           " bits for '" + code + "'");
        if (value.size() < width) {
            const char pad = (value[0] == 'x' || value[0] == 'z') ? value[0] : '0';
            value.insert(value.begin(), width - value.size(), pad);
        }
        doc.events.push_back({now, code, std::move(value)});
    };

    while (auto tok = lex.next()) {
        const std::string& t = tok->text;
        if (t[0] == '#') {
            const std::string digits = t.substr(1);
            if (!all_digits(digits))
                throw ParseError(tok->line, "malformed timestamp '" + t + "'");
            const std::uint64_t stamp = std::stoull(digits);
            if (last_stamp && stamp < *last_stamp)
                throw ParseError(tok->line, "timestamp #" + digits + " goes backwards");
            if (in_block)
                throw truncated(tok->line, "unterminated dump block");
            now = stamp;
            last_stamp = stamp;
        } else if (t == "$dumpvars" || t == "$dumpall" || t == "$dumpon" || t == "$dumpoff") {
            in_block = true;
        } else if (t == "$end") {
            if (!in_block)
                doc.warnings.push_back("line " + std::to_string(tok->line) + ": stray $end");
            in_block = false;
        } else if (t == "$comment") {
            until_end(lex, *tok);
        } else if (t[0] == '$') {
            until_end(lex, *tok);
            doc.warnings.push_back("line " + std::to_string(tok->line) + ": skipped directive " + t);
        } else if (t[0] == 'b' || t[0] == 'B') {
            std::string value;
            for (char c : t.substr(1)) {
                if (!is_scalar_char(c))
                    throw ParseError(tok->line, "malformed vector value '" + t + "'");
                value.push_back(lower(c));
            }
            if (value.empty())
                throw ParseError(tok->line, "empty vector value");
            const auto code = lex.next();
            if (!code)
                throw truncated(tok->line, "vector value without identifier");
            record(*tok, code->text, std::move(value));
        } else if (t[0] == 'r' || t[0] == 'R') {
            const auto code = lex.next();
            if (!code)
                throw truncated(tok->line, "real value without identifier");
            if (!doc.signals.count(code->text))
                throw ParseError(tok->line, "undeclared identifier code '" + code->text + "'");
            if (!warned_real) {
                doc.warnings.push_back("line " + std::to_string(tok->line) +
                                       ": real-valued changes are skipped");
                warned_real = true;
            }
        } else if (is_scalar_char(t[0])) {
            if (t.size() < 2)
                throw truncated(tok->line, "scalar value without identifier");
            record(*tok, t.substr(1), std::string(1, lower(t[0])));
        } else {
            throw ParseError(tok->line, "unexpected token '" + t + "'");
        }
    }
    if (in_block)
        throw truncated(lex.line(), "unterminated dump block");
    return doc;
}

VcdDocument parse_vcd_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_vcd(in);
}

VcdDocument parse_vcd_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open VCD file '" + path + "'");
    return parse_vcd(in);
}

std::string write_vcd(const VcdDocument& doc) {
    std::ostringstream os;
    os << "$timescale " << doc.timescale.magnitude << doc.timescale.unit << " $end\n";

    std::vector<std::string> open;
    auto declare = [&](const std::string& full, const std::string& code, std::size_t width) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t dot; (dot = full.find('.', start)) != std::string::npos; start = dot + 1)
            parts.push_back(full.substr(start, dot - start));
        const std::string leaf = full.substr(start);
        std::size_t common = 0;
        while (common < open.size() && common < parts.size() && open[common] == parts[common])
            ++common;
        while (open.size() > common) {
            os << "$upscope $end\n";
            open.pop_back();
        }
        for (std::size_t i = common; i < parts.size(); ++i) {
            os << "$scope module " << parts[i] << " $end\n";
            open.push_back(parts[i]);
        }
        os << "$var " << (width == 1 ? "wire" : "reg") << ' ' << width << ' ' << code << ' '
           << leaf << " $end\n";
    };
    for (const auto& code : doc.declaration_order) {
        const Signal& s = doc.signals.at(code);
        declare(s.name, code, s.width);
        for (const auto& a : s.aliases)
            declare(a, code, s.width);
    }
    while (!open.empty()) {
        os << "$upscope $end\n";
        open.pop_back();
    }
    os << "$enddefinitions $end\n";

    std::optional<std::uint64_t> current;
    for (const auto& e : doc.events) {
        if (!current || *current != e.time) {
            os << '#' << e.time << '\n';
            current = e.time;
        }
        if (doc.signals.at(e.id).width == 1)
            os << e.value << e.id << '\n';
        else
            os << 'b' << e.value << ' ' << e.id << '\n';
    }
    return os.str();
}

namespace {

bool matches(const Signal& s, const GroupRule& rule) {
    auto test = [&](const std::string& name) {
        const std::string leaf = leaf_of(name);
        for (const auto& p : rule.patterns) {
            if (fnmatch(p.c_str(), name.c_str(), 0) == 0 || fnmatch(p.c_str(), leaf.c_str(), 0) == 0)
                return true;
        }
        return false;
    };
    if (test(s.name))
        return true;
    return std::any_of(s.aliases.begin(), s.aliases.end(), test);
}

std::string available_names(const VcdDocument& doc) {
    std::string out;
    for (const auto& code : doc.declaration_order) {
        if (!out.empty())
            out += ", ";
        out += doc.signals.at(code).name;
    }
    return out;
}

} // namespace

ToggleProfile extract_toggles(const VcdDocument& doc, std::string_view clock,
                              const std::vector<GroupRule>& groups) {
    std::string clock_code;
    try {
        clock_code = doc.find_code(clock);
    } catch (const DataError&) {
        throw DataError("clock signal '" + std::string(clock) + "' not found; available: " +
                        available_names(doc));
    }

    ToggleProfile profile;
    struct Member {
        std::string code;
        std::size_t width;
        std::size_t offset;
    };
    std::vector<std::vector<Member>> members(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::size_t width = 0;
        for (const auto& code : doc.declaration_order) {
            const Signal& s = doc.signals.at(code);
            if (matches(s, groups[g])) {
                members[g].push_back({code, s.width, width});
                width += s.width;
            }
        }
        if (members[g].empty())
            throw DataError("group '" + groups[g].name + "' matches no signals; available: " +
                            available_names(doc));
        profile.group_names.push_back(groups[g].name);
        profile.group_widths.push_back(width);
    }

    std::map<std::string, std::string> value;
    for (const auto& code : doc.declaration_order)
        value[code] = std::string(doc.signals.at(code).width, 'x');

    std::size_t cycle = 0;
    std::size_t i = 0;
    while (i < doc.events.size()) {
        const std::uint64_t t = doc.events[i].time;
        std::map<std::string, std::string> before;
        for (; i < doc.events.size() && doc.events[i].time == t; ++i) {
            const auto& e = doc.events[i];
            before.emplace(e.id, value[e.id]); // keeps the first (pre-timestamp) value
            value[e.id] = e.value;
        }
        const auto clk_before = before.find(clock_code);
        if (clk_before == before.end() || clk_before->second != "0" || value[clock_code] != "1")
            continue;

        CycleToggles ct;
        ct.cycle = cycle++;
        ct.time = t;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            GroupToggles gt;
            gt.bits.assign(profile.group_widths[g], 0);
            for (const auto& m : members[g]) {
                const auto b = before.find(m.code);
                if (b == before.end())
                    continue;
                const std::string& old_v = b->second;
                const std::string& new_v = value[m.code];
                for (std::size_t bit = 0; bit < m.width; ++bit) {
                    const char o = old_v[m.width - 1 - bit];
                    const char n = new_v[m.width - 1 - bit];
                    if ((o == '0' || o == '1') && (n == '0' || n == '1') && o != n) {
                        gt.bits[m.offset + bit] = 1;
                        ++gt.count;
                    }
                }
            }
            ct.groups.push_back(std::move(gt));
        }
        profile.per_cycle.push_back(std::move(ct));
    }
    return profile;
}

power::TracePool toggles_to_pool(const ToggleProfile& profile,
                                 const std::vector<aes::Bytes16>& ciphertexts,
                                 const tuning::TuningScenario& scenario,
                                 const power::PowerModelParams& params, std::uint64_t seed,
                                 const CycleSelection& selection, std::string_view text_group,
                                 std::string_view other_group) {
    params.validate();
    scenario.validate();
    if (selection.stride < 1)
        throw ConfigError("cycle stride must be >= 1");

    auto group_index = [&](std::string_view name) {
        const auto it = std::find(profile.group_names.begin(), profile.group_names.end(), name);
        if (it == profile.group_names.end())
            throw ConfigError("toggle profile has no group '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - profile.group_names.begin());
    };
    const std::size_t text_idx = group_index(text_group);
    const std::optional<std::size_t> other_idx =
        other_group.empty() ? std::nullopt : std::optional<std::size_t>(group_index(other_group));
    if (profile.group_widths[text_idx] > tuning::kTextFlipFlops)
        throw DataError("text group has " + std::to_string(profile.group_widths[text_idx]) +
                        " bits; at most 128 text FFs are modeled");

    std::vector<const CycleToggles*> designated;
    for (const auto& c : profile.per_cycle)
        if (c.cycle >= selection.offset && (c.cycle - selection.offset) % selection.stride == 0)
            designated.push_back(&c);
    if (designated.size() != ciphertexts.size())
        throw DataError("cycle/encryption count mismatch: profile designates " +
                        std::to_string(designated.size()) + " cycles (stride " +
                        std::to_string(selection.stride) + ", offset " +
                        std::to_string(selection.offset) + ") for " +
                        std::to_string(ciphertexts.size()) + " ciphertexts");
    if (ciphertexts.empty())
        throw DataError("no encryptions to convert");

    power::TracePool pool;
    pool.scenario_label = scenario.label;
    pool.master_seed = seed;
    pool.params = params;
    pool.ciphertexts = ciphertexts;
    pool.powers.resize(ciphertexts.size());
    for (std::size_t i = 0; i < designated.size(); ++i) {
        const auto& text = designated[i]->groups[text_idx];
        power::ToggleBits bits{};
        for (std::size_t j = 0; j < text.bits.size(); ++j)
            if (text.bits[j])
                bits[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
        const std::size_t other = other_idx ? designated[i]->groups[*other_idx].count : 0;

        Rng tune_rng(derive_seed(seed, Stream::Tuning, {i}));
        Rng noise_rng(derive_seed(seed, Stream::Noise, {i}));
        const auto assign = tuning::sample_assignment(scenario, tune_rng);
        pool.powers[i] = power::trace_power(bits, assign, params, noise_rng, other);
    }
    return pool;
}

std::vector<aes::Bytes16> read_ciphertext_sidecar(std::istream& in) {
    std::vector<aes::Bytes16> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        const std::string hex = line.substr(first, last - first + 1);
        try {
            out.push_back(parse_hex16(hex));
        } catch (const ConfigError& e) {
            throw DataError("ciphertext sidecar line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<aes::Bytes16> read_ciphertext_sidecar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open ciphertext sidecar '" + path + "'");
    return read_ciphertext_sidecar(in);
}

} // namespace psct::vcd
