#pragma once

#include "psct/aes.h"
#include "psct/error.h"
#include "psct/power.h"
#include "psct/tuning.h"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace psct::vcd {

/// Parse failure; carries the 1-based line number where it was detected.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Timescale {
    int magnitude = 1;     // 1, 10 or 100
    std::string unit = "s";
    friend bool operator==(const Timescale&, const Timescale&) = default;
};

struct Signal {
    std::string name; // hierarchical, dot separated
    std::size_t width = 1;
    std::vector<std::string> aliases; // further names bound to the same code
    friend bool operator==(const Signal&, const Signal&) = default;
};

/// One value change. `value` holds width characters from {0,1,x,z}, MSB first.
struct ChangeEvent {
    std::uint64_t time = 0;
    std::string id;
    std::string value;
    friend bool operator==(const ChangeEvent&, const ChangeEvent&) = default;
};

struct VcdDocument {
    Timescale timescale;
    std::map<std::string, Signal> signals; // keyed by identifier code
    std::vector<std::string> declaration_order;
    std::vector<ChangeEvent> events;
    std::vector<std::string> warnings;

    /// Identifier code of a signal by full hierarchical name or unique leaf name.
    /// Throws DataError if not found or ambiguous.
    std::string find_code(std::string_view name) const;
};

/// Parses the supported subset: $timescale/$scope/$upscope/$var/$enddefinitions,
/// $dumpvars/$dumpall/$dumpon/$dumpoff blocks, `#` timestamps, scalar and `b`
/// vector changes. Unknown directives and real-valued changes are skipped with
/// a warning.
VcdDocument parse_vcd(std::istream& in);
VcdDocument parse_vcd_string(std::string_view text);
VcdDocument parse_vcd_file(const std::string& path);

/// Writes the supported subset back out (used for round trips and fixtures).
std::string write_vcd(const VcdDocument& doc);

/// Name-match rule: signals whose hierarchical or leaf name matches any of the
/// glob patterns belong to the group.
struct GroupRule {
    std::string name;
    std::vector<std::string> patterns;
};

struct GroupToggles {
    std::size_t count = 0;
    /// Per-bit toggle flags over the group's bits: signals in declaration order,
    /// LSB first within each signal.
    std::vector<std::uint8_t> bits;
};

struct CycleToggles {
    std::size_t cycle = 0; // index of the rising clock edge
    std::uint64_t time = 0;
    std::vector<GroupToggles> groups; // parallel to ToggleProfile::group_names
};

struct ToggleProfile {
    std::vector<std::string> group_names;
    std::vector<std::size_t> group_widths;
    std::vector<CycleToggles> per_cycle;
};

/// For each rising edge (0 -> 1) of `clock`, counts the 0<->1 bit transitions of
/// every group signal between the value before that timestamp and the value
/// after all of its changes. x/z transitions are ignored.
ToggleProfile extract_toggles(const VcdDocument& doc, std::string_view clock,
                              const std::vector<GroupRule>& groups);

/// Which cycles carry encryptions: cycle offset + i * stride is encryption i.
struct CycleSelection {
    std::size_t stride = 1;
    std::size_t offset = 0;
};

/// Converts designated cycles into a trace pool through power::trace_power.
///
/// `text_group` names the group whose bit j drives text FF j mod 128;
/// `other_group` (optional, may be empty) adds its count to the background
/// load. Random draws use the same per-trace substreams as
/// power::synthesize_pool, so an HD-equivalent profile reproduces its powers.
/// Throws DataError when the number of designated cycles differs from the
/// number of ciphertexts.
power::TracePool toggles_to_pool(const ToggleProfile& profile,
                                 const std::vector<aes::Bytes16>& ciphertexts,
                                 const tuning::TuningScenario& scenario,
                                 const power::PowerModelParams& params, std::uint64_t seed,
                                 const CycleSelection& selection, std::string_view text_group,
                                 std::string_view other_group = {});

/// Ciphertext sidecar: one 32-hex-digit line per encryption; blank lines and
/// lines starting with '#' are ignored.
std::vector<aes::Bytes16> read_ciphertext_sidecar(std::istream& in);
std::vector<aes::Bytes16> read_ciphertext_sidecar_file(const std::string& path);

} // namespace psct::vcd
