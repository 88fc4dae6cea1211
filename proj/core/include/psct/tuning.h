#pragma once

#include "psct/rng.h"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace psct::tuning {

/// Flip-flops holding the 128-bit AES text. FF index 8*b + i is bit i (LSB = 0)
/// of state byte b.
inline constexpr std::size_t kTextFlipFlops = 128;

/// Ordered set of available drive multipliers (the X-numbers).
class StrengthUniverse {
public:
    StrengthUniverse() = default;
    /// Throws ConfigError unless values are non-empty, strictly increasing and positive.
    explicit StrengthUniverse(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool contains(double v) const;

    friend bool operator==(const StrengthUniverse&, const StrengthUniverse&) = default;

private:
    std::vector<double> values_;
};

/// Ordered set of available supply voltages plus the nominal (untuned) VCC.
class VccUniverse {
public:
    VccUniverse() = default;
    VccUniverse(std::vector<double> values, double nominal);

    const std::vector<double>& values() const { return values_; }
    double nominal() const { return nominal_; }
    std::size_t size() const { return values_.size(); }
    bool contains(double v) const;

    friend bool operator==(const VccUniverse&, const VccUniverse&) = default;

private:
    std::vector<double> values_;
    double nominal_ = 0.0;
};

enum class Mode { Static, Dynamic };

struct StrengthSetting {
    Mode mode = Mode::Static;
    double fixed = 1.0; // used when mode == Static
    StrengthUniverse universe;

    static StrengthSetting fixed_at(double value);
    static StrengthSetting fixed_at(double value, StrengthUniverse universe);
    static StrengthSetting dynamic_over(StrengthUniverse universe);

    friend bool operator==(const StrengthSetting&, const StrengthSetting&) = default;
};

struct VccSetting {
    Mode mode = Mode::Static;
    double fixed = 1.0;
    VccUniverse universe;

    static VccSetting fixed_at(double value, double nominal);
    static VccSetting fixed_at(double value, VccUniverse universe);
    static VccSetting dynamic_over(VccUniverse universe);

    friend bool operator==(const VccSetting&, const VccSetting&) = default;
};

/// FPGA-style tuning: each FF also drives one of a pair of IO pins.
struct IoEmulation {
    enum class Kind { Off, Static, Dynamic };
    Kind kind = Kind::Off;
    double fixed = 0.0;
    StrengthUniverse universe;

    static IoEmulation off() { return {}; }
    static IoEmulation fixed_at(double strength);
    static IoEmulation dynamic_over(StrengthUniverse universe);

    friend bool operator==(const IoEmulation&, const IoEmulation&) = default;
};

struct GroupPolicy {
    StrengthSetting strength;
    VccSetting vcc;
    IoEmulation io;

    /// Throws ConfigError if a static value lies outside its declared universe.
    void validate() const;
    bool is_static() const;

    friend bool operator==(const GroupPolicy&, const GroupPolicy&) = default;
};

/// Which register groups are tuned and how. When `shared_rail` is set, both
/// groups sit on one supply and the other group's VCC follows the text group's
/// draw (all-FF tuning).
struct TuningScenario {
    std::string label;
    GroupPolicy text_ff;
    GroupPolicy other_ff;
    bool shared_rail = true;

    void validate() const;
    bool is_static() const { return text_ff.is_static() && other_ff.is_static(); }

    /// One policy for every FF.
    static TuningScenario uniform(std::string label, const GroupPolicy& policy);

    friend bool operator==(const TuningScenario&, const TuningScenario&) = default;
};

/// Concrete per-encryption tuning drawn from a scenario.
struct TuningAssignment {
    std::array<double, kTextFlipFlops> text_strength{};
    /// IO pin strength driven by each text FF; 0 when IO emulation is off.
    std::array<double, kTextFlipFlops> io_strength{};
    double other_strength = 1.0;
    /// VCC of the text registers during the modeled last round.
    double text_vcc = 1.0;
    double other_vcc = 1.0;

    friend bool operator==(const TuningAssignment&, const TuningAssignment&) = default;
};

/// Draws one assignment. Static knobs yield their fixed value; dynamic strength
/// is drawn uniformly and independently per text FF; dynamic VCC once per
/// encryption. Throws ConfigError for malformed scenarios, including a dynamic
/// knob over a single-value universe.
TuningAssignment sample_assignment(const TuningScenario& scenario, Rng& rng);

/// All-static, all-FF scenarios for every (strength, vcc) pair, strength-major.
std::vector<TuningScenario> enumerate_static_grid(const StrengthUniverse& strengths,
                                                  const VccUniverse& vccs);

/// Cartesian product of per-group grids: text group from `text_grid`, other group
/// from `other_grid`, on separate rails.
std::vector<TuningScenario> combine_group_grids(const std::vector<TuningScenario>& text_grid,
                                                const std::vector<TuningScenario>& other_grid);

} // namespace psct::tuning
