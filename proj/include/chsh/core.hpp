#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chsh {

/// Raised for violated preconditions and malformed input data.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A detector result. Only +1 and -1 exist; there is no no-click state.
class Outcome {
public:
    static constexpr Outcome plus() { return Outcome(1); }
    static constexpr Outcome minus() { return Outcome(-1); }

    /// Throws Error unless value is +1 or -1.
    static Outcome from_int(int value);
    static constexpr Outcome from_sign(bool positive) { return positive ? plus() : minus(); }

    constexpr int value() const { return value_; }
    constexpr bool is_plus() const { return value_ > 0; }
    constexpr Outcome operator-() const { return Outcome(-value_); }

    friend constexpr bool operator==(Outcome, Outcome) = default;
    friend constexpr int operator*(Outcome x, Outcome y) { return x.value_ * y.value_; }

private:
    constexpr explicit Outcome(int v) : value_(v) {}
    signed char value_;
};

/// Analyzer orientation in radians, normalized to [0, pi).
class Angle {
public:
    constexpr Angle() = default;
    static Angle radians(double value);
    static Angle degrees(double value);

    double radians() const { return value_; }
    double degrees() const;

    /// Equality up to 1e-12 rad on the circle of period pi.
    bool same_as(Angle other) const;

private:
    explicit Angle(double v) : value_(v) {}
    double value_ = 0.0;
};

/// Two settings per arm: a, d on arm A and b, c on arm B.
class SettingsQuad {
public:
    /// Throws Error if a and d coincide or b and c coincide.
    SettingsQuad(Angle a, Angle d, Angle b, Angle c);

    /// a = 0, d = 45 deg, b = 22.5 deg, c = -22.5 deg (maximal photon violation).
    static SettingsQuad optimal();

    Angle a() const { return a_; }
    Angle d() const { return d_; }
    Angle b() const { return b_; }
    Angle c() const { return c_; }

private:
    Angle a_, d_, b_, c_;
};

class OutcomeSequence {
public:
    OutcomeSequence() = default;
    explicit OutcomeSequence(std::vector<Outcome> values) : values_(std::move(values)) {}
    OutcomeSequence(std::initializer_list<int> values);

    static OutcomeSequence from_ints(std::span<const int> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    Outcome operator[](std::size_t i) const { return values_[i]; }
    std::span<const Outcome> values() const { return values_; }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    std::size_t plus_count() const;

    friend bool operator==(const OutcomeSequence&, const OutcomeSequence&) = default;

private:
    std::vector<Outcome> values_;
};

/// N trials each carrying all four outcomes, as only a hidden-variable model can supply.
class CounterfactualDataset {
public:
    /// Throws Error if the four sequences differ in length.
    CounterfactualDataset(OutcomeSequence a, OutcomeSequence d, OutcomeSequence b, OutcomeSequence c,
                          std::optional<SettingsQuad> settings = std::nullopt);

    std::size_t size() const { return a_.size(); }
    const OutcomeSequence& a() const { return a_; }
    const OutcomeSequence& d() const { return d_; }
    const OutcomeSequence& b() const { return b_; }
    const OutcomeSequence& c() const { return c_; }
    const std::optional<SettingsQuad>& settings() const { return settings_; }

    friend bool operator==(const CounterfactualDataset& x, const CounterfactualDataset& y) {
        return x.a_ == y.a_ && x.d_ == y.d_ && x.b_ == y.b_ && x.c_ == y.c_;
    }

private:
    OutcomeSequence a_, d_, b_, c_;
    std::optional<SettingsQuad> settings_;
};

struct SubRunTrial {
    Outcome outcome_a;
    Outcome outcome_b;

    friend bool operator==(const SubRunTrial&, const SubRunTrial&) = default;
};

/// The four setting pairs, in the order they appear in the CHSH sum.
enum class SettingPair : std::uint8_t { ab = 0, ac = 1, db = 2, dc = 3 };

inline constexpr std::array<SettingPair, 4> kAllPairs = {SettingPair::ab, SettingPair::ac,
                                                         SettingPair::db, SettingPair::dc};

const char* to_string(SettingPair pair);
std::optional<SettingPair> parse_setting_pair(std::string_view label);

using TrialList = std::vector<SubRunTrial>;

/// Arm-A (first == true) or arm-B outcomes of a trial list, in list order.
OutcomeSequence arm_outcomes(std::span<const SubRunTrial> trials, bool first);

/// Four disjoint experiments, one per setting pair. Lengths may differ.
struct SubRunDataset {
    std::array<TrialList, 4> lists;
    std::optional<SettingsQuad> settings;

    TrialList& operator[](SettingPair p) { return lists[static_cast<std::size_t>(p)]; }
    const TrialList& operator[](SettingPair p) const { return lists[static_cast<std::size_t>(p)]; }

    std::size_t total_trials() const;

    friend bool operator==(const SubRunDataset& x, const SubRunDataset& y) { return x.lists == y.lists; }
};

/// Elementwise equality: same +1 count and same switch pattern.
bool sequences_identical(const OutcomeSequence& s, const OutcomeSequence& t);

/// Indices i >= 1 where s[i] != s[i-1]. Throws Error("empty sequence") on empty input.
std::vector<std::size_t> switch_pattern(const OutcomeSequence& s);

/// Number of positions where s and t differ. Throws Error on length mismatch.
std::size_t hamming_distance(const OutcomeSequence& s, const OutcomeSequence& t);

/// Sum of s(j) * t(j). Throws Error on length mismatch.
long long product_sum(const OutcomeSequence& s, const OutcomeSequence& t);

/// (1/N) sum s(j) * t(j). Throws Error on length mismatch or empty input.
double correlation(const OutcomeSequence& s, const OutcomeSequence& t);

}  // namespace chsh
