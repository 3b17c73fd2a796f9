#include "chsh/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chsh {

Outcome Outcome::from_int(int value) {
    if (value != 1 && value != -1) {
        throw Error("outcome must be +1 or -1, got " + std::to_string(value));
    }
    return Outcome(value);
}

Angle Angle::radians(double value) {
    if (!std::isfinite(value)) {
        throw Error("angle must be finite");
    }
    double r = std::fmod(value, std::numbers::pi);
    if (r < 0.0) {
        r += std::numbers::pi;
    }
    // fmod of a tiny negative value can land exactly on pi after the shift
    if (r >= std::numbers::pi) {
        r = 0.0;
    }
    return Angle(r);
}

Angle Angle::degrees(double value) { return radians(value * std::numbers::pi / 180.0); }

double Angle::degrees() const { return value_ * 180.0 / std::numbers::pi; }

bool Angle::same_as(Angle other) const {
    const double diff = std::abs(value_ - other.value_);
    return std::min(diff, std::numbers::pi - diff) < 1e-12;
}

SettingsQuad::SettingsQuad(Angle a, Angle d, Angle b, Angle c) : a_(a), d_(d), b_(b), c_(c) {
    if (a.same_as(d)) {
        throw Error("settings a and d must differ");
    }
    if (b.same_as(c)) {
        throw Error("settings b and c must differ");
    }
}

SettingsQuad SettingsQuad::optimal() {
    return SettingsQuad(Angle::degrees(0.0), Angle::degrees(45.0), Angle::degrees(22.5), Angle::degrees(-22.5));
}

OutcomeSequence::OutcomeSequence(std::initializer_list<int> values) {
    values_.reserve(values.size());
    for (int v : values) {
        values_.push_back(Outcome::from_int(v));
    }
}

OutcomeSequence OutcomeSequence::from_ints(std::span<const int> values) {
    std::vector<Outcome> out;
    out.reserve(values.size());
    for (int v : values) {
        out.push_back(Outcome::from_int(v));
    }
    return OutcomeSequence(std::move(out));
}

std::size_t OutcomeSequence::plus_count() const {
    return static_cast<std::size_t>(std::ranges::count_if(values_, [](Outcome o) { return o.is_plus(); }));
}

CounterfactualDataset::CounterfactualDataset(OutcomeSequence a, OutcomeSequence d, OutcomeSequence b,
                                             OutcomeSequence c, std::optional<SettingsQuad> settings)
    : a_(std::move(a)), d_(std::move(d)), b_(std::move(b)), c_(std::move(c)), settings_(settings) {
    const std::size_t n = a_.size();
    if (d_.size() != n || b_.size() != n || c_.size() != n) {
        throw Error("counterfactual sequences must all have the same length");
    }
}

const char* to_string(SettingPair pair) {
    switch (pair) {
        case SettingPair::ab: return "ab";
        case SettingPair::ac: return "ac";
        case SettingPair::db: return "db";
        case SettingPair::dc: return "dc";
    }
    return "?";
}

std::optional<SettingPair> parse_setting_pair(std::string_view label) {
    for (SettingPair p : kAllPairs) {
        if (label == to_string(p)) {
            return p;
        }
    }
    return std::nullopt;
}

OutcomeSequence arm_outcomes(std::span<const SubRunTrial> trials, bool first) {
    std::vector<Outcome> out;
    out.reserve(trials.size());
    for (const SubRunTrial& t : trials) {
        out.push_back(first ? t.outcome_a : t.outcome_b);
    }
    return OutcomeSequence(std::move(out));
}

std::size_t SubRunDataset::total_trials() const {
    std::size_t total = 0;
    for (const TrialList& l : lists) {
        total += l.size();
    }
    return total;
}

bool sequences_identical(const OutcomeSequence& s, const OutcomeSequence& t) { return s == t; }

std::vector<std::size_t> switch_pattern(const OutcomeSequence& s) {
    if (s.empty()) {
        throw Error("empty sequence");
    }
    std::vector<std::size_t> switches;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] != s[i - 1]) {
            switches.push_back(i);
        }
    }
    return switches;
}

std::size_t hamming_distance(const OutcomeSequence& s, const OutcomeSequence& t) {
    if (s.size() != t.size()) {
        throw Error("hamming distance requires equal lengths");
    }
    std::size_t diff = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        diff += (s[i] != t[i]) ? 1 : 0;
    }
    return diff;
}

long long product_sum(const OutcomeSequence& s, const OutcomeSequence& t) {
    if (s.size() != t.size()) {
        throw Error("correlation requires equal lengths (" + std::to_string(s.size()) + " vs " +
                    std::to_string(t.size()) + ")");
    }
    long long sum = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        sum += s[i] * t[i];
    }
    return sum;
}

double correlation(const OutcomeSequence& s, const OutcomeSequence& t) {
    const long long sum = product_sum(s, t);
    if (s.empty()) {
        throw Error("correlation of empty sequences");
    }
    return static_cast<double>(sum) / static_cast<double>(s.size());
}

}  // namespace chsh
