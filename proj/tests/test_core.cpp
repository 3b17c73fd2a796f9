#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "chsh/core.hpp"

using namespace chsh;

namespace {

// Every +/-1 sequence of the given length, bit i set meaning +1 at position i.
OutcomeSequence from_bits(unsigned bits, std::size_t length) {
    std::vector<Outcome> v;
    for (std::size_t i = 0; i < length; ++i) {
        v.push_back(Outcome::from_sign((bits >> i) & 1u));
    }
    return OutcomeSequence(std::move(v));
}

}  // namespace

TEST_CASE("outcome accepts only +1 and -1") {
    CHECK(Outcome::from_int(1) == Outcome::plus());
    CHECK(Outcome::from_int(-1) == Outcome::minus());
    CHECK_THROWS_AS(Outcome::from_int(0), Error);
    CHECK_THROWS_AS(Outcome::from_int(2), Error);
    CHECK(Outcome::plus() * Outcome::minus() == -1);
    CHECK(-Outcome::plus() == Outcome::minus());
}

TEST_CASE("angles normalize modulo pi") {
    CHECK(Angle::degrees(-22.5).degrees() == doctest::Approx(157.5));
    CHECK(Angle::degrees(180.0).radians() == doctest::Approx(0.0));
    CHECK(Angle::degrees(270.0).degrees() == doctest::Approx(90.0));
    CHECK(Angle::radians(-1e-18).radians() >= 0.0);
    CHECK(Angle::radians(-1e-18).radians() < std::numbers::pi);
    CHECK(Angle::degrees(0.0).same_as(Angle::degrees(180.0)));
    CHECK(Angle::degrees(179.9999999999999).same_as(Angle::degrees(0.0)));
    CHECK_FALSE(Angle::degrees(10.0).same_as(Angle::degrees(20.0)));
    CHECK_THROWS_AS(Angle::radians(NAN), Error);
}

TEST_CASE("settings quad requires distinct settings per arm") {
    const auto deg = [](double v) { return Angle::degrees(v); };
    CHECK_NOTHROW(SettingsQuad(deg(0), deg(45), deg(22.5), deg(-22.5)));
    CHECK_THROWS_AS(SettingsQuad(deg(0), deg(180), deg(22.5), deg(-22.5)), Error);
    CHECK_THROWS_AS(SettingsQuad(deg(0), deg(45), deg(10), deg(10)), Error);
    const auto opt = SettingsQuad::optimal();
    CHECK(opt.c().degrees() == doctest::Approx(157.5));
}

TEST_CASE("sequences_identical examples") {
    CHECK(sequences_identical({1, -1, 1}, {1, -1, 1}));
    CHECK_FALSE(sequences_identical({1, -1, 1}, {1, 1, -1}));
    CHECK_FALSE(sequences_identical({1}, {1, -1}));
    CHECK(sequences_identical({}, {}));
}

TEST_CASE("switch_pattern examples") {
    CHECK(switch_pattern({1, 1, -1, -1, 1}) == std::vector<std::size_t>{2, 4});
    CHECK(switch_pattern({1, 1, 1}).empty());
    CHECK(switch_pattern({-1, 1, -1}) == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_WITH_AS(switch_pattern(OutcomeSequence{}), "empty sequence", Error);
}

TEST_CASE("correlation examples and errors") {
    CHECK(correlation({1, 1}, {1, 1}) == 1.0);
    CHECK(correlation({1, -1}, {1, 1}) == 0.0);
    CHECK(correlation({1, -1, 1, -1}, {-1, 1, -1, 1}) == -1.0);
    CHECK_THROWS_AS(correlation({1}, {1, 1}), Error);
    CHECK_THROWS_AS(correlation(OutcomeSequence{}, OutcomeSequence{}), Error);
}

TEST_CASE("hamming distance") {
    CHECK(hamming_distance({1, -1, 1}, {1, 1, 1}) == 1);
    CHECK(hamming_distance({1, -1}, {-1, 1}) == 2);
    CHECK_THROWS_AS(hamming_distance({1}, {1, 1}), Error);
}

// The identity predicate against its two-part description (counts + switches),
// both directions, over every pair of sequences up to length 8.
TEST_CASE("identity equals counts plus first element plus switch pattern, exhaustively") {
    std::size_t pairs = 0;
    for (std::size_t ls = 1; ls <= 8; ++ls) {
        for (std::size_t lt = 1; lt <= 8; ++lt) {
            for (unsigned x = 0; x < (1u << ls); ++x) {
                const OutcomeSequence s = from_bits(x, ls);
                for (unsigned y = 0; y < (1u << lt); ++y) {
                    const OutcomeSequence t = from_bits(y, lt);
                    const bool derived = s.size() == t.size() && s.plus_count() == t.plus_count() &&
                                         s[0] == t[0] && switch_pattern(s) == switch_pattern(t);
                    REQUIRE(sequences_identical(s, t) == derived);
                    ++pairs;
                }
            }
        }
    }
    CHECK(pairs == 510u * 510u);
}

TEST_CASE("correlation bounds, exhaustively up to length 8") {
    for (std::size_t len = 1; len <= 8; ++len) {
        for (unsigned x = 0; x < (1u << len); ++x) {
            const OutcomeSequence s = from_bits(x, len);
            REQUIRE(correlation(s, s) == 1.0);
            for (unsigned y = 0; y < (1u << len); ++y) {
                const OutcomeSequence t = from_bits(y, len);
                const double r = correlation(s, t);
                REQUIRE(std::abs(r) <= 1.0);
                const bool extreme = std::abs(r) == 1.0;
                const bool signed_copy = (y == x) || (y == (~x & ((1u << len) - 1)));
                REQUIRE(extreme == signed_copy);
            }
        }
    }
}

TEST_CASE("counterfactual dataset rejects ragged sequences") {
    CHECK_THROWS_AS(CounterfactualDataset({1, 1}, {1, 1}, {1}, {1, 1}), Error);
    const CounterfactualDataset ok({1, -1}, {1, 1}, {-1, -1}, {1, -1});
    CHECK(ok.size() == 2);
}

TEST_CASE("setting pair labels") {
    CHECK(parse_setting_pair("dc") == SettingPair::dc);
    CHECK_FALSE(parse_setting_pair("xy").has_value());
    CHECK(std::string(to_string(SettingPair::ac)) == "ac");
    const TrialList trials = {{Outcome::plus(), Outcome::minus()}, {Outcome::minus(), Outcome::minus()}};
    CHECK(arm_outcomes(trials, true) == OutcomeSequence{1, -1});
    CHECK(arm_outcomes(trials, false) == OutcomeSequence{-1, -1});
}
