#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace chsh {

/// Identifies one reproducible random stream. Equal specs yield equal output
/// no matter how the consuming work is split across threads.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// A distinct stream derived from this one; child(k) for k = 0, 1, ... never repeat.
    RngSpec child(std::uint64_t k) const;

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Philox4x64 with 10 rounds (Salmon et al., SC'11). Pure function of (counter, key).
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter counter, Key key);
};

/// Random block for a given item index: counter (index, lane, 0, 0), key (seed, stream).
/// Lets every trial own its draws, so chunked parallel loops reproduce sequential output.
Philox4x64::Counter random_block(const RngSpec& rng, std::uint64_t index, std::uint64_t lane = 0);

/// Maps 64 random bits to a double uniform on [0, 1) with 53-bit resolution.
inline double to_unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential engine over a Philox stream; satisfies UniformRandomBitGenerator.
class PhiloxEngine {
public:
    using result_type = std::uint64_t;

    explicit PhiloxEngine(const RngSpec& rng, std::uint64_t lane = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();
    double uniform() { return to_unit_interval((*this)()); }

    /// Unbiased integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

private:
    Philox4x64::Key key_;
    Philox4x64::Counter counter_;
    Philox4x64::Counter buffer_{};
    unsigned used_ = 4;
};

}  // namespace chsh
