#include "chsh/rng.hpp"

#include <cassert>

namespace chsh {
namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

__extension__ using uint128 = unsigned __int128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    const uint128 p = static_cast<uint128>(a) * b;
    lo = static_cast<std::uint64_t>(p);
    hi = static_cast<std::uint64_t>(p >> 64);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

RngSpec RngSpec::child(std::uint64_t k) const {
    return RngSpec{seed, splitmix64(stream ^ splitmix64(k + 1))};
}

Philox4x64::Counter Philox4x64::block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t lo0, hi0, lo1, hi1;
        mulhilo(kMul0, ctr[0], lo0, hi0);
        mulhilo(kMul1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

Philox4x64::Counter random_block(const RngSpec& rng, std::uint64_t index, std::uint64_t lane) {
    return Philox4x64::block({index, lane, 0, 0}, {rng.seed, rng.stream});
}

PhiloxEngine::PhiloxEngine(const RngSpec& rng, std::uint64_t lane)
    : key_{rng.seed, rng.stream}, counter_{0, lane, 0, 0} {}

PhiloxEngine::result_type PhiloxEngine::operator()() {
    if (used_ == 4) {
        buffer_ = Philox4x64::block(counter_, key_);
        if (++counter_[0] == 0) {
            ++counter_[2];
        }
        used_ = 0;
    }
    return buffer_[used_++];
}

std::uint64_t PhiloxEngine::below(std::uint64_t bound) {
    assert(bound > 0);
    // Lemire's multiply-shift with rejection of the biased low region.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t lo, hi;
        mulhilo((*this)(), bound, lo, hi);
        if (lo >= threshold) {
            return hi;
        }
    }
}

}  // namespace chsh
