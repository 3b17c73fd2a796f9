#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "chsh/core.hpp"
#include "chsh/rng.hpp"
#include "chsh/sources.hpp"

namespace chsh {

struct ResortPolicy;

/// A bijection on {0..N-1}. Applying it yields out[i] = in[mapping[i]],
/// so whole trials move and pairs are never split.
class TrialPermutation {
public:
    /// Throws Error unless mapping is a bijection.
    explicit TrialPermutation(std::vector<std::size_t> mapping);
    static TrialPermutation identity(std::size_t n);

    std::size_t size() const { return mapping_.size(); }
    std::size_t operator[](std::size_t i) const { return mapping_[i]; }
    const std::vector<std::size_t>& mapping() const { return mapping_; }
    bool is_identity() const;

    template <typename T>
    std::vector<T> apply(std::span<const T> in) const {
        if (in.size() != mapping_.size()) {
            throw Error("permutation length does not match the sequence");
        }
        std::vector<T> out;
        out.reserve(in.size());
        for (std::size_t src : mapping_) {
            out.push_back(in[src]);
        }
        return out;
    }
    OutcomeSequence apply(const OutcomeSequence& s) const { return OutcomeSequence(apply(s.values())); }

    friend bool operator==(const TrialPermutation&, const TrialPermutation&) = default;

private:
    struct Trusted {};
    TrialPermutation(Trusted, std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {}
    friend TrialPermutation best_effort_permutation(const OutcomeSequence&, const OutcomeSequence&,
                                                    const ResortPolicy&, std::uint64_t);

    std::vector<std::size_t> mapping_;
};

/// Which of the valid re-sortings is chosen.
struct ResortPolicy {
    enum class Kind {
        stable,          // i-th +1 of the target takes the i-th +1 of the source; same for -1
        uniform_random,  // uniform over all valid bijections, drawn from `rng`
    };
    Kind kind = Kind::stable;
    RngSpec rng{};

    static ResortPolicy stable() { return {}; }
    static ResortPolicy uniform_random(RngSpec rng) { return {Kind::uniform_random, rng}; }
};

struct Alignment {
    /// Set iff the +1 counts match; then source re-sorted by it equals target.
    std::optional<TrialPermutation> permutation;
    /// plus_count(target) - plus_count(source).
    long long deficit = 0;

    bool feasible() const { return permutation.has_value(); }
};

/// Permutation that re-sorts `source` to be elementwise identical to `target`.
/// A count mismatch is reported as infeasible, not thrown. Throws Error on length mismatch.
/// `lane` selects an independent random stream for the uniform policy.
Alignment align_permutation(const OutcomeSequence& target, const OutcomeSequence& source,
                            const ResortPolicy& policy, std::uint64_t lane = 0);

/// Matches as many equal values as the counts allow; the |deficit| leftover
/// positions take the remaining source entries. Equals the feasible alignment when one exists.
TrialPermutation best_effort_permutation(const OutcomeSequence& target, const OutcomeSequence& source,
                                         const ResortPolicy& policy, std::uint64_t lane = 0);

/// Outcome of the three-step cascade: ac aligned on a, dc aligned on c, db aligned on d.
struct ResortReport {
    static constexpr std::size_t kSteps = 3;

    /// Step s was reached on an exactly re-sorted chain. A step after an infeasible one is not applicable.
    std::array<bool, kSteps> applicable{};
    /// Step s re-sorted exactly (false when not applicable).
    std::array<bool, kSteps> feasible{};
    /// +1-count deficits per step; past an infeasible step they are measured on the best-effort chain.
    std::array<long long, kSteps> count_deficits{};
    /// Permutations actually applied (best-effort where infeasible) for ac, dc, db.
    std::array<std::optional<TrialPermutation>, kSteps> perms;
    /// b1 identical to re-sorted b3; empty when any step is infeasible.
    std::optional<bool> closure;
    /// Positions where b1 and re-sorted b3 differ.
    std::size_t hamming_b = 0;
    /// hamming_b was measured on a best-effort chain.
    bool hamming_best_effort = false;
    std::size_t n_per = 0;
    double gamma_subruns = 0.0;
    std::optional<double> gamma_resorted;

    bool all_feasible() const { return feasible[0] && feasible[1] && feasible[2]; }
};

/// Runs the cascade. Throws Error("cascade requires equal lengths") on unequal or empty sub-runs.
ResortReport resort_cascade(const SubRunDataset& data, const ResortPolicy& policy);

/// <a1 (b1 + c2~)> + <d4~ (b3~ - c2~)> from the report's permutations.
/// Throws Error when the report is not fully feasible.
double gamma_resorted(const SubRunDataset& data, const ResortReport& report);

/// Truncates every list to the shortest one. Lossy.
SubRunDataset trim_to_shortest(const SubRunDataset& data);

/// 1 / C(n, k): chance that two independent uniform arrangements of k ones among n coincide.
/// Throws Error if k > n.
double closure_probability_exact(std::size_t n, std::size_t k);
double closure_log10_probability(std::size_t n, std::size_t k);

struct ClosureEstimate {
    double probability = 0.0;
    std::size_t hits = 0;
    std::size_t trials = 0;
    /// Binomial standard error computed from the exact probability.
    double standard_error = 0.0;
};

/// Monte-Carlo version: each trial draws two independent uniform arrangements
/// on its own stream and compares them. Throws Error if k > n or trials == 0.
ClosureEstimate closure_probability_monte_carlo(std::size_t n, std::size_t k, std::size_t trials,
                                                const RngSpec& rng, Parallelism par = {});

}  // namespace chsh
