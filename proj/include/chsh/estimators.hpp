#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "chsh/core.hpp"
#include "chsh/rng.hpp"
#include "chsh/sources.hpp"

namespace chsh {

/// The CHSH bound for counterfactual local-realistic data, |Gamma| <= 2.
inline constexpr double kLocalBound = 2.0;

/// Gamma = E(ab) + E(ac) + E(db) - E(dc).
struct GammaResult {
    double value = 0.0;
    /// Unsigned correlations in ab, ac, db, dc order; the minus sign on dc is applied in `value`.
    std::array<double, 4> per_term{};
    std::array<std::size_t, 4> n_used{};

    bool bound_satisfied() const;
};

/// Per-trial values a(b + c) + d(b - c), each exactly +2 or -2.
struct BoundReport {
    std::vector<int> per_trial_values;
    int max_abs = 0;
    double gamma = 0.0;
};

/// Single-run estimator over all four counterfactual outcomes. Throws Error on empty data.
GammaResult gamma_pooled(const CounterfactualDataset& data);

/// Four-experiment estimator, each term normalized by its own N_xy.
/// Throws Error naming the first empty sub-run.
GammaResult gamma_subruns(const SubRunDataset& data);

BoundReport termwise_bound_check(const CounterfactualDataset& data);

/// Closed-form E(a,b) + E(a,c) + E(d,b) - E(d,c). Accepts degenerate angle choices.
double theory_gamma(Angle a, Angle d, Angle b, Angle c, CorrelationLaw law);
double theory_gamma(const SettingsQuad& settings, CorrelationLaw law);

struct SplitResult {
    SubRunDataset data;
    /// Source trial index (0-based) of every emitted trial, parallel to data.lists.
    std::array<std::vector<std::size_t>, 4> source_index;
};

/// Sends trial j to the list `assignment[j]`, keeping only the outcomes that
/// list's setting pair observes.
SplitResult split_by_assignment(const CounterfactualDataset& data, std::span<const SettingPair> assignment);

/// Each trial lands in one of the four lists with probability 1/4. Throws Error if n < 4.
SplitResult split_random_traced(const CounterfactualDataset& data, const RngSpec& rng, Parallelism par = {});
SubRunDataset split_random(const CounterfactualDataset& data, const RngSpec& rng, Parallelism par = {});

}  // namespace chsh
