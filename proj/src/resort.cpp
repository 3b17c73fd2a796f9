#include "chsh/resort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chsh/estimators.hpp"
#include "parallel.hpp"

namespace chsh {

TrialPermutation::TrialPermutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (std::size_t src : mapping_) {
        if (src >= mapping_.size() || seen[src]) {
            throw Error("trial permutation is not a bijection");
        }
        seen[src] = true;
    }
}

TrialPermutation TrialPermutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return TrialPermutation(std::move(m));
}

bool TrialPermutation::is_identity() const {
    for (std::size_t i = 0; i < mapping_.size(); ++i) {
        if (mapping_[i] != i) {
            return false;
        }
    }
    return true;
}

namespace {

void shuffle(std::vector<std::size_t>& v, PhiloxEngine& engine) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[engine.below(i)]);
    }
}

struct ValueClasses {
    std::vector<std::size_t> plus, minus;
};

ValueClasses classes_of(const OutcomeSequence& s) {
    ValueClasses out;
    const std::size_t plus = s.plus_count();
    out.plus.reserve(plus);
    out.minus.reserve(s.size() - plus);
    for (std::size_t i = 0; i < s.size(); ++i) {
        (s[i].is_plus() ? out.plus : out.minus).push_back(i);
    }
    return out;
}

long long count_deficit(const OutcomeSequence& target, const OutcomeSequence& source) {
    return static_cast<long long>(target.plus_count()) - static_cast<long long>(source.plus_count());
}

}  // namespace

TrialPermutation best_effort_permutation(const OutcomeSequence& target, const OutcomeSequence& source,
                                         const ResortPolicy& policy, std::uint64_t lane) {
    if (target.size() != source.size()) {
        throw Error("alignment requires equal lengths");
    }
    const ValueClasses want = classes_of(target);
    ValueClasses have = classes_of(source);
    if (policy.kind == ResortPolicy::Kind::uniform_random) {
        PhiloxEngine engine(policy.rng, lane);
        shuffle(have.plus, engine);
        shuffle(have.minus, engine);
    }

    std::vector<std::size_t> mapping(target.size());
    std::vector<std::size_t> unmatched_targets, leftover_sources;
    const std::size_t overflow = static_cast<std::size_t>(std::abs(count_deficit(target, source)));
    unmatched_targets.reserve(overflow);
    leftover_sources.reserve(overflow);
    auto match = [&](const std::vector<std::size_t>& dst, const std::vector<std::size_t>& src) {
        const std::size_t common = std::min(dst.size(), src.size());
        for (std::size_t i = 0; i < common; ++i) {
            mapping[dst[i]] = src[i];
        }
        unmatched_targets.insert(unmatched_targets.end(), dst.begin() + common, dst.end());
        leftover_sources.insert(leftover_sources.end(), src.begin() + common, src.end());
    };
    match(want.plus, have.plus);
    match(want.minus, have.minus);
    // only one class can overflow, so the leftovers are all of the other value
    for (std::size_t i = 0; i < unmatched_targets.size(); ++i) {
        mapping[unmatched_targets[i]] = leftover_sources[i];
    }
    // a bijection by construction: every source index is used exactly once
    return TrialPermutation(TrialPermutation::Trusted{}, std::move(mapping));
}

Alignment align_permutation(const OutcomeSequence& target, const OutcomeSequence& source,
                            const ResortPolicy& policy, std::uint64_t lane) {
    if (target.size() != source.size()) {
        throw Error("alignment requires equal lengths");
    }
    Alignment out;
    out.deficit = count_deficit(target, source);
    if (out.deficit == 0) {
        out.permutation = best_effort_permutation(target, source, policy, lane);
    }
    return out;
}

namespace {

struct Chain {
    OutcomeSequence a1, b1, c2, d4, b3;
};

Chain resorted_chain(const SubRunDataset& data, const ResortReport& report) {
    const TrialList& ab = data[SettingPair::ab];
    return Chain{
        arm_outcomes(ab, true),
        arm_outcomes(ab, false),
        report.perms[0]->apply(arm_outcomes(data[SettingPair::ac], false)),
        report.perms[1]->apply(arm_outcomes(data[SettingPair::dc], true)),
        report.perms[2]->apply(arm_outcomes(data[SettingPair::db], false)),
    };
}

double evaluate_resorted(const Chain& ch) {
    long long total = 0;
    for (std::size_t j = 0; j < ch.a1.size(); ++j) {
        const int c2 = ch.c2[j].value();
        total += ch.a1[j].value() * (ch.b1[j].value() + c2) + ch.d4[j].value() * (ch.b3[j].value() - c2);
    }
    return static_cast<double>(total) / static_cast<double>(ch.a1.size());
}

}  // namespace

ResortReport resort_cascade(const SubRunDataset& data, const ResortPolicy& policy) {
    const std::size_t n = data[SettingPair::ab].size();
    for (SettingPair p : kAllPairs) {
        if (data[p].size() != n || n == 0) {
            throw Error("cascade requires equal lengths");
        }
    }

    ResortReport report;
    report.n_per = n;

    const OutcomeSequence a1 = arm_outcomes(data[SettingPair::ab], true);
    const OutcomeSequence b1 = arm_outcomes(data[SettingPair::ab], false);
    const TrialList& ac = data[SettingPair::ac];
    const TrialList& dc = data[SettingPair::dc];
    const TrialList& db = data[SettingPair::db];

    // Each step aligns one side of a list to a target and carries the other side along.
    struct Step {
        const TrialList* list;
        bool align_on_arm_a;
    };
    const std::array<Step, 3> steps = {Step{&ac, true}, Step{&dc, false}, Step{&db, true}};

    OutcomeSequence target = a1;
    bool chain_exact = true;
    for (std::size_t s = 0; s < steps.size(); ++s) {
        const OutcomeSequence source = arm_outcomes(*steps[s].list, steps[s].align_on_arm_a);
        const OutcomeSequence carried = arm_outcomes(*steps[s].list, !steps[s].align_on_arm_a);
        Alignment al = align_permutation(target, source, policy, s);
        report.count_deficits[s] = al.deficit;
        report.applicable[s] = chain_exact;
        report.feasible[s] = chain_exact && al.feasible();
        chain_exact = chain_exact && al.feasible();
        report.perms[s] = al.feasible() ? std::move(*al.permutation) : best_effort_permutation(target, source, policy, s);
        target = report.perms[s]->apply(carried);
    }

    const OutcomeSequence& b3 = target;
    report.hamming_b = hamming_distance(b1, b3);
    report.hamming_best_effort = !chain_exact;
    report.gamma_subruns = gamma_subruns(data).value;
    if (chain_exact) {
        report.closure = sequences_identical(b1, b3);
        report.gamma_resorted = gamma_resorted(data, report);
    }
    return report;
}

double gamma_resorted(const SubRunDataset& data, const ResortReport& report) {
    if (!report.all_feasible()) {
        throw Error("gamma_resorted requires a feasible cascade");
    }
    return evaluate_resorted(resorted_chain(data, report));
}

SubRunDataset trim_to_shortest(const SubRunDataset& data) {
    std::size_t shortest = data.lists[0].size();
    for (const TrialList& l : data.lists) {
        shortest = std::min(shortest, l.size());
    }
    SubRunDataset out;
    out.settings = data.settings;
    for (std::size_t k = 0; k < 4; ++k) {
        out.lists[k].assign(data.lists[k].begin(), data.lists[k].begin() + static_cast<std::ptrdiff_t>(shortest));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closure probability

double closure_probability_exact(std::size_t n, std::size_t k) {
    if (k > n) {
        throw Error("closure probability requires k <= n");
    }
    return std::pow(10.0, closure_log10_probability(n, k));
}

double closure_log10_probability(std::size_t n, std::size_t k) {
    if (k > n) {
        throw Error("closure probability requires k <= n");
    }
    k = std::min(k, n - k);
    if (n <= 60) {
        // exact: C(n, k) fits in 64 bits and each partial product is itself a binomial
        unsigned long long binom = 1;
        for (std::size_t i = 1; i <= k; ++i) {
            binom = binom * (n - k + i) / i;
        }
        return -std::log10(static_cast<double>(binom));
    }
    const double ln_binom = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                            std::lgamma(static_cast<double>(n - k) + 1.0);
    return -ln_binom / std::log(10.0);
}

ClosureEstimate closure_probability_monte_carlo(std::size_t n, std::size_t k, std::size_t trials,
                                                const RngSpec& rng, Parallelism par) {
    if (k > n) {
        throw Error("closure probability requires k <= n");
    }
    if (trials == 0) {
        throw Error("monte-carlo closure estimate requires trials >= 1");
    }
    std::vector<unsigned char> hit(trials, 0);
    detail::parallel_chunks(trials, par.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> first(n), second(n);
        for (std::size_t t = begin; t < end; ++t) {
            PhiloxEngine engine(rng, t);
            // arrangement = first k entries of a uniform shuffle are the +1 positions
            for (auto* v : {&first, &second}) {
                std::iota(v->begin(), v->end(), std::size_t{0});
                for (std::size_t i = 0; i < k; ++i) {
                    std::swap((*v)[i], (*v)[i + engine.below(n - i)]);
                }
                std::sort(v->begin(), v->begin() + static_cast<std::ptrdiff_t>(k));
            }
            hit[t] = std::equal(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(k), second.begin()) ? 1 : 0;
        }
    });
    ClosureEstimate est;
    est.trials = trials;
    est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    est.probability = static_cast<double>(est.hits) / static_cast<double>(trials);
    const double p = closure_probability_exact(n, k);
    est.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return est;
}

}  // namespace chsh
