#include "chsh/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "parallel.hpp"

namespace chsh {

bool GammaResult::bound_satisfied() const { return std::abs(value) <= kLocalBound; }

namespace {

double combine(const std::array<double, 4>& e) { return e[0] + e[1] + e[2] - e[3]; }

}  // namespace

GammaResult gamma_pooled(const CounterfactualDataset& data) {
    const std::size_t n = data.size();
    if (n == 0) {
        throw Error("gamma_pooled: empty dataset");
    }
    const std::array<long long, 4> sums = {product_sum(data.a(), data.b()), product_sum(data.a(), data.c()),
                                           product_sum(data.d(), data.b()), product_sum(data.d(), data.c())};
    GammaResult r;
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k < 4; ++k) {
        r.per_term[k] = static_cast<double>(sums[k]) / nd;
        r.n_used[k] = n;
    }
    // one division of the exact integer total keeps |value| <= 2 free of rounding
    r.value = static_cast<double>(sums[0] + sums[1] + sums[2] - sums[3]) / nd;
    return r;
}

GammaResult gamma_subruns(const SubRunDataset& data) {
    GammaResult r;
    for (SettingPair p : kAllPairs) {
        const TrialList& list = data[p];
        if (list.empty()) {
            throw Error(std::string("empty sub-run '") + to_string(p) + "'");
        }
        long long sum = 0;
        for (const SubRunTrial& t : list) {
            sum += t.outcome_a * t.outcome_b;
        }
        const auto k = static_cast<std::size_t>(p);
        r.per_term[k] = static_cast<double>(sum) / static_cast<double>(list.size());
        r.n_used[k] = list.size();
    }
    r.value = combine(r.per_term);
    return r;
}

BoundReport termwise_bound_check(const CounterfactualDataset& data) {
    const std::size_t n = data.size();
    if (n == 0) {
        throw Error("termwise_bound_check: empty dataset");
    }
    BoundReport report;
    report.per_trial_values.reserve(n);
    long long total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const int b = data.b()[j].value();
        const int c = data.c()[j].value();
        const int v = data.a()[j].value() * (b + c) + data.d()[j].value() * (b - c);
        if (v != 2 && v != -2) {
            throw Error("per-trial value outside {+2, -2} at trial " + std::to_string(j));
        }
        report.per_trial_values.push_back(v);
        report.max_abs = std::max(report.max_abs, std::abs(v));
        total += v;
    }
    report.gamma = static_cast<double>(total) / static_cast<double>(n);
    return report;
}

double theory_gamma(Angle a, Angle d, Angle b, Angle c, CorrelationLaw law) {
    return combine({correlation_law(law, a, b), correlation_law(law, a, c), correlation_law(law, d, b),
                    correlation_law(law, d, c)});
}

double theory_gamma(const SettingsQuad& s, CorrelationLaw law) { return theory_gamma(s.a(), s.d(), s.b(), s.c(), law); }

SplitResult split_by_assignment(const CounterfactualDataset& data, std::span<const SettingPair> assignment) {
    if (assignment.size() != data.size()) {
        throw Error("split assignment length must equal the trial count");
    }
    SplitResult out;
    out.data.settings = data.settings();
    for (std::size_t j = 0; j < assignment.size(); ++j) {
        const SettingPair p = assignment[j];
        const bool arm_a_first = p == SettingPair::ab || p == SettingPair::ac;
        const bool arm_b_first = p == SettingPair::ab || p == SettingPair::db;
        const Outcome x = arm_a_first ? data.a()[j] : data.d()[j];
        const Outcome y = arm_b_first ? data.b()[j] : data.c()[j];
        out.data[p].push_back(SubRunTrial{x, y});
        out.source_index[static_cast<std::size_t>(p)].push_back(j);
    }
    return out;
}

SplitResult split_random_traced(const CounterfactualDataset& data, const RngSpec& rng, Parallelism par) {
    const std::size_t n = data.size();
    if (n < 4) {
        throw Error("split_random requires at least 4 trials");
    }
    std::vector<SettingPair> assignment(n);
    detail::parallel_chunks(n, par.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            assignment[j] = static_cast<SettingPair>(random_block(rng, j)[0] >> 62);
        }
    });
    return split_by_assignment(data, assignment);
}

SubRunDataset split_random(const CounterfactualDataset& data, const RngSpec& rng, Parallelism par) {
    return split_random_traced(data, rng, par).data;
}

}  // namespace chsh
