#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>

#include "chsh/core.hpp"
#include "chsh/rng.hpp"

namespace chsh {

/// Local deterministic response A(theta, lambda), lambda uniform on [0, pi).
enum class ResponseRule {
    /// +1 if cos 2(theta - lambda) >= 0, else -1.
    sign_malus,
};

struct LhvModel {
    ResponseRule rule = ResponseRule::sign_malus;

    Outcome respond(Angle setting, double lambda) const;
};

/// Pair-correlation law E(alpha, beta) for the quantum sampler.
enum class CorrelationLaw {
    photon_malus,  // cos 2(alpha - beta)
    spin_half,     // -cos(alpha - beta)
};

double correlation_law(CorrelationLaw law, Angle alpha, Angle beta);

const char* to_string(CorrelationLaw law);
std::optional<CorrelationLaw> parse_correlation_law(std::string_view name);

/// Worker threads used by the generators. Output never depends on this.
struct Parallelism {
    unsigned threads = 1;
};

/// All four outcomes per trial from one shared lambda stream. Throws Error if n == 0.
CounterfactualDataset lhv_generate(const LhvModel& model, const SettingsQuad& settings, std::size_t n,
                                   const RngSpec& rng, Parallelism par = {});

/// Same construction with caller-supplied hidden variables.
CounterfactualDataset lhv_generate_from(const LhvModel& model, const SettingsQuad& settings,
                                        std::span<const double> lambdas);

/// Independent trials from P(s, t) = (1 + s t E(alpha, beta)) / 4. Throws Error if n == 0.
TrialList qm_generate(Angle alpha, Angle beta, CorrelationLaw law, std::size_t n, const RngSpec& rng,
                      Parallelism par = {});

/// Four independent qm_generate runs for ab, ac, db, dc on streams rng.child(0..3).
SubRunDataset generate_subruns(const SettingsQuad& settings, CorrelationLaw law, std::size_t n_per,
                               const RngSpec& rng, Parallelism par = {});

// CSV trial records. Sub-run format: header "pair,outcome_a,outcome_b".
// Counterfactual format: header "j,a,d,b,c". Outcomes are the literal strings "+1" and "-1".

inline constexpr std::string_view kSubRunHeader = "pair,outcome_a,outcome_b";
inline constexpr std::string_view kCounterfactualHeader = "j,a,d,b,c";

enum class CsvKind { subrun, counterfactual };

using IngestedData = std::variant<SubRunDataset, CounterfactualDataset>;

/// Sub-run CSV. Rows keep their file order within each list.
SubRunDataset ingest_csv(std::istream& in);
CounterfactualDataset ingest_counterfactual_csv(std::istream& in);
/// Dispatches on the header line.
IngestedData ingest_any_csv(std::istream& in);

void write_subrun_csv(std::ostream& out, const SubRunDataset& data);
void write_counterfactual_csv(std::ostream& out, const CounterfactualDataset& data);

}  // namespace chsh
