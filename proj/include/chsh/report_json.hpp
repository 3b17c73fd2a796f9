#pragma once

#include "json.hpp"

#include "chsh/estimators.hpp"
#include "chsh/resort.hpp"

namespace chsh {

/// Rounds to a fixed number of decimals so reports print stable digits.
double round_to(double value, int decimals);

/// {gamma, per_term{ab,ac,db,dc}, n_used{...}, bound_satisfied}; Gamma values to 6 decimals.
nlohmann::ordered_json to_json(const GammaResult& result);

/// {feasible, applicable, closure, hamming_b, hamming_best_effort, n_per,
///  gamma_subruns, gamma_resorted, count_deficits}. Not-applicable values are null.
nlohmann::ordered_json to_json(const ResortReport& report);

}  // namespace chsh
