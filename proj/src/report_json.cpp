#include "chsh/report_json.hpp"

#include <cmath>

namespace chsh {

double round_to(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double r = std::round(value * scale) / scale;
    return r == 0.0 ? 0.0 : r;  // no "-0.0"
}

namespace {

template <typename T>
nlohmann::ordered_json by_pair(const std::array<T, 4>& values) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (SettingPair p : kAllPairs) {
        j[to_string(p)] = values[static_cast<std::size_t>(p)];
    }
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const GammaResult& result) {
    std::array<double, 4> terms{};
    for (std::size_t k = 0; k < 4; ++k) {
        terms[k] = round_to(result.per_term[k], 6);
    }
    return {
        {"gamma", round_to(result.value, 6)},
        {"per_term", by_pair(terms)},
        {"n_used", by_pair(result.n_used)},
        {"bound_satisfied", result.bound_satisfied()},
    };
}

nlohmann::ordered_json to_json(const ResortReport& report) {
    nlohmann::ordered_json j;
    j["feasible"] = report.feasible;
    j["applicable"] = report.applicable;
    j["closure"] = report.closure ? nlohmann::ordered_json(*report.closure) : nlohmann::ordered_json(nullptr);
    j["hamming_b"] = report.hamming_b;
    j["hamming_best_effort"] = report.hamming_best_effort;
    j["n_per"] = report.n_per;
    j["gamma_subruns"] = round_to(report.gamma_subruns, 6);
    j["gamma_resorted"] = report.gamma_resorted ? nlohmann::ordered_json(round_to(*report.gamma_resorted, 6))
                                                : nlohmann::ordered_json(nullptr);
    j["count_deficits"] = report.count_deficits;
    return j;
}

}  // namespace chsh
