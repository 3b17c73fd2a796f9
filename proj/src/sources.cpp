#include "chsh/sources.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "parallel.hpp"

namespace chsh {

Outcome LhvModel::respond(Angle setting, double lambda) const {
    switch (rule) {
        case ResponseRule::sign_malus:
            return Outcome::from_sign(std::cos(2.0 * (setting.radians() - lambda)) >= 0.0);
    }
    throw Error("unknown response rule");
}

double correlation_law(CorrelationLaw law, Angle alpha, Angle beta) {
    const double delta = alpha.radians() - beta.radians();
    switch (law) {
        case CorrelationLaw::photon_malus: return std::cos(2.0 * delta);
        case CorrelationLaw::spin_half: return -std::cos(delta);
    }
    throw Error("unknown correlation law");
}

const char* to_string(CorrelationLaw law) {
    return law == CorrelationLaw::photon_malus ? "photon-malus" : "spin-half";
}

std::optional<CorrelationLaw> parse_correlation_law(std::string_view name) {
    if (name == "photon-malus") return CorrelationLaw::photon_malus;
    if (name == "spin-half") return CorrelationLaw::spin_half;
    return std::nullopt;
}

namespace {

std::vector<Outcome> filled(std::size_t n) { return std::vector<Outcome>(n, Outcome::plus()); }

}  // namespace

CounterfactualDataset lhv_generate(const LhvModel& model, const SettingsQuad& settings, std::size_t n,
                                   const RngSpec& rng, Parallelism par) {
    if (n == 0) {
        throw Error("lhv_generate requires n >= 1");
    }
    std::vector<double> lambdas(n);
    detail::parallel_chunks(n, par.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            lambdas[j] = std::numbers::pi * to_unit_interval(random_block(rng, j)[0]);
        }
    });
    return lhv_generate_from(model, settings, lambdas);
}

CounterfactualDataset lhv_generate_from(const LhvModel& model, const SettingsQuad& settings,
                                        std::span<const double> lambdas) {
    const std::size_t n = lambdas.size();
    auto a = filled(n), d = filled(n), b = filled(n), c = filled(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lambda = lambdas[j];
        a[j] = model.respond(settings.a(), lambda);
        d[j] = model.respond(settings.d(), lambda);
        b[j] = model.respond(settings.b(), lambda);
        c[j] = model.respond(settings.c(), lambda);
    }
    return CounterfactualDataset(OutcomeSequence(std::move(a)), OutcomeSequence(std::move(d)),
                                 OutcomeSequence(std::move(b)), OutcomeSequence(std::move(c)), settings);
}

TrialList qm_generate(Angle alpha, Angle beta, CorrelationLaw law, std::size_t n, const RngSpec& rng,
                      Parallelism par) {
    if (n == 0) {
        throw Error("qm_generate requires n >= 1");
    }
    const double p_equal = 0.5 * (1.0 + correlation_law(law, alpha, beta));
    TrialList trials(n, SubRunTrial{Outcome::plus(), Outcome::plus()});
    detail::parallel_chunks(n, par.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto block = random_block(rng, j);
            const Outcome s = Outcome::from_sign((block[0] >> 63) != 0);
            const Outcome t = to_unit_interval(block[1]) < p_equal ? s : -s;
            trials[j] = SubRunTrial{s, t};
        }
    });
    return trials;
}

SubRunDataset generate_subruns(const SettingsQuad& settings, CorrelationLaw law, std::size_t n_per,
                               const RngSpec& rng, Parallelism par) {
    SubRunDataset data;
    data.settings = settings;
    data[SettingPair::ab] = qm_generate(settings.a(), settings.b(), law, n_per, rng.child(0), par);
    data[SettingPair::ac] = qm_generate(settings.a(), settings.c(), law, n_per, rng.child(1), par);
    data[SettingPair::db] = qm_generate(settings.d(), settings.b(), law, n_per, rng.child(2), par);
    data[SettingPair::dc] = qm_generate(settings.d(), settings.c(), law, n_per, rng.child(3), par);
    return data;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

std::string row_tag(std::size_t row) { return "at row " + std::to_string(row); }

Outcome parse_outcome(std::string_view text, std::size_t row) {
    if (text == "+1") return Outcome::plus();
    if (text == "-1") return Outcome::minus();
    throw Error("outcome outside {+1, -1} " + row_tag(row) + ": '" + std::string(text) + "'");
}

void check_header(std::string_view header, std::string_view expected) {
    const auto got = split_fields(header);
    const auto want = split_fields(expected);
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (i >= got.size() || got[i] != want[i]) {
            throw Error("missing column '" + std::string(want[i]) + "' in header");
        }
    }
    if (got.size() > want.size()) {
        throw Error("unexpected column '" + std::string(got[want.size()]) + "' in header");
    }
}

/// Data rows are numbered from 1; the header is not counted. Blank lines are skipped.
template <typename RowFn>
std::size_t for_each_row(std::istream& in, std::size_t columns, RowFn&& fn) {
    std::string line;
    std::size_t row = 0;
    while (read_line(in, line)) {
        if (line.empty()) {
            continue;
        }
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() < columns) {
            throw Error("missing column " + row_tag(row));
        }
        if (fields.size() > columns) {
            throw Error("too many columns " + row_tag(row));
        }
        fn(fields, row);
    }
    return row;
}

SubRunDataset parse_subrun_rows(std::istream& in) {
    SubRunDataset data;
    const std::size_t rows = for_each_row(in, 3, [&](const auto& f, std::size_t row) {
        const auto pair = parse_setting_pair(f[0]);
        if (!pair) {
            throw Error("unknown setting pair " + row_tag(row) + ": '" + std::string(f[0]) + "'");
        }
        data[*pair].push_back(SubRunTrial{parse_outcome(f[1], row), parse_outcome(f[2], row)});
    });
    if (rows == 0) {
        throw Error("no trials");
    }
    return data;
}

CounterfactualDataset parse_counterfactual_rows(std::istream& in) {
    std::vector<Outcome> a, d, b, c;
    const std::size_t rows = for_each_row(in, 5, [&](const auto& f, std::size_t row) {
        a.push_back(parse_outcome(f[1], row));
        d.push_back(parse_outcome(f[2], row));
        b.push_back(parse_outcome(f[3], row));
        c.push_back(parse_outcome(f[4], row));
    });
    if (rows == 0) {
        throw Error("no trials");
    }
    return CounterfactualDataset(OutcomeSequence(std::move(a)), OutcomeSequence(std::move(d)),
                                 OutcomeSequence(std::move(b)), OutcomeSequence(std::move(c)));
}

std::string read_header(std::istream& in) {
    std::string header;
    while (read_line(in, header)) {
        if (!header.empty()) {
            return header;
        }
    }
    throw Error("no trials");
}

const char* outcome_text(Outcome o) { return o.is_plus() ? "+1" : "-1"; }

}  // namespace

SubRunDataset ingest_csv(std::istream& in) {
    check_header(read_header(in), kSubRunHeader);
    return parse_subrun_rows(in);
}

CounterfactualDataset ingest_counterfactual_csv(std::istream& in) {
    check_header(read_header(in), kCounterfactualHeader);
    return parse_counterfactual_rows(in);
}

IngestedData ingest_any_csv(std::istream& in) {
    const std::string header = read_header(in);
    if (header.starts_with("j,")) {
        check_header(header, kCounterfactualHeader);
        return parse_counterfactual_rows(in);
    }
    check_header(header, kSubRunHeader);
    return parse_subrun_rows(in);
}

void write_subrun_csv(std::ostream& out, const SubRunDataset& data) {
    out << kSubRunHeader << '\n';
    for (SettingPair p : kAllPairs) {
        for (const SubRunTrial& t : data[p]) {
            out << to_string(p) << ',' << outcome_text(t.outcome_a) << ',' << outcome_text(t.outcome_b) << '\n';
        }
    }
}

void write_counterfactual_csv(std::ostream& out, const CounterfactualDataset& data) {
    out << kCounterfactualHeader << '\n';
    for (std::size_t j = 0; j < data.size(); ++j) {
        out << (j + 1) << ',' << outcome_text(data.a()[j]) << ',' << outcome_text(data.d()[j]) << ','
            << outcome_text(data.b()[j]) << ',' << outcome_text(data.c()[j]) << '\n';
    }
}

}  // namespace chsh
