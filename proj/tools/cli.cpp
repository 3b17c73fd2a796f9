#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "chsh/estimators.hpp"
#include "chsh/report_json.hpp"
#include "chsh/resort.hpp"
#include "chsh/sources.hpp"

namespace chsh::cli {
namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Command { simulate, split, estimate, resort, sweep, audit };

struct RunConfig {
    Command command = Command::estimate;
    std::string mode;
    std::size_t n = 0;
    std::size_t n_per = 0;
    std::optional<std::uint64_t> seed;
    std::uint64_t stream = 0;
    double a_deg = 0.0, d_deg = 45.0, b_deg = 22.5, c_deg = -22.5;
    std::string law = "photon-malus";
    std::string model = "sign-malus";
    std::string policy = "stable";
    bool trim = false;
    std::string input;
    std::string output = "-";
    std::string provenance;
    double from_deg = 0.0, to_deg = 90.0;
    std::size_t steps = 36;
    unsigned threads = 1;
};

// ---------------------------------------------------------------------------
// helpers

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) {
        throw UsageError("--seed is required for this command");
    }
    return *cfg.seed;
}

RngSpec rng_of(const RunConfig& cfg) { return RngSpec{require_seed(cfg), cfg.stream}; }

CorrelationLaw law_of(const RunConfig& cfg) {
    const auto law = parse_correlation_law(cfg.law);
    if (!law) {
        throw UsageError("unknown correlation law '" + cfg.law + "'");
    }
    return *law;
}

LhvModel model_of(const RunConfig& cfg) {
    if (cfg.model != "sign-malus") {
        throw UsageError("unknown hidden-variable model '" + cfg.model + "'");
    }
    return LhvModel{ResponseRule::sign_malus};
}

SettingsQuad settings_of(const RunConfig& cfg) {
    try {
        return SettingsQuad(Angle::degrees(cfg.a_deg), Angle::degrees(cfg.d_deg), Angle::degrees(cfg.b_deg),
                            Angle::degrees(cfg.c_deg));
    } catch (const Error& e) {
        throw UsageError(std::string("invalid angles: ") + e.what());
    }
}

ResortPolicy policy_of(const RunConfig& cfg) {
    if (cfg.policy == "stable") {
        return ResortPolicy::stable();
    }
    if (cfg.policy == "uniform-random") {
        return ResortPolicy::uniform_random(rng_of(cfg));
    }
    throw UsageError("unknown re-sorting policy '" + cfg.policy + "'");
}

Parallelism par_of(const RunConfig& cfg) { return Parallelism{cfg.threads}; }

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw Error("cannot open '" + path + "' for writing");
            }
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }
    void finish() {
        stream_->flush();
        if (!*stream_) {
            throw Error("write failed");
        }
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return in;
}

SubRunDataset read_subruns(const RunConfig& cfg) {
    auto in = open_input(cfg.input);
    return ingest_csv(in);
}

void emit_json(const RunConfig& cfg, std::ostream& out, const Json& j) {
    Output o(cfg.output, out);
    o.get() << j.dump(2) << '\n';
    o.finish();
}

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, round_to(value, decimals));
    return buf;
}

// ---------------------------------------------------------------------------
// commands

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const RngSpec rng = rng_of(cfg);
    if (cfg.mode == "lhv") {
        if (cfg.n == 0) throw UsageError("--n must be >= 1 in lhv mode");
        const auto data = lhv_generate(model_of(cfg), settings_of(cfg), cfg.n, rng, par_of(cfg));
        Output o(cfg.output, out);
        write_counterfactual_csv(o.get(), data);
        o.finish();
    } else if (cfg.mode == "qm") {
        if (cfg.n_per == 0) throw UsageError("--n-per must be >= 1 in qm mode");
        const auto data = generate_subruns(settings_of(cfg), law_of(cfg), cfg.n_per, rng, par_of(cfg));
        Output o(cfg.output, out);
        write_subrun_csv(o.get(), data);
        o.finish();
    } else {
        throw UsageError("--mode must be 'lhv' or 'qm'");
    }
}

void cmd_split(const RunConfig& cfg, std::ostream& out) {
    const RngSpec rng = rng_of(cfg);
    auto in = open_input(cfg.input);
    const CounterfactualDataset data = ingest_counterfactual_csv(in);
    const SplitResult split = split_random_traced(data, rng, par_of(cfg));
    Output o(cfg.output, out);
    write_subrun_csv(o.get(), split.data);
    o.finish();

    if (!cfg.provenance.empty()) {
        // diagnostics only: the dropped counterfactual outcomes of every kept trial
        Output p(cfg.provenance, out);
        p.get() << "pair,j,a,d,b,c\n";
        for (SettingPair pair : kAllPairs) {
            for (std::size_t j : split.source_index[static_cast<std::size_t>(pair)]) {
                p.get() << to_string(pair) << ',' << (j + 1) << ',' << data.a()[j].value() << ','
                        << data.d()[j].value() << ',' << data.b()[j].value() << ',' << data.c()[j].value() << '\n';
            }
        }
        p.finish();
    }
}

Json estimate_report(const IngestedData& data) {
    if (const auto* cf = std::get_if<CounterfactualDataset>(&data)) {
        Json j = {{"input_kind", "counterfactual"}};
        j.update(to_json(gamma_pooled(*cf)));
        j["max_abs"] = termwise_bound_check(*cf).max_abs;
        return j;
    }
    Json j = {{"input_kind", "subrun"}};
    j.update(to_json(gamma_subruns(std::get<SubRunDataset>(data))));
    return j;
}

void cmd_estimate(const RunConfig& cfg, std::ostream& out) {
    auto in = open_input(cfg.input);
    emit_json(cfg, out, estimate_report(ingest_any_csv(in)));
}

SubRunDataset prepare_for_cascade(const RunConfig& cfg, SubRunDataset data) {
    if (cfg.trim) {
        return trim_to_shortest(data);
    }
    return data;
}

void cmd_resort(const RunConfig& cfg, std::ostream& out) {
    const ResortPolicy policy = policy_of(cfg);
    const SubRunDataset data = prepare_for_cascade(cfg, read_subruns(cfg));
    Json j = to_json(resort_cascade(data, policy));
    j["policy"] = cfg.policy;
    emit_json(cfg, out, j);
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    const RngSpec rng = rng_of(cfg);
    const CorrelationLaw law = law_of(cfg);
    if (cfg.steps == 0) throw UsageError("--steps must be >= 1");
    if (cfg.n_per == 0) throw UsageError("--n-per must be >= 1");
    const SettingsQuad base = settings_of(cfg);

    Output o(cfg.output, out);
    o.get() << "offset_deg,gamma_theory,gamma_empirical\n";
    for (std::size_t i = 0; i <= cfg.steps; ++i) {
        const double offset = cfg.from_deg + (cfg.to_deg - cfg.from_deg) * static_cast<double>(i) /
                                                 static_cast<double>(cfg.steps);
        // arm-B settings close in on each other; at 22.5 deg from the optimal quad b == c
        const Angle a = base.a(), d = base.d();
        const Angle b = Angle::degrees(base.b().degrees() - offset);
        const Angle c = Angle::degrees(base.c().degrees() + offset);
        const RngSpec step_rng = rng.child(i);
        SubRunDataset runs;
        runs[SettingPair::ab] = qm_generate(a, b, law, cfg.n_per, step_rng.child(0), par_of(cfg));
        runs[SettingPair::ac] = qm_generate(a, c, law, cfg.n_per, step_rng.child(1), par_of(cfg));
        runs[SettingPair::db] = qm_generate(d, b, law, cfg.n_per, step_rng.child(2), par_of(cfg));
        runs[SettingPair::dc] = qm_generate(d, c, law, cfg.n_per, step_rng.child(3), par_of(cfg));
        o.get() << fixed(offset, 2) << ',' << fixed(theory_gamma(a, d, b, c, law), 6) << ','
                << fixed(gamma_subruns(runs).value, 6) << '\n';
    }
    o.finish();
}

std::string audit_verdict(const ResortReport& r) {
    if (r.all_feasible() && r.closure.value_or(false)) {
        return "re-sortable; Bell bound applies";
    }
    std::ostringstream v;
    v << "not re-sortable; Bell bound inapplicable";
    if (!r.all_feasible()) {
        static constexpr const char* kStepNames[] = {"ac", "dc", "db"};
        v << "; count deficits [";
        for (std::size_t s = 0; s < ResortReport::kSteps; ++s) {
            v << (s ? ", " : "") << kStepNames[s] << ':' << (r.count_deficits[s] > 0 ? "+" : "")
              << r.count_deficits[s] << (r.applicable[s] ? "" : " (best-effort)");
        }
        v << ']';
    } else {
        v << "; closure fails at " << r.hamming_b << " positions";
    }
    return v.str();
}

void cmd_audit(const RunConfig& cfg, std::ostream& out) {
    const ResortPolicy policy = policy_of(cfg);
    const SubRunDataset raw = read_subruns(cfg);
    const SubRunDataset data = prepare_for_cascade(cfg, raw);
    const ResortReport report = resort_cascade(data, policy);

    Json sequences = Json::array();
    const auto describe = [&](const char* name, SettingPair pair, bool arm_a) {
        const OutcomeSequence s = arm_outcomes(data[pair], arm_a);
        sequences.push_back({{"name", name}, {"n", s.size()}, {"plus_count", s.plus_count()}});
    };
    describe("a1", SettingPair::ab, true);
    describe("b1", SettingPair::ab, false);
    describe("a2", SettingPair::ac, true);
    describe("c2", SettingPair::ac, false);
    describe("d3", SettingPair::db, true);
    describe("b3", SettingPair::db, false);
    describe("d4", SettingPair::dc, true);
    describe("c4", SettingPair::dc, false);

    const std::size_t n = report.n_per;
    const std::size_t k = arm_outcomes(data[SettingPair::ab], false).plus_count();
    Json j;
    j["estimate"] = to_json(gamma_subruns(data));
    j["resort"] = to_json(report);
    j["resort"]["policy"] = cfg.policy;
    j["sequences"] = sequences;
    j["closure_context"] = {
        {"n", n},
        {"k", k},
        {"probability", closure_probability_exact(n, k)},
        {"log10_probability", round_to(closure_log10_probability(n, k), 6)},
    };
    j["trimmed"] = cfg.trim && raw.total_trials() != data.total_trials();
    j["verdict"] = audit_verdict(report);
    emit_json(cfg, out, j);
}

// ---------------------------------------------------------------------------
// argument wiring

void add_angles(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--a", cfg.a_deg, "arm-A first setting (degrees)")->capture_default_str();
    sub->add_option("--d", cfg.d_deg, "arm-A second setting (degrees)")->capture_default_str();
    sub->add_option("--b", cfg.b_deg, "arm-B first setting (degrees)")->capture_default_str();
    sub->add_option("--c", cfg.c_deg, "arm-B second setting (degrees)")->capture_default_str();
}

void add_seed(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--seed", cfg.seed, "RNG seed (no wall-clock seeding)");
    sub->add_option("--stream", cfg.stream, "RNG stream id")->capture_default_str();
}

void add_threads(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--threads", cfg.threads, "worker threads; output does not depend on it")
        ->check(CLI::Range(1u, 256u))
        ->capture_default_str();
}

void add_output(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("-o,--out", cfg.output, "output path, '-' for stdout")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"CHSH trial-data simulator and analysis toolkit", "chsh"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "generate counterfactual (lhv) or sub-run (qm) CSV");
    simulate->add_option("--mode", cfg.mode, "lhv or qm")->required()->check(CLI::IsMember({"lhv", "qm"}));
    simulate->add_option("--n", cfg.n, "trial count (lhv)");
    simulate->add_option("--n-per", cfg.n_per, "trials per setting pair (qm)");
    simulate->add_option("--law", cfg.law, "photon-malus or spin-half")->capture_default_str();
    simulate->add_option("--model", cfg.model, "hidden-variable response rule")->capture_default_str();
    add_angles(simulate, cfg);
    add_seed(simulate, cfg);
    add_threads(simulate, cfg);
    add_output(simulate, cfg);
    simulate->callback([&] { cfg.command = Command::simulate; });

    auto* split = app.add_subcommand("split", "randomly split a counterfactual CSV into four sub-runs");
    split->add_option("-i,--in", cfg.input, "counterfactual CSV")->required();
    split->add_option("--provenance", cfg.provenance, "diagnostics: write source trials of each kept pair");
    add_seed(split, cfg);
    add_threads(split, cfg);
    add_output(split, cfg);
    split->callback([&] { cfg.command = Command::split; });

    auto* estimate = app.add_subcommand("estimate", "compute Gamma for a counterfactual or sub-run CSV");
    estimate->add_option("-i,--in", cfg.input, "input CSV")->required();
    add_output(estimate, cfg);
    estimate->callback([&] { cfg.command = Command::estimate; });

    auto* resort = app.add_subcommand("resort", "run the re-sorting cascade on a sub-run CSV");
    resort->add_option("-i,--in", cfg.input, "sub-run CSV")->required();
    resort->add_option("--policy", cfg.policy, "stable or uniform-random")->capture_default_str();
    resort->add_flag("--trim", cfg.trim, "truncate all sub-runs to the shortest (lossy)");
    add_seed(resort, cfg);
    add_output(resort, cfg);
    resort->callback([&] { cfg.command = Command::resort; });

    auto* sweep = app.add_subcommand("sweep", "theory vs empirical Gamma as arm-B settings converge");
    sweep->add_option("--from", cfg.from_deg, "first offset (degrees)")->capture_default_str();
    sweep->add_option("--to", cfg.to_deg, "last offset (degrees)")->capture_default_str();
    sweep->add_option("--steps", cfg.steps, "number of intervals; rows = steps + 1")->capture_default_str();
    sweep->add_option("--n-per", cfg.n_per, "trials per setting pair and offset")->required();
    sweep->add_option("--law", cfg.law, "photon-malus or spin-half")->capture_default_str();
    add_angles(sweep, cfg);
    add_seed(sweep, cfg);
    add_threads(sweep, cfg);
    add_output(sweep, cfg);
    sweep->callback([&] { cfg.command = Command::sweep; });

    auto* audit = app.add_subcommand("audit", "estimate + cascade + closure odds for an external sub-run CSV");
    audit->add_option("-i,--in", cfg.input, "sub-run CSV")->required();
    audit->add_option("--policy", cfg.policy, "stable or uniform-random")->capture_default_str();
    audit->add_flag("--trim", cfg.trim, "truncate all sub-runs to the shortest (lossy)");
    add_seed(audit, cfg);
    add_output(audit, cfg);
    audit->callback([&] { cfg.command = Command::audit; });

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        switch (cfg.command) {
            case Command::simulate: cmd_simulate(cfg, out); break;
            case Command::split: cmd_split(cfg, out); break;
            case Command::estimate: cmd_estimate(cfg, out); break;
            case Command::resort: cmd_resort(cfg, out); break;
            case Command::sweep: cmd_sweep(cfg, out); break;
            case Command::audit: cmd_audit(cfg, out); break;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace chsh::cli
