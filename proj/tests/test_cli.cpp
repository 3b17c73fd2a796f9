#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chsh/sources.hpp"
#include "cli.hpp"
#include "json.hpp"

using namespace chsh;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "chsh");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("chsh_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

// Sub-run CSV whose four lists all come from one counterfactual run, unshuffled.
std::string identical_copies_csv(std::size_t n) {
    const auto cf = lhv_generate(LhvModel{}, SettingsQuad::optimal(), n, RngSpec{3, 0});
    SubRunDataset data;
    for (std::size_t j = 0; j < n; ++j) {
        data[SettingPair::ab].push_back({cf.a()[j], cf.b()[j]});
        data[SettingPair::ac].push_back({cf.a()[j], cf.c()[j]});
        data[SettingPair::db].push_back({cf.d()[j], cf.b()[j]});
        data[SettingPair::dc].push_back({cf.d()[j], cf.c()[j]});
    }
    std::ostringstream out;
    write_subrun_csv(out, data);
    return out.str();
}

}  // namespace

TEST_CASE("simulate writes the expected row counts") {
    TempDir dir;
    const auto lhv = run({"simulate", "--mode", "lhv", "--n", "1000", "--seed", "7", "-o", dir.file("cf.csv")});
    CHECK(lhv.code == 0);
    const std::string cf = slurp(dir.file("cf.csv"));
    CHECK(cf.starts_with("j,a,d,b,c\n"));
    CHECK(count_lines(cf) == 1001);

    const auto qm = run({"simulate", "--mode", "qm", "--n-per", "1000", "--seed", "7"});
    CHECK(qm.code == 0);
    CHECK(qm.out.starts_with("pair,outcome_a,outcome_b\n"));
    CHECK(count_lines(qm.out) == 4001);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({"simulate", "--mode", "lhv", "--n", "10"}).code == 2);
    CHECK(run({"simulate", "--mode", "lhv", "--n", "10"}).err.find("--seed") != std::string::npos);
    CHECK(run({"simulate", "--mode", "bogus", "--n", "10", "--seed", "1"}).code == 2);
    CHECK(run({"simulate", "--mode", "qm", "--n-per", "10", "--seed", "1", "--b", "10", "--c", "190"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"sweep", "--n-per", "10"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate output round-trips through ingestion") {
    const auto qm = run({"simulate", "--mode", "qm", "--n-per", "300", "--seed", "11", "--stream", "2"});
    std::istringstream in(qm.out);
    const auto expected =
        generate_subruns(SettingsQuad::optimal(), CorrelationLaw::photon_malus, 300, RngSpec{11, 2});
    CHECK(ingest_csv(in) == expected);

    const auto lhv = run({"simulate", "--mode", "lhv", "--n", "300", "--seed", "11", "--a", "10", "--d", "50"});
    std::istringstream cin(lhv.out);
    const SettingsQuad s(Angle::degrees(10), Angle::degrees(50), Angle::degrees(22.5), Angle::degrees(-22.5));
    CHECK(ingest_counterfactual_csv(cin) == lhv_generate(LhvModel{}, s, 300, RngSpec{11, 0}));
}

TEST_CASE("estimate on counterfactual input always satisfies the bound") {
    TempDir dir;
    run({"simulate", "--mode", "lhv", "--n", "5000", "--seed", "2", "-o", dir.file("cf.csv")});
    const auto r = run({"estimate", "--in", dir.file("cf.csv")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["input_kind"] == "counterfactual");
    CHECK(j["bound_satisfied"] == true);
    CHECK(j["max_abs"] == 2);
    CHECK(j["n_used"]["dc"] == 5000);
}

TEST_CASE("estimate on optimal quantum sub-runs violates the bound") {
    TempDir dir;
    run({"simulate", "--mode", "qm", "--n-per", "200000", "--seed", "2", "--threads", "4", "-o", dir.file("qm.csv")});
    const auto r = run({"estimate", "--in", dir.file("qm.csv")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["input_kind"] == "subrun");
    CHECK(j["gamma"].get<double>() == doctest::Approx(2.828).epsilon(0.02));
    CHECK(j["bound_satisfied"] == false);
    CHECK_FALSE(j.contains("max_abs"));
}

TEST_CASE("estimate data errors exit with 1") {
    TempDir dir;
    write_file(dir.file("empty.csv"), "");
    const auto empty = run({"estimate", "--in", dir.file("empty.csv")});
    CHECK(empty.code == 1);
    CHECK(empty.err.find("no trials") != std::string::npos);

    write_file(dir.file("bad.csv"), "pair,outcome_a,outcome_b\nab,+1,+1\nxy,+1,+1\n");
    const auto bad = run({"estimate", "--in", dir.file("bad.csv")});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("unknown setting pair at row 2") != std::string::npos);

    CHECK(run({"estimate", "--in", dir.file("missing.csv")}).code == 1);
}

TEST_CASE("resort reports closure as a finding") {
    TempDir dir;
    write_file(dir.file("copies.csv"), identical_copies_csv(400));
    const auto copies = run({"resort", "--in", dir.file("copies.csv")});
    REQUIRE(copies.code == 0);
    const auto jc = nlohmann::json::parse(copies.out);
    CHECK(jc["closure"] == true);
    CHECK(jc["hamming_b"] == 0);
    CHECK(jc["feasible"] == nlohmann::json::array({true, true, true}));
    CHECK(std::abs(jc["gamma_resorted"].get<double>()) <= 2.0);

    run({"simulate", "--mode", "qm", "--n-per", "1000", "--seed", "5", "-o", dir.file("qm.csv")});
    const auto indep = run({"resort", "--in", dir.file("qm.csv"), "--policy", "uniform-random", "--seed", "1"});
    REQUIRE(indep.code == 0);
    const auto ji = nlohmann::json::parse(indep.out);
    CHECK(ji["closure"] != true);
    CHECK(ji["hamming_b"].get<int>() > 300);
    CHECK(ji["count_deficits"].size() == 3);

    const auto again = run({"resort", "--in", dir.file("qm.csv"), "--policy", "uniform-random", "--seed", "1"});
    CHECK(again.out == indep.out);

    CHECK(run({"resort", "--in", dir.file("qm.csv"), "--policy", "uniform-random"}).code == 2);
}

TEST_CASE("resort needs equal lengths unless trimming") {
    TempDir dir;
    write_file(dir.file("ragged.csv"),
               "pair,outcome_a,outcome_b\nab,+1,+1\nab,-1,+1\nac,+1,+1\ndb,+1,-1\ndc,-1,-1\n");
    const auto ragged = run({"resort", "--in", dir.file("ragged.csv")});
    CHECK(ragged.code == 1);
    CHECK(ragged.err.find("cascade requires equal lengths") != std::string::npos);
    const auto trimmed = run({"resort", "--in", dir.file("ragged.csv"), "--trim"});
    CHECK(trimmed.code == 0);
    CHECK(nlohmann::json::parse(trimmed.out)["n_per"] == 1);
}

TEST_CASE("sweep rows and closed-form anchors") {
    const auto r = run({"sweep", "--from", "0", "--to", "45", "--steps", "2", "--n-per", "20000", "--seed", "3"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "offset_deg,gamma_theory,gamma_empirical");
    CHECK(rows[1].starts_with("0.00,2.828427,"));
    // at 22.5 deg b and c coincide: theory = 2 E(a,b) = 2 cos 0 = 2
    CHECK(rows[2].starts_with("22.50,2.000000,"));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto first = rows[i].find(',');
        const auto second = rows[i].find(',', first + 1);
        const double theory = std::stod(rows[i].substr(first + 1, second - first - 1));
        const double empirical = std::stod(rows[i].substr(second + 1));
        CHECK(std::abs(theory - empirical) < 0.05);
    }
    const auto longer = run({"sweep", "--steps", "36", "--n-per", "100", "--seed", "3"});
    CHECK(count_lines(longer.out) == 38);
}

TEST_CASE("audit verdicts") {
    TempDir dir;
    write_file(dir.file("copies.csv"), identical_copies_csv(100));
    const auto copies = run({"audit", "--in", dir.file("copies.csv")});
    REQUIRE(copies.code == 0);
    const auto jc = nlohmann::json::parse(copies.out);
    CHECK(jc["verdict"] == "re-sortable; Bell bound applies");
    CHECK(jc["sequences"].size() == 8);
    CHECK(jc["closure_context"]["n"] == 100);

    run({"simulate", "--mode", "qm", "--n-per", "500", "--seed", "8", "-o", dir.file("qm.csv")});
    const auto indep = run({"audit", "--in", dir.file("qm.csv"), "--policy", "uniform-random", "--seed", "4"});
    REQUIRE(indep.code == 0);
    const std::string verdict = nlohmann::json::parse(indep.out)["verdict"];
    CHECK(verdict.starts_with("not re-sortable; Bell bound inapplicable"));

    write_file(dir.file("mismatch.csv"), "pair,outcome_a,outcome_b\nab,+1,+1\nac,-1,+1\ndb,+1,+1\ndc,+1,+1\n");
    const auto mismatch = run({"audit", "--in", dir.file("mismatch.csv")});
    REQUIRE(mismatch.code == 0);
    const std::string mv = nlohmann::json::parse(mismatch.out)["verdict"];
    CHECK(mv.find("count deficits [ac:+1") != std::string::npos);
}

TEST_CASE("split writes sub-runs and optional provenance") {
    TempDir dir;
    run({"simulate", "--mode", "lhv", "--n", "400", "--seed", "9", "-o", dir.file("cf.csv")});
    const auto r = run({"split", "--in", dir.file("cf.csv"), "--seed", "1", "-o", dir.file("sub.csv"), "--provenance",
                        dir.file("prov.csv")});
    REQUIRE(r.code == 0);
    CHECK(count_lines(slurp(dir.file("sub.csv"))) == 401);
    const std::string prov = slurp(dir.file("prov.csv"));
    CHECK(prov.starts_with("pair,j,a,d,b,c\n"));
    CHECK(count_lines(prov) == 401);
    CHECK(run({"split", "--in", dir.file("cf.csv")}).code == 2);
}
