#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "parapsi/errors.hpp"
#include "parapsi/fields.hpp"
#include "parapsi/grid.hpp"
#include "parapsi/io.hpp"
#include "parapsi/report.hpp"
#include "parapsi/rng.hpp"

using namespace parapsi;

namespace {

EstimateReport sample_report() {
    EstimateReport rep;
    rep.scenario = "demo";
    rep.grid_desc = "d=1 N=8";
    rep.seed = 42;
    ReportRow a;
    a.case_id = "demo.alpha";
    a.inputs = "k=1 eps=0.5";
    a.measured = 0.5;
    a.theory = 0.5;
    a.verdict = "pass";
    rep.add(a);
    ReportRow b;
    b.case_id = "demo.beta";
    b.inputs = "note=has,comma and \"quotes\"";
    b.verdict = "info";
    rep.add(b);
    return rep;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("csv output: header, nan placeholders, quoting") {
    const auto rep = sample_report();
    const std::string csv = to_csv(rep);
    CHECK(csv.rfind("scenario,case,input_params,measured,theory,slope,stderr,verdict\n", 0) == 0);
    CHECK(csv.find("demo,demo.alpha,k=1 eps=0.5,0.5,0.5,nan,nan,pass\n") != std::string::npos);
    // embedded commas and quotes force quoting with doubled quotes
    CHECK(csv.find("\"note=has,comma and \"\"quotes\"\"\"") != std::string::npos);
    CHECK(csv.find(",nan,nan,nan,nan,info\n") != std::string::npos);
}

TEST_CASE("csv bytes ignore runtime metadata") {
    auto rep = sample_report();
    const std::string before = to_csv(rep);
    rep.runtime_sec = 123.456;
    CHECK(to_csv(rep) == before);
    const json j = to_json(rep);
    CHECK(j.at("runtime_sec").get<double>() == 123.456);
}

TEST_CASE("json mirror carries verdicts and the gate") {
    auto rep = sample_report();
    json j = to_json(rep);
    CHECK(j.at("scenario") == "demo");
    CHECK(j.at("seed").get<std::uint64_t>() == 42);
    CHECK(j.at("all_pass").get<bool>());
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j["rows"][0].at("case") == "demo.alpha");
    CHECK(j["rows"][0].at("measured").get<double>() == 0.5);
    CHECK(std::isnan(j["rows"][1].at("measured").get<double>()));

    ReportRow bad;
    bad.case_id = "demo.gamma";
    bad.verdict = "refused";
    rep.add(bad);
    CHECK_FALSE(rep.all_pass());
    CHECK_FALSE(to_json(rep).at("all_pass").get<bool>());
}

TEST_CASE("info and excluded rows never gate") {
    EstimateReport rep;
    for (const char* v : {"pass", "info", "excluded"}) {
        ReportRow r;
        r.case_id = "x";
        r.verdict = v;
        rep.add(r);
    }
    CHECK(rep.all_pass());
    ReportRow f;
    f.case_id = "x";
    f.verdict = "fail";
    rep.add(f);
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("report files round trip through disk") {
    const auto rep = sample_report();
    const std::string csv_path = "/tmp/parapsi_test_report.csv";
    const std::string json_path = "/tmp/parapsi_test_report.json";
    write_csv(rep, csv_path);
    write_json(rep, json_path);
    CHECK(slurp(csv_path) == to_csv(rep));
    const json parsed = json::parse(slurp(json_path));
    CHECK(parsed.at("scenario") == "demo");
    CHECK(parsed.at("rows").size() == 2);
    std::remove(csv_path.c_str());
    std::remove(json_path.c_str());

    CHECK_THROWS_AS(write_csv(rep, "/nonexistent-dir/x.csv"), input_error);
}

TEST_CASE("field binary round trip preserves grid, layout, and samples") {
    SpacetimeGrid g;
    g.d = 1;
    g.L = 8.0;
    g.N = 16;
    g.T = 2.0;
    g.Nt = 4;
    Rng rng(7);
    for (auto layout : {FieldLayout::spacetime, FieldLayout::slice}) {
        Field f = Field::zeros(g, layout);
        for (auto& v : f.values) v = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const std::string path = "/tmp/parapsi_test_field.bin";
        write_field_binary(path, f);
        const Field back = read_field_binary(path);
        CHECK(back.grid.same_mesh(g));
        CHECK(back.layout == f.layout);
        REQUIRE(back.values.size() == f.values.size());
        for (std::size_t k = 0; k < f.values.size(); ++k) REQUIRE(back.values[k] == f.values[k]);
        std::remove(path.c_str());
    }
}

TEST_CASE("binary readers reject wrong kinds and truncated payloads") {
    SpacetimeGrid g;
    g.d = 1;
    g.L = 8.0;
    g.N = 16;
    g.T = 2.0;
    g.Nt = 4;
    Field f = Field::zeros(g, FieldLayout::slice);
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = double(k);
    const std::string path = "/tmp/parapsi_test_mixed.bin";
    write_field_binary(path, f);
    CHECK_THROWS_AS(read_slice_binary(path), input_error);

    const std::string full = slurp(path);
    {
        std::ofstream os(path, std::ios::binary);
        os.write(full.data(), static_cast<std::streamsize>(full.size() - 16));
    }
    CHECK_THROWS_AS(read_field_binary(path), input_error);
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_field_binary("/tmp/parapsi_missing_file.bin"), input_error);
}
