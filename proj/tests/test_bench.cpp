#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "pdechain/bench.hpp"
#include "pdechain/errors.hpp"
#include "pdechain/tools.hpp"

using namespace pdechain;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const Json& doc) {
    std::ofstream out(path);
    out << doc.dump(1);
}

Json minimal_case(const std::string& id) {
    return Json{
        {"id", id},
        {"category", "Heat"},
        {"nl_description", "toy case"},
        {"pattern_graph",
         Json{{"nodes", Json::array({Json{{"id", "p1"},
                                          {"role", "define_geometry"},
                                          {"kind", "tool"},
                                          {"seq", 1}}})},
              {"edges", Json::array()}}},
    };
}

bench::ProviderFactory scripted_factory() {
    return [](const bench::BenchCase& c) -> std::unique_ptr<ChatProvider> {
        return std::make_unique<ScriptedProvider>(ScriptFixture::load(c.script));
    };
}

}  // namespace

TEST_CASE("the bundled pack loads twelve well-formed cases") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/mainpack");
    REQUIRE(cases.size() == 12);
    std::set<std::string> ids;
    for (const auto& c : cases) {
        CHECK(ids.insert(c.id).second);
        CHECK(bench::known_category(c.category));
        CHECK_FALSE(c.nl_description.empty());
        CHECK_FALSE(c.pattern_graph.empty());
        CHECK(c.pattern_graph.finalized());
        REQUIRE_FALSE(c.script.empty());
        CHECK(fs::exists(c.script));   // resolved against the case file
        CHECK_FALSE(c.expected_invocations.empty());
        REQUIRE(c.numeric_check.has_value());
        CHECK(c.numeric_check->threshold > 0.0);
    }
}

TEST_CASE("manifests may pull cases from sibling packs") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/mainpack_fault");
    REQUIRE(cases.size() == 12);
    std::set<std::string> ids;
    for (const auto& c : cases) {
        CHECK(ids.insert(c.id).second);
        REQUIRE_FALSE(c.script.empty());
        CHECK(fs::exists(c.script));   // resolved against each case's own directory
    }
    CHECK(ids.count("wave_f1") == 1);

    auto registry = pde::make_default_registry();
    bench::BenchOptions options;
    options.out_dir = fresh_dir("pdechain_bench_mixed");
    bench::BenchReport progact = bench::run_bench(cases, registry, scripted_factory(), options);
    int pass = 0;
    for (const auto& r : progact.results) pass += r.pass ? 1 : 0;
    CHECK(pass == 12);

    bench::BenchOptions frozen = options;
    frozen.session_cfg.mode = "static";
    bench::BenchReport statics = bench::run_bench(cases, registry, scripted_factory(), frozen);
    int static_pass = 0;
    for (const auto& r : statics.results) static_pass += r.pass ? 1 : 0;
    CHECK(static_pass == 11);   // the injected fault is unrecoverable without checkpoints
    fs::remove_all(options.out_dir);
}

TEST_CASE("category taxonomy membership") {
    for (const char* name : {"Heat", "Diffusion", "Diffusion-Reaction", "Wave", "Klein-Gordon",
                             "Advection", "Burgers", "Laplace", "Poisson", "Allen-Cahn", "Other"})
        CHECK(bench::known_category(name));
    CHECK_FALSE(bench::known_category("Schrodinger"));
    CHECK_FALSE(bench::known_category("heat"));   // case-sensitive
}

TEST_CASE("pack loading rejects malformed manifests and cases") {
    SUBCASE("missing manifest") {
        const fs::path dir = fresh_dir("pdechain_pack_nomanifest");
        try {
            bench::load_cases(dir);
            FAIL("expected io_error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::io_error);
            CHECK(std::string(e.what()).find("pack manifest not found") != std::string::npos);
        }
        fs::remove_all(dir);
    }

    SUBCASE("duplicate case id") {
        const fs::path dir = fresh_dir("pdechain_pack_dup");
        write_file(dir / "a.json", minimal_case("same"));
        write_file(dir / "b.json", minimal_case("same"));
        write_file(dir / "pack.json",
                   Json{{"name", "dup"}, {"cases", Json::array({"a.json", "b.json"})}});
        try {
            bench::load_cases(dir);
            FAIL("expected schema_violation");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::schema_violation);
            CHECK(std::string(e.what()).find("duplicate case id: same") != std::string::npos);
        }
        fs::remove_all(dir);
    }

    SUBCASE("missing field names the case and the field") {
        const fs::path dir = fresh_dir("pdechain_pack_field");
        Json doc = minimal_case("broken");
        doc.erase("nl_description");
        write_file(dir / "broken.json", doc);
        write_file(dir / "pack.json", Json{{"name", "p"}, {"cases", Json::array({"broken.json"})}});
        try {
            bench::load_cases(dir);
            FAIL("expected schema_violation");
        } catch (const Error& e) {
            const std::string what = e.what();
            CHECK(what.find("broken") != std::string::npos);
            CHECK(what.find("nl_description") != std::string::npos);
        }
        fs::remove_all(dir);
    }

    SUBCASE("unknown category and bad numeric threshold") {
        const fs::path dir = fresh_dir("pdechain_pack_bad");
        Json off = minimal_case("off");
        off["category"] = "Schrodinger";
        write_file(dir / "off.json", off);
        write_file(dir / "pack.json", Json{{"name", "p"}, {"cases", Json::array({"off.json"})}});
        CHECK_THROWS_AS(bench::load_cases(dir), Error);

        Json neg = minimal_case("neg");
        neg["numeric_check"] = Json{{"reference", "x"}, {"norm", "l2"}, {"threshold", 0.0}};
        write_file(dir / "off.json", neg);
        write_file(dir / "pack.json", Json{{"name", "p"}, {"cases", Json::array({"off.json"})}});
        try {
            bench::load_cases(dir);
            FAIL("expected schema_violation");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("threshold") != std::string::npos);
        }
        fs::remove_all(dir);
    }
}

TEST_CASE("scripted bench run passes every bundled case deterministically") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/mainpack");
    auto registry = pde::make_default_registry();
    bench::BenchOptions options;
    options.out_dir = fresh_dir("pdechain_bench_main");   // keeps export artifacts contained

    bench::BenchReport report = bench::run_bench(cases, registry, scripted_factory(), options);
    REQUIRE(report.results.size() == 12);
    for (const auto& r : report.results) {
        CAPTURE(r.id);
        CAPTURE(r.failure_reason);
        CHECK(r.pass);
        CHECK(r.completed);
        REQUIRE(r.numeric_error.has_value());
    }
    const Json j = report.to_json();
    CHECK(j["totals"]["cases"] == 12);
    CHECK(j["totals"]["pass"] == 12);
    CHECK(j["totals"]["pass_rate"] == 1.0);

    bench::BenchReport again = bench::run_bench(cases, registry, scripted_factory(), options);
    CHECK(j.dump(1) == again.to_json().dump(1));

    const std::string md = report.render_markdown();
    CHECK(md.find("| **total** | 12 | 12 |") != std::string::npos);
    CHECK(md.find("## metric means") != std::string::npos);
    fs::remove_all(options.out_dir);
}

TEST_CASE("parallel execution changes only the config echo") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/mainpack");
    auto registry = pde::make_default_registry();
    bench::BenchOptions serial;
    serial.out_dir = fresh_dir("pdechain_bench_serial");
    bench::BenchOptions parallel;
    parallel.jobs = 4;
    parallel.out_dir = fresh_dir("pdechain_bench_parallel");

    const Json a = bench::run_bench(cases, registry, scripted_factory(), serial).to_json();
    const Json b = bench::run_bench(cases, registry, scripted_factory(), parallel).to_json();
    CHECK(a["cases"] == b["cases"]);
    CHECK(a["totals"] == b["totals"]);
    CHECK(a["metrics"] == b["metrics"]);
    CHECK(a["config"]["jobs"] == 1);
    CHECK(b["config"]["jobs"] == 4);
    fs::remove_all(serial.out_dir);
    fs::remove_all(parallel.out_dir);
}

TEST_CASE("a provider failure folds into the case result instead of throwing") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/mainpack");
    cases.resize(1);
    auto registry = pde::make_default_registry();
    bench::ProviderFactory broken = [](const bench::BenchCase&) -> std::unique_ptr<ChatProvider> {
        return nullptr;
    };
    bench::BenchReport report = bench::run_bench(cases, registry, broken, bench::BenchOptions{});
    REQUIRE(report.results.size() == 1);
    CHECK_FALSE(report.results[0].pass);
    CHECK(report.results[0].failure_reason.find("provider") != std::string::npos);
}

TEST_CASE("bench artifacts are persisted per case when an output dir is set") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    auto registry = pde::make_default_registry();
    bench::BenchOptions options;
    options.out_dir = fresh_dir("pdechain_bench_out");

    bench::BenchReport report = bench::run_bench(cases, registry, scripted_factory(), options);
    REQUIRE(report.results.size() == 5);
    for (const auto& r : report.results) {
        CAPTURE(r.id);
        CAPTURE(r.failure_reason);
        CHECK(r.pass);
        CHECK(fs::exists(options.out_dir / r.id / "actions.jsonl"));
        CHECK(fs::exists(options.out_dir / r.id / "graph.json"));
    }
    fs::remove_all(options.out_dir);
}
