#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include "pdechain/jsonio.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string command =
        std::string("\"") + PDECHAIN_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
#ifdef __unix__
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

const std::string kPacks = PDECHAIN_PACKS_DIR;

}  // namespace

TEST_CASE("cli runs a bundled case end to end") {
    const fs::path out = fresh_dir("pdechain_cli_run");
    const int code = run_cli("run --case heat_01 --pack " + kPacks + "/mainpack --out " +
                             out.string());
    CHECK(code == 0);
    for (const char* name : {"answer.md", "graph.json", "actions.jsonl", "pool.json",
                             "config.json"})
        CHECK(fs::exists(out / name));

    // The produced execution graph scores perfectly against itself.
    const std::string graph = (out / "graph.json").string();
    CHECK(run_cli("eval --exec " + graph + " --pattern " + graph) == 0);
    fs::remove_all(out);
}

TEST_CASE("cli maps bad invocations to the usage exit code") {
    CHECK(run_cli("") == 2);                                        // subcommand required
    CHECK(run_cli("frobnicate") == 2);                              // unknown subcommand
    CHECK(run_cli("bench --pack " + kPacks + "/no_such_pack") == 2);   // missing manifest
    CHECK(run_cli("eval --exec /nonexistent.json --pattern /nonexistent.json") == 2);
    CHECK(run_cli("run --query \"solve the heat equation\" --provider http") != 0);
}

TEST_CASE("cli bench propagates case failures through the exit code") {
    const fs::path out = fresh_dir("pdechain_cli_bench_static");
    const int code = run_cli("bench --pack " + kPacks + "/faultpack --mode static --out " +
                             out.string());
    CHECK(code == 1);
    REQUIRE(fs::exists(out / "report.json"));
    const pdechain::Json report = pdechain::read_json_file(out / "report.json");
    CHECK(report["totals"]["pass"].get<int>() < report["totals"]["cases"].get<int>());
    CHECK(fs::exists(out / "report.md"));

    // The side-by-side renderer accepts the directory it wrote.
    CHECK(run_cli("report " + out.string()) == 0);
    fs::remove_all(out);
}

TEST_CASE("cli bench succeeds on the bundled pack") {
    const fs::path out = fresh_dir("pdechain_cli_bench_main");
    const int code = run_cli("bench --pack " + kPacks + "/mainpack --out " + out.string());
    CHECK(code == 0);
    const pdechain::Json report = pdechain::read_json_file(out / "report.json");
    CHECK(report["totals"]["pass"].get<int>() == 12);
    fs::remove_all(out);
}
