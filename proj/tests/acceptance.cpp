// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
// Every criterion runs offline against the scripted fixtures and the
// independent oracles in oracles.hpp.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef __unix__
#include <sys/wait.h>
#endif

#include "oracles.hpp"
#include "pdechain/bench.hpp"
#include "pdechain/graph_metrics.hpp"
#include "pdechain/kernels.hpp"
#include "pdechain/text_metrics.hpp"
#include "pdechain/tools.hpp"

using namespace pdechain;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
    void note(const std::string& text) {
        if (ok) detail = text;
    }
};

template <typename Body>
void criterion(int number, const std::string& title, Body&& body) {
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = std::string("exception: ") + e.what();
    }
    std::cout << (c.ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << title;
    if (!c.detail.empty()) std::cout << " — " << c.detail;
    std::cout << "\n";
    if (!c.ok) ++g_failures;
}

bench::ProviderFactory scripted_factory() {
    return [](const bench::BenchCase& c) -> std::unique_ptr<ChatProvider> {
        return std::make_unique<ScriptedProvider>(ScriptFixture::load(c.script));
    };
}

bench::BenchReport run_pack(const std::string& pack, const std::string& mode,
                            const fs::path& out_dir = {}) {
    auto cases = bench::load_cases(fs::path(PDECHAIN_PACKS_DIR) / pack);
    auto registry = pde::make_default_registry();
    bench::BenchOptions options;
    options.session_cfg.mode = mode;
    options.out_dir = out_dir;
    return bench::run_bench(cases, registry, scripted_factory(), options);
}

int pass_count(const bench::BenchReport& report) {
    int n = 0;
    for (const auto& r : report.results)
        if (r.pass) ++n;
    return n;
}

// Validation events as persisted: one {"type":"checkpoint"} journal line each.
int count_checkpoint_lines(const fs::path& bench_dir) {
    int events = 0;
    for (const auto& entry : fs::directory_iterator(bench_dir)) {
        if (!entry.is_directory()) continue;
        std::ifstream in(entry.path() / "actions.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const Json j = Json::parse(line);
            if (j.value("type", "") == std::string("checkpoint")) ++events;
        }
    }
    return events;
}

int stats_event_sum(const bench::BenchReport& report) {
    int events = 0;
    for (const auto& r : report.results) events += r.stats.validation_events;
    return events;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args) {
    const std::string command =
        std::string("\"") + PDECHAIN_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
#ifdef __unix__
    if (!WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

ToolGraph chain_graph(const std::vector<std::string>& roles) {
    ToolGraph g;
    for (std::size_t i = 0; i < roles.size(); ++i)
        g.add_node("n" + std::to_string(i + 1), roles[i], NodeKind::tool,
                   static_cast<int>(i + 1));
    for (std::size_t i = 1; i < roles.size(); ++i)
        g.add_edge("n" + std::to_string(i), "n" + std::to_string(i + 1), DepKind::data);
    g.finalize();
    return g;
}

}  // namespace

int main() {
    criterion(1, "bundled pack passes end to end under scripted providers", [](Check& c) {
        const fs::path out = fs::temp_directory_path() / "pdechain_accept_main";
        fs::remove_all(out);
        const auto t0 = std::chrono::steady_clock::now();
        bench::BenchReport report = run_pack("mainpack", "progact", out);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fs::remove_all(out);
        c.require(report.results.size() == 12, "expected 12 cases");
        for (const auto& r : report.results) {
            c.require(r.pass, "case " + r.id + " failed: " + r.failure_reason);
            c.require(r.numeric_error.has_value(), "case " + r.id + " has no numeric error");
        }
        c.require(seconds < 60.0, "runtime " + std::to_string(seconds) + "s exceeds 60s");
        c.note("12/12 in " + std::to_string(seconds).substr(0, 5) + "s");
    });

    criterion(2, "dual-loop recovery beats ablations on the fault pack", [](Check& c) {
        const fs::path base = fs::temp_directory_path() / "pdechain_accept_fault";
        fs::remove_all(base);
        bench::BenchReport progact = run_pack("faultpack", "progact", base / "progact");
        bench::BenchReport statics = run_pack("faultpack", "static", base / "static");
        bench::BenchReport stepwise = run_pack("faultpack", "stepwise", base / "stepwise");

        c.require(pass_count(progact) == 5, "progact passed " +
                                                std::to_string(pass_count(progact)) + "/5");
        c.require(pass_count(statics) <= 2, "static passed " +
                                                std::to_string(pass_count(statics)) + "/5");
        c.require(pass_count(stepwise) == 5, "stepwise passed " +
                                                 std::to_string(pass_count(stepwise)) + "/5");

        const int progact_events = count_checkpoint_lines(base / "progact");
        const int stepwise_events = count_checkpoint_lines(base / "stepwise");
        c.require(progact_events == stats_event_sum(progact), "progact journal/stat mismatch");
        c.require(stepwise_events == stats_event_sum(stepwise), "stepwise journal/stat mismatch");
        c.require(progact_events > 0, "no validation events recorded");
        c.require(stepwise_events >= 2 * progact_events,
                  "stepwise " + std::to_string(stepwise_events) + " < 2x progact " +
                      std::to_string(progact_events));
        c.note("events stepwise=" + std::to_string(stepwise_events) +
               " progact=" + std::to_string(progact_events));
        fs::remove_all(base);
    });

    criterion(3, "every metric reports exact self-similarity", [](Check& c) {
        std::mt19937 rng(12345);
        metrics::MetricConfig cfg;
        for (int i = 0; i < 50 && c.ok; ++i) {
            const ToolGraph g = oracles::random_dag(rng, 12);
            const metrics::LogicalScores s = metrics::compute_logical_scores(g, g, cfg);
            c.require(s.r_v == 1.0, "r_v != 1");
            c.require(s.r_e == 1.0, "r_e != 1");
            c.require(std::abs(s.js_sim - 1.0) <= 1e-9, "js_sim deviates");
            c.require(s.nged_sim == 1.0, "nged_sim != 1");
            c.require(s.embed_sim == 1.0, "embed_sim != 1");
            c.require(s.structural.connectivity == 1.0 && s.structural.role_nodes == 1.0 &&
                          s.structural.critical_path == 1.0 && s.structural.exec_order == 1.0,
                      "structural component != 1");
        }
        c.note("50 seeded graphs");
    });

    criterion(4, "exact edit distance equals brute-force enumeration", [](Check& c) {
        std::mt19937 rng(777);
        metrics::MetricConfig cfg;
        for (int i = 0; i < 20 && c.ok; ++i) {
            const ToolGraph ga = oracles::random_dag(rng, 6);
            const ToolGraph gb = oracles::random_dag(rng, 6);
            const auto va = metrics::make_metric_view(ga, cfg);
            const auto vb = metrics::make_metric_view(gb, cfg);
            const metrics::GedResult impl = metrics::ged(va, vb, cfg);
            c.require(!impl.approximate, "pair used the approximate branch");
            c.require(impl.cost == oracles::ged(va, vb), "cost mismatch on pair " +
                                                             std::to_string(i));
        }
        c.note("20 seeded pairs, zero tolerance");
    });

    criterion(5, "closed-form spot values", [](Check& c) {
        c.require(std::abs(metrics::nged_score(0.5, 2.0) - 0.268941) <= 1e-6,
                  "nged_score(0.5, 2) off");
        c.require(metrics::sigmoid_score(0.0, 1.0) == 0.5, "sigmoid midpoint not exact");
        const ToolGraph a = chain_graph({"solve", "compute_error"});
        const ToolGraph b = chain_graph({"define_geometry", "export_solution"});
        metrics::MetricConfig cfg;
        c.require(std::abs(metrics::js_similarity(a, b, cfg)) <= 1e-9,
                  "disjoint-support js not 0");
    });

    criterion(6, "pagerank is a proper distribution matching power iteration", [](Check& c) {
        metrics::MetricConfig cfg;
        std::mt19937 rng(99);
        auto l1 = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += std::abs(x);
            return s;
        };
        for (int i = 0; i < 25 && c.ok; ++i) {
            const ToolGraph g = oracles::random_dag(rng, 10);
            const auto view = metrics::make_metric_view(g, cfg);
            if (view.node_count() == 0) continue;
            c.require(std::abs(l1(metrics::pagerank(view, cfg)) - 1.0) <= 1e-9,
                      "random graph rank does not sum to 1");
        }

        metrics::MetricView cycle;
        cycle.labels = {"a#1", "b#1"};
        cycle.roles = {"a", "b"};
        cycle.edges = {{0, 1}, {1, 0}};
        const std::vector<double> two = metrics::pagerank(cycle, cfg);
        c.require(std::abs(two[0] - 0.5) <= 1e-9 && std::abs(two[1] - 0.5) <= 1e-9,
                  "2-cycle is not (0.5, 0.5)");
        c.require(std::abs(l1(two) - 1.0) <= 1e-9, "2-cycle rank does not sum to 1");

        const ToolGraph chain = chain_graph(
            {"define_geometry", "define_pde", "assemble_problem", "solve", "compute_error"});
        const auto view = metrics::make_metric_view(chain, cfg);
        const std::vector<double> impl = metrics::pagerank(view, cfg);
        const std::vector<double> expect =
            oracles::pagerank(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, cfg.damping);
        c.require(std::abs(l1(impl) - 1.0) <= 1e-9, "chain rank does not sum to 1");
        for (std::size_t i = 0; i < expect.size(); ++i)
            c.require(std::abs(impl[i] - expect[i]) <= 1e-9,
                      "chain rank " + std::to_string(i) + " deviates from the oracle");
    });

    criterion(7, "solver convergence order and time reversibility", [](Check& c) {
        const pde::Problem problem = oracles::heat_mode_problem(0.1);
        const double decay = std::exp(-std::numbers::pi * std::numbers::pi * 0.1);
        auto reference = [&](double x) { return decay * std::sin(std::numbers::pi * x); };

        auto timed_solve = [&](int nx) {
            const auto t0 = std::chrono::steady_clock::now();
            pde::Solution sol =
                pde::solve_kernel(problem, pde::SolverSettings{nx, std::nullopt, 400, "implicit"});
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return std::make_pair(oracles::rms_error(sol, reference), seconds);
        };
        const auto [e51, t51] = timed_solve(51);
        const auto [e101, t101] = timed_solve(101);
        c.require(t51 < 2.0 && t101 < 2.0, "a solve exceeded 2s");
        const double ratio = e51 / e101;
        c.require(ratio >= 3.2 && ratio <= 4.8,
                  "error ratio " + std::to_string(ratio) + " outside [3.2, 4.8]");

        const int n = 101;
        std::vector<double> prev(n), cur(n);
        for (int i = 0; i < n; ++i)
            prev[static_cast<std::size_t>(i)] = std::sin(std::numbers::pi * i / (n - 1));
        cur = pde::leapfrog_step(prev, prev, 0.81, 0.0, 0.0);
        const std::vector<double> p0 = prev, c0 = cur;
        for (int s = 0; s < 200; ++s) {
            auto next = pde::leapfrog_step(prev, cur, 0.81, 0.0, 0.0);
            prev = std::move(cur);
            cur = std::move(next);
        }
        std::swap(prev, cur);
        for (int s = 0; s < 200; ++s) {
            auto next = pde::leapfrog_step(prev, cur, 0.81, 0.0, 0.0);
            prev = std::move(cur);
            cur = std::move(next);
        }
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(cur[static_cast<std::size_t>(i)] -
                                             p0[static_cast<std::size_t>(i)]));
            worst = std::max(worst, std::abs(prev[static_cast<std::size_t>(i)] -
                                             c0[static_cast<std::size_t>(i)]));
        }
        c.require(worst <= 1e-6, "reversal error " + std::to_string(worst));
        c.note("ratio " + std::to_string(ratio).substr(0, 5));
    });

    criterion(8, "text metrics: identity scores and swap symmetry", [](Check& c) {
        text::HashingEmbedder embedder;
        const std::string same = "solved heat on 101 points, 10 steps (crank_nicolson)";
        c.require(text::sts_score(embedder, same, same) == 1.0, "identical sts != 1");
        const text::BertScore identity = text::bert_score(embedder, same, same);
        c.require(identity.precision == 1.0 && identity.recall == 1.0 && identity.f1 == 1.0,
                  "identical bertscore != (1,1,1)");

        std::mt19937 rng(424242);
        for (int i = 0; i < 100 && c.ok; ++i) {
            const std::string a = oracles::random_text(rng);
            const std::string b = oracles::random_text(rng);
            const text::BertScore ab = text::bert_score(embedder, a, b);
            const text::BertScore ba = text::bert_score(embedder, b, a);
            c.require(ab.precision == ba.recall && ab.recall == ba.precision,
                      "precision/recall do not swap on pair " + std::to_string(i));
            c.require(text::sts_score(embedder, a, b) == text::sts_score(embedder, b, a),
                      "sts asymmetric on pair " + std::to_string(i));
        }
        c.note("100 random pairs");
    });

    criterion(9, "consecutive scripted bench runs are byte-identical", [](Check& c) {
        const fs::path out = fs::temp_directory_path() / "pdechain_accept_repro";
        fs::remove_all(out);
        const std::string packs = PDECHAIN_PACKS_DIR;
        const std::string command = "bench --pack " + packs + "/mainpack --out " + out.string();

        c.require(run_cli(command) == 0, "first bench run failed");
        std::map<std::string, std::string> snapshot;
        snapshot["report.json"] = slurp(out / "report.json");
        for (const auto& entry : fs::directory_iterator(out))
            if (entry.is_directory())
                snapshot[entry.path().filename().string()] = slurp(entry.path() / "graph.json");
        c.require(!snapshot["report.json"].empty(), "report.json missing after first run");
        c.require(snapshot.size() == 13, "expected 12 session graphs plus the report");

        c.require(run_cli(command) == 0, "second bench run failed");
        for (const auto& [name, bytes] : snapshot) {
            const fs::path path = name == "report.json" ? out / name : out / name / "graph.json";
            c.require(slurp(path) == bytes, name + " changed between runs");
        }
        c.note(std::to_string(snapshot.size()) + " files compared");
        fs::remove_all(out);
    });

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria satisfied\n";
    return 0;
}
