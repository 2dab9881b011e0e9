#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdechain/bench.hpp"
#include "pdechain/errors.hpp"
#include "pdechain/graph_metrics.hpp"
#include "pdechain/jsonio.hpp"
#include "pdechain/providers.hpp"
#include "pdechain/session.hpp"
#include "pdechain/tools.hpp"

namespace {

using pdechain::Error;
using pdechain::ErrorCode;
using pdechain::Json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Usage/configuration/file problems exit 2; runtime failures exit 1.
int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_input:
        case ErrorCode::parse_error:
        case ErrorCode::io_error:
        case ErrorCode::schema_violation:
        case ErrorCode::invalid_pattern:
        case ErrorCode::unknown_tool:
            return kExitUsage;
        default:
            return kExitFailure;
    }
}

Json parse_inline_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::invalid_input, "invalid " + what + ": " + e.what());
    }
}

void apply_metric_overrides(pdechain::metrics::MetricConfig& cfg, const Json& overrides) {
    if (!overrides.is_object()) {
        throw Error(ErrorCode::invalid_input, "metric overrides must be an object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (key == "alpha") {
            cfg.alpha = value.get<double>();
        } else if (key == "slope_k") {
            cfg.slope_k = value.get<double>();
        } else if (key == "damping") {
            cfg.damping = value.get<double>();
        } else if (key == "pr_tol") {
            cfg.pr_tol = value.get<double>();
        } else if (key == "ged_exact_limit") {
            cfg.ged_exact_limit = value.get<std::size_t>();
        } else if (key == "ged_beam_width") {
            cfg.ged_beam_width = value.get<std::size_t>();
        } else if (key == "include_order_edges") {
            cfg.include_order_edges = value.get<bool>();
        } else if (key == "seed") {
            cfg.n2v.seed = value.get<std::uint64_t>();
        } else if (key == "dims") {
            cfg.n2v.dims = value.get<std::size_t>();
        } else {
            throw Error(ErrorCode::invalid_input, "unknown metric config key: " + key);
        }
    }
}

// Tees every provider round-trip into trace.jsonl under the session
// directory. Prompts never contain credentials, so nothing needs redacting
// beyond not logging the provider configuration itself.
class TracingProvider final : public pdechain::ChatProvider {
public:
    TracingProvider(pdechain::ChatProvider& inner, std::filesystem::path path)
        : inner_(inner), path_(std::move(path)) {}

    std::string name() const override { return inner_.name(); }

    pdechain::ProviderResult complete(pdechain::Role role, const pdechain::PromptBundle& prompt,
                                      const std::string& schema_id) override {
        Json line;
        line["role"] = pdechain::role_name(role);
        line["schema"] = schema_id;
        line["system"] = prompt.system;
        line["user"] = prompt.user;
        try {
            pdechain::ProviderResult res = inner_.complete(role, prompt, schema_id);
            line["malformed"] = res.malformed;
            line["response"] = res.malformed ? Json(res.raw) : res.record;
            append(line);
            return res;
        } catch (const Error& e) {
            line["error"] = e.what();
            append(line);
            throw;
        }
    }

private:
    void append(const Json& line) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << line.dump() << "\n";
    }

    pdechain::ChatProvider& inner_;
    std::filesystem::path path_;
};

struct ProviderChoice {
    std::string kind = "scripted";   // scripted | http
    std::string script;              // fixture path for scripted runs
    std::string endpoint;
    std::string model = "default";
};

std::unique_ptr<pdechain::ChatProvider> make_provider(const ProviderChoice& choice) {
    if (choice.kind == "scripted") {
        if (choice.script.empty()) {
            throw Error(ErrorCode::invalid_input,
                        "scripted provider needs a fixture (--script or a case with one)");
        }
        return std::make_unique<pdechain::ScriptedProvider>(
            pdechain::ScriptFixture::load(choice.script));
    }
    if (choice.kind == "http") {
        if (choice.endpoint.empty()) {
            throw Error(ErrorCode::invalid_input, "http provider needs --endpoint");
        }
        pdechain::HttpProviderConfig cfg;
        cfg.base_url = choice.endpoint;
        cfg.model = choice.model;
        if (const char* key = std::getenv("PDECHAIN_API_KEY")) cfg.api_key = key;
        return std::make_unique<pdechain::HttpProvider>(cfg);
    }
    throw Error(ErrorCode::invalid_input, "unknown provider kind: " + choice.kind);
}

struct RunArgs {
    std::string query;
    std::string query_file;
    std::string case_id;
    std::string pack = "packs/mainpack";
    ProviderChoice provider;
    std::string mode;
    std::string config_json;
    std::string out;
    bool trace = false;
    bool json = false;
    std::uint64_t seed = 42;
};

int cmd_run(const RunArgs& args) {
    pdechain::ProgActConfig cfg;
    if (!args.config_json.empty()) {
        cfg.apply_overrides(parse_inline_json(args.config_json, "--config value"));
    }
    if (!args.mode.empty()) cfg.mode = args.mode;

    std::string query_text = args.query;
    ProviderChoice choice = args.provider;
    std::string out_dir = args.out;

    if (!args.case_id.empty()) {
        const auto cases = pdechain::bench::load_cases(args.pack);
        const auto it = std::find_if(cases.begin(), cases.end(),
                                     [&](const auto& c) { return c.id == args.case_id; });
        if (it == cases.end()) {
            throw Error(ErrorCode::invalid_input,
                        "case " + args.case_id + " not found in pack " + args.pack);
        }
        if (query_text.empty()) query_text = it->nl_description;
        if (choice.script.empty()) choice.script = it->script;
        if (out_dir.empty()) out_dir = "out/" + args.case_id;
    }
    if (!args.query_file.empty() && query_text.empty()) {
        query_text = pdechain::read_text_file(args.query_file);
        while (!query_text.empty() && (query_text.back() == '\n' || query_text.back() == '\r')) {
            query_text.pop_back();
        }
    }
    if (query_text.empty()) {
        throw Error(ErrorCode::invalid_input, "no query: pass --query, --query-file or --case");
    }
    if (out_dir.empty()) out_dir = "out/session";

    auto provider = make_provider(choice);
    std::unique_ptr<TracingProvider> tracer;
    pdechain::ChatProvider* active = provider.get();
    if (args.trace) {
        tracer = std::make_unique<TracingProvider>(*provider,
                                                   std::filesystem::path(out_dir) / "trace.jsonl");
        active = tracer.get();
    }

    const pdechain::pde::ToolRegistry registry = pdechain::pde::make_default_registry();
    pdechain::SessionResult result = pdechain::run_session(
        pdechain::Query{query_text, {}}, registry, *active, cfg, out_dir);
    result.persist(out_dir);

    std::cerr << (result.completed ? "session completed" : "session failed") << ": "
              << result.stats.actions_total << " actions, "
              << result.stats.validation_events << " validation events, results in " << out_dir
              << "\n";
    if (!result.completed) std::cerr << "reason: " << result.failure_reason << "\n";

    if (args.json) {
        Json summary;
        summary["completed"] = result.completed;
        if (!result.failure_reason.empty()) summary["failure_reason"] = result.failure_reason;
        summary["answer"] = result.answer;
        summary["stats"] = result.stats.to_json();
        summary["out"] = out_dir;
        summary["seed"] = args.seed;
        std::cout << summary.dump(2) << "\n";
    }
    return result.completed ? kExitOk : kExitFailure;
}

struct EvalArgs {
    std::string exec_path;
    std::string pattern_path;
    std::string metric_json;
    bool json = false;
    std::uint64_t seed = 42;
};

int cmd_eval(const EvalArgs& args) {
    pdechain::metrics::MetricConfig cfg;
    cfg.n2v.seed = args.seed;
    if (!args.metric_json.empty()) {
        apply_metric_overrides(cfg, parse_inline_json(args.metric_json, "--metric-config value"));
    }
    pdechain::ToolGraph exec = pdechain::ToolGraph::from_json(
        pdechain::read_json_file(args.exec_path));
    exec.finalize();
    pdechain::ToolGraph pattern = pdechain::ToolGraph::from_json(
        pdechain::read_json_file(args.pattern_path));
    pattern.finalize();

    const pdechain::metrics::LogicalScores scores =
        pdechain::metrics::compute_logical_scores(exec, pattern, cfg);
    const Json record = scores.to_json();
    std::cerr << "r_v=" << pdechain::format_double(scores.r_v)
              << " r_e=" << pdechain::format_double(scores.r_e)
              << " js_sim=" << pdechain::format_double(scores.js_sim)
              << " nged_sim=" << pdechain::format_double(scores.nged_sim)
              << " embed_sim=" << pdechain::format_double(scores.embed_sim) << "\n";
    if (args.json) std::cout << record.dump(2) << "\n";
    return kExitOk;
}

struct BenchArgs {
    std::string pack;
    ProviderChoice provider;
    std::string mode;
    std::string config_json;
    std::string metric_json;
    std::string out = "out/bench";
    int jobs = 1;
    bool json = false;
    std::uint64_t seed = 42;
};

int cmd_bench(const BenchArgs& args) {
    if (!std::filesystem::exists(args.pack)) {
        throw Error(ErrorCode::io_error, "pack directory not found: " + args.pack);
    }
    pdechain::bench::BenchOptions options;
    if (!args.config_json.empty()) {
        options.session_cfg.apply_overrides(parse_inline_json(args.config_json, "--config value"));
    }
    if (!args.mode.empty()) options.session_cfg.mode = args.mode;
    options.metric_cfg.n2v.seed = args.seed;
    if (!args.metric_json.empty()) {
        apply_metric_overrides(options.metric_cfg,
                               parse_inline_json(args.metric_json, "--metric-config value"));
    }
    options.jobs = args.jobs;
    options.out_dir = args.out;

    const auto cases = pdechain::bench::load_cases(args.pack);
    const pdechain::pde::ToolRegistry registry = pdechain::pde::make_default_registry();
    const ProviderChoice base = args.provider;
    pdechain::bench::ProviderFactory factory =
        [&base](const pdechain::bench::BenchCase& c) -> std::unique_ptr<pdechain::ChatProvider> {
        ProviderChoice choice = base;
        if (choice.kind == "scripted" && choice.script.empty()) choice.script = c.script;
        return make_provider(choice);
    };

    const pdechain::bench::BenchReport report =
        pdechain::bench::run_bench(cases, registry, factory, options);
    const Json doc = report.to_json();
    pdechain::write_json_file(std::filesystem::path(args.out) / "report.json", doc);
    pdechain::write_text_file(std::filesystem::path(args.out) / "report.md",
                              report.render_markdown());

    const int total = doc["totals"]["cases"].get<int>();
    const int pass = doc["totals"]["pass"].get<int>();
    std::cerr << "bench: " << pass << "/" << total << " passed, report in " << args.out << "\n";
    if (args.json) std::cout << doc.dump(2) << "\n";
    return pass == total ? kExitOk : kExitFailure;
}

struct ReportArgs {
    std::vector<std::string> dirs;
    std::string out;
    bool json = false;
};

int cmd_report(const ReportArgs& args) {
    std::vector<Json> reports;
    for (const std::string& dir : args.dirs) {
        reports.push_back(pdechain::read_json_file(std::filesystem::path(dir) / "report.json"));
    }

    // Side-by-side pass/total per category across all runs.
    std::vector<std::string> categories;
    for (const Json& rep : reports) {
        for (const Json& row : rep["categories"]) {
            const std::string cat = row["category"].get<std::string>();
            if (std::find(categories.begin(), categories.end(), cat) == categories.end()) {
                categories.push_back(cat);
            }
        }
    }

    auto cell = [](const Json& rep, const std::string& cat) -> std::string {
        for (const Json& row : rep["categories"]) {
            if (row["category"].get<std::string>() == cat) {
                return std::to_string(row["pass"].get<int>()) + "/" +
                       std::to_string(row["total"].get<int>());
            }
        }
        return "-";
    };

    std::string md = "# run comparison\n\n| category |";
    for (const std::string& dir : args.dirs) md += " " + dir + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < reports.size(); ++i) md += "---|";
    md += "\n";
    for (const std::string& cat : categories) {
        md += "| " + cat + " |";
        for (const Json& rep : reports) md += " " + cell(rep, cat) + " |";
        md += "\n";
    }
    md += "| **total** |";
    for (const Json& rep : reports) {
        md += " " + std::to_string(rep["totals"]["pass"].get<int>()) + "/" +
              std::to_string(rep["totals"]["cases"].get<int>()) + " |";
    }
    md += "\n";

    std::cerr << md;
    if (!args.out.empty()) pdechain::write_text_file(args.out, md);
    if (args.json) {
        Json combined;
        combined["runs"] = Json::array();
        for (std::size_t i = 0; i < reports.size(); ++i) {
            Json run;
            run["dir"] = args.dirs[i];
            run["report"] = reports[i];
            combined["runs"].push_back(std::move(run));
        }
        std::cout << combined.dump(2) << "\n";
    }
    return kExitOk;
}

void add_provider_options(CLI::App* cmd, ProviderChoice& choice) {
    cmd->add_option("--provider", choice.kind, "provider kind: scripted | http")
        ->check(CLI::IsMember({"scripted", "http"}));
    cmd->add_option("--script", choice.script, "scripted-provider fixture file");
    cmd->add_option("--endpoint", choice.endpoint, "chat-completions base URL");
    cmd->add_option("--model", choice.model, "model name for http provider");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tool-collaborative PDE solving sessions, metrics and benchmarks"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run one session from a query or bundled case");
    run->add_option("--query", run_args.query, "problem statement text");
    run->add_option("--query-file", run_args.query_file, "file with the problem statement");
    run->add_option("--case", run_args.case_id, "case id from a pack");
    run->add_option("--pack", run_args.pack, "pack directory for --case");
    add_provider_options(run, run_args.provider);
    run->add_option("--mode", run_args.mode, "progact | stepwise | static");
    run->add_option("--config", run_args.config_json, "session config overrides (JSON object)");
    run->add_option("--out", run_args.out, "session output directory");
    run->add_flag("--trace", run_args.trace, "log provider round-trips under the session dir");
    run->add_flag("--json", run_args.json, "print a machine summary to stdout");
    run->add_option("--seed", run_args.seed, "seed echoed into outputs");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score an execution graph against a pattern");
    eval->add_option("--exec", eval_args.exec_path, "execution graph json")->required();
    eval->add_option("--pattern", eval_args.pattern_path, "pattern graph json")->required();
    eval->add_option("--metric-config", eval_args.metric_json, "metric overrides (JSON object)");
    eval->add_flag("--json", eval_args.json, "print the score record to stdout");
    eval->add_option("--seed", eval_args.seed, "embedding seed");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "run a case pack and write reports");
    bench->add_option("--pack", bench_args.pack, "pack directory")->required();
    add_provider_options(bench, bench_args.provider);
    bench->add_option("--mode", bench_args.mode, "progact | stepwise | static");
    bench->add_option("--config", bench_args.config_json, "session config overrides (JSON object)");
    bench->add_option("--metric-config", bench_args.metric_json, "metric overrides (JSON object)");
    bench->add_option("--out", bench_args.out, "report output directory");
    bench->add_option("--jobs", bench_args.jobs, "parallel case workers")->check(CLI::PositiveNumber);
    bench->add_flag("--json", bench_args.json, "print report.json to stdout");
    bench->add_option("--seed", bench_args.seed, "embedding seed");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "render side-by-side tables from bench runs");
    report->add_option("dirs", report_args.dirs, "bench output directories")->required();
    report->add_option("--out", report_args.out, "write the rendered table to a file");
    report->add_flag("--json", report_args.json, "print combined reports to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);   // --help
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (report->parsed()) return cmd_report(report_args);
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error (" << pdechain::error_code_name(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
