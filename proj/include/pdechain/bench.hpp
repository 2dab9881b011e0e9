#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdechain/graph.hpp"
#include "pdechain/graph_metrics.hpp"
#include "pdechain/jsonio.hpp"
#include "pdechain/session.hpp"
#include "pdechain/text_metrics.hpp"

namespace pdechain::bench {

// One annotated reference tool call; the texts feed the local text metrics.
struct ExpectedInvocation {
    std::string tool;
    std::string params_text;
    std::string output_text;
};

struct NumericCheck {
    std::string reference;     // analytic solution over x[, y][, t]
    std::string norm = "l2";   // l2 | linf
    double threshold = 0.0;
};

struct BenchCase {
    std::string id;
    std::string category;
    std::string nl_description;
    ToolGraph pattern_graph;
    std::vector<ExpectedInvocation> expected_invocations;
    std::optional<NumericCheck> numeric_check;
    std::string script;        // scripted-provider fixture, relative to the pack dir
};

bool known_category(const std::string& name);

// Reads `pack.json` (manifest with a case file list) and every case file.
// Schema problems are reported with the case id and field name; duplicate
// ids are rejected.
std::vector<BenchCase> load_cases(const std::filesystem::path& pack_dir);

struct CaseResult {
    std::string id;
    std::string category;
    bool pass = false;        // completed session and numeric check satisfied
    bool completed = false;
    std::optional<double> numeric_error;
    metrics::LogicalScores logical;
    std::vector<text::LocalScores> local;   // one per expected invocation
    std::string failure_reason;
    SessionStats stats;

    Json to_json() const;
};

struct BenchReport {
    std::vector<CaseResult> results;   // sorted by case id
    Json config_echo;

    Json to_json() const;
    std::string render_markdown() const;
};

struct BenchOptions {
    ProgActConfig session_cfg;
    metrics::MetricConfig metric_cfg;
    int jobs = 1;
    std::filesystem::path out_dir;     // session dirs land in out_dir/<case id> when set
};

using ProviderFactory = std::function<std::unique_ptr<ChatProvider>(const BenchCase&)>;

// Runs every case in an isolated session (optionally jobs-way parallel) and
// folds the results in case-id order. Per-case errors are recorded as
// failures; nothing a case does can abort the run.
BenchReport run_bench(const std::vector<BenchCase>& cases, const pde::ToolRegistry& registry,
                      const ProviderFactory& factory, const BenchOptions& options);

// Harness-side numeric verdict: compares the newest surviving solution
// artifact in the session pool against the analytic reference. Empty when
// the pool holds no live solution.
std::optional<double> numeric_error(const SessionResult& session, const NumericCheck& check);

}  // namespace pdechain::bench
