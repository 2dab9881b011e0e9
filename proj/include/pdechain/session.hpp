#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pdechain/artifacts.hpp"
#include "pdechain/graph.hpp"
#include "pdechain/jsonio.hpp"
#include "pdechain/providers.hpp"
#include "pdechain/record.hpp"
#include "pdechain/tools.hpp"

namespace pdechain {

struct Query {
    std::string text;
    std::vector<std::string> attachments;
};

struct Subtask {
    int k = 0;           // task id, >= 1, unique within a plan
    std::string tool;    // registered tool name or the literal "finalize"
    std::string goal;    // free-text reasoning, not interpreted

    Json to_json() const;
};

struct Plan {
    std::vector<Subtask> subtasks;   // ids strictly increasing
    int revision = 0;

    Json to_json() const;
};

// Orchestration budgets and the ablation switch. `progact` runs the dual-loop
// protocol, `stepwise` validates after every action, `static` never validates.
struct ProgActConfig {
    int checkpoint_every = 3;
    std::vector<std::string> critical_tools{"solve", "assemble_problem"};
    int inner_retry_budget = 2;    // corrective directives per checkpoint
    int collapse_after = 2;        // identical-error recurrences before escalation
    int outer_replan_budget = 2;   // plan revisions per session
    int max_subtasks = 20;
    std::string mode = "progact";  // progact | stepwise | static

    // Validates fields and applies mode side effects (stepwise forces
    // checkpoint_every=1). Throws invalid_input on bad values.
    void normalize();
    void apply_overrides(const Json& overrides);
    Json to_json() const;
};

// Correction directive returned by a checkpoint. action "pass" means the
// window is accepted; "invalid" marks an unusable provider response.
struct Directive {
    std::string action = "pass";   // pass | retry | reparse | evict_redo | invalid
    int k = 0;                     // subtask id for retry/reparse
    std::string node;              // graph node for evict_redo
    std::string hint;              // free-text guidance forwarded to re-parsing
};

struct SessionStats {
    int provider_calls = 0;       // every provider round-trip
    int corrective_calls = 0;     // checkpoint directive requests only
    int validation_events = 0;    // checkpoint invocations
    int inner_recoveries = 0;     // directives applied (valid ones)
    int replans = 0;
    int actions_total = 0;
    int actions_invalidated = 0;
    int actions_failed = 0;

    Json to_json() const;
};

struct SessionResult {
    bool completed = false;
    std::string failure_reason;        // empty when completed
    std::string answer;                // composed final answer (empty on failure)
    std::vector<ActionRecord> log;     // append-only history, final statuses
    Json journal = Json::array();      // actions.jsonl lines: actions + events
    ToolGraph exec_graph;              // rebuilt from surviving ok actions, finalized
    Json pool_snapshot;
    std::shared_ptr<pde::ResourcePool> pool;   // live pool for downstream checks
    Plan final_plan;
    SessionStats stats;
    Json config_echo;                  // budgets + provider name

    // Writes actions.jsonl, graph.json, pool.json, answer.md and config.json.
    void persist(const std::filesystem::path& dir) const;
};

// Asks the planner for a structured plan and validates it (known tools,
// strictly increasing ids, size cap). One retry with the validation errors
// echoed, then session_failure.
Plan plan(const Query& query, const pde::ToolRegistry& registry, ChatProvider& provider);

// Asks the parser for a parameter record for one subtask and validates it
// against the tool schema plus pool liveness for handle-typed fields. One
// self-repair retry with the error echoed, then the last error is thrown.
Json parse_params(const Subtask& subtask, const std::string& query,
                  const pde::ToolRegistry& registry, const pde::ResourcePool& pool,
                  const std::string& action_log, ChatProvider& provider,
                  const std::string& hint = {});

// Mechanical checks first: every failure in the window superseded by a later
// ok record of the same subtask, and no surviving record referencing an
// evicted handle. A clean window returns "pass" without any provider call;
// otherwise the provider sees the window plus a graph summary and returns a
// correction directive.
Directive checkpoint_validate(const std::string& query, const std::vector<ActionRecord>& window,
                              const ToolGraph& graph, const pde::ResourcePool& pool,
                              ChatProvider& provider, bool* provider_called = nullptr);

// Asks the planner for a revised plan carrying the failure feedback. Same
// validation and retry policy as plan(); the revision index increments.
Plan replan(const Query& query, const Plan& current, const std::string& feedback,
            const pde::ToolRegistry& registry, ChatProvider& provider);

// Runs the full loop: plan -> (parse -> invoke)* with checkpoints per cfg,
// inner-loop recovery (taint eviction + re-execution) and escalation to
// replanning. Hard failures are captured in the result, never thrown; the
// partial log is always available for persistence.
SessionResult run_session(const Query& query, const pde::ToolRegistry& registry,
                          ChatProvider& provider, const ProgActConfig& cfg,
                          const std::filesystem::path& artifact_dir = {});

// One line per record: seq, subtask id, tool, status, handle and summary.
std::string render_action_log(const std::vector<ActionRecord>& log);

}  // namespace pdechain
