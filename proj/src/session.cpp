#include "pdechain/session.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "pdechain/errors.hpp"

namespace pdechain {

namespace {

constexpr int kDefaultMaxSubtasks = 20;

// Validates a structurally sound plan record (plan_v1) against the registry.
// Returns an error description or empty; fills `out` on success.
std::string validate_plan_doc(const Json& record, const pde::ToolRegistry& registry,
                              int max_subtasks, Plan* out) {
    const Json& subtasks = record.at("subtasks");
    if (subtasks.empty()) return "plan has no subtasks";
    if (static_cast<int>(subtasks.size()) > max_subtasks) {
        return "plan has " + std::to_string(subtasks.size()) + " subtasks, limit is " +
               std::to_string(max_subtasks);
    }
    Plan plan;
    int prev = 0;
    for (const Json& item : subtasks) {
        Subtask st;
        st.k = item.at("k").get<int>();
        st.tool = item.at("tool").get<std::string>();
        if (item.contains("goal")) st.goal = item["goal"].get<std::string>();
        if (st.k <= prev) {
            return "subtask ids must be strictly increasing and >= 1 (saw " +
                   std::to_string(st.k) + " after " + std::to_string(prev) + ")";
        }
        prev = st.k;
        if (st.tool != "finalize" && !registry.has(st.tool)) {
            return "unknown tool: " + st.tool;
        }
        plan.subtasks.push_back(std::move(st));
    }
    *out = std::move(plan);
    return "";
}

// Shared request/validate/retry loop for plan() and replan().
Plan request_plan(const PromptBundle& prompt, const pde::ToolRegistry& registry,
                  ChatProvider& provider, int max_subtasks) {
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        PromptBundle p = prompt;
        if (attempt > 0) {
            p.user += "\n\n## previous attempt rejected\n" + last_error + "\n";
        }
        ProviderResult res = provider.complete(Role::planner, p, "plan_v1");
        if (res.malformed) {
            last_error = res.error;
            continue;
        }
        Plan out;
        last_error = validate_plan_doc(res.record, registry, max_subtasks, &out);
        if (last_error.empty()) return out;
    }
    throw Error(ErrorCode::session_failure, "plan rejected after retry: " + last_error);
}

// Dangling-handle check for handle-typed fields the schema check cannot see:
// a token is a problem only when this pool once produced it and it is gone.
std::string liveness_errors(const pde::ToolSpec& spec, const Json& params,
                            const pde::ResourcePool& pool) {
    for (const pde::ParamSpec& ps : spec.params) {
        if (ps.type != pde::ParamType::handle && ps.type != pde::ParamType::handles) continue;
        if (!params.contains(ps.name) || !params[ps.name].is_string()) continue;
        for (const std::string& token : split_handle_tokens(params[ps.name].get<std::string>())) {
            if (!pool.live(token)) {
                return "dangling handle: " + token + " is not live in the pool";
            }
        }
    }
    return "";
}

std::string render_action_line(const ActionRecord& r) {
    std::string line = "seq=" + std::to_string(r.seq) + " k=" + std::to_string(r.k) + " " +
                       r.tool + " status=" + action_status_name(r.status);
    if (!r.outcome.handle.empty()) line += " handle=" + r.outcome.handle;
    if (!r.outcome.summary.empty()) line += " summary=" + r.outcome.summary;
    for (const std::string& d : r.outcome.diagnostics) line += " | " + d;
    return line;
}

// A window is mechanically clean when every failure in it was superseded by
// a later ok record of the same subtask and no surviving ok record references
// a handle that was produced earlier but has since been evicted.
bool window_clean(const std::vector<ActionRecord>& window, const ToolGraph& graph,
                  const pde::ResourcePool& pool) {
    std::map<int, ActionStatus> latest;
    for (const ActionRecord& r : window) latest[r.k] = r.status;
    for (const ActionRecord& r : window) {
        if (r.status == ActionStatus::failed && latest[r.k] != ActionStatus::ok) {
            return false;
        }
        if (r.status != ActionStatus::ok || !r.params.is_object()) continue;
        for (const auto& [name, value] : r.params.items()) {
            (void)name;
            if (!value.is_string()) continue;
            for (const std::string& token : split_handle_tokens(value.get<std::string>())) {
                if (!graph.producer_of(token).empty() && !pool.live(token)) {
                    return false;
                }
            }
        }
    }
    return true;
}

// Counts provider round-trips without changing behaviour; the engine routes
// every call through one of these so stats stay accurate across helper ops.
class CountingProvider final : public ChatProvider {
public:
    CountingProvider(ChatProvider& inner, SessionStats& stats) : inner_(inner), stats_(stats) {}

    std::string name() const override { return inner_.name(); }

    ProviderResult complete(Role role, const PromptBundle& prompt,
                            const std::string& schema_id) override {
        ++stats_.provider_calls;
        return inner_.complete(role, prompt, schema_id);
    }

private:
    ChatProvider& inner_;
    SessionStats& stats_;
};

class SessionEngine {
public:
    SessionEngine(const Query& query, const pde::ToolRegistry& registry, ChatProvider& provider,
                  ProgActConfig cfg, const std::filesystem::path& artifact_dir)
        : query_(query),
          registry_(registry),
          raw_provider_(provider),
          cfg_(std::move(cfg)),
          provider_(provider, stats_),
          pool_(std::make_shared<pde::ResourcePool>("session")) {
        if (!artifact_dir.empty()) pool_->set_artifact_dir(artifact_dir);
    }

    SessionResult run() {
        SessionResult result;
        try {
            run_impl();
            result.completed = true;
        } catch (const Error& e) {
            result.completed = false;
            result.failure_reason = std::string(error_code_name(e.code())) + ": " + e.what();
            journal_event(Json{{"type", "failure"}, {"reason", result.failure_reason}});
        }
        finish(result);
        return result;
    }

private:
    struct JournalEntry {
        int action = -1;   // index into log_, or -1 for a free-standing event
        Json event;
    };

    // --- main loop ------------------------------------------------------

    void run_impl() {
        plan_ = plan(query_, registry_, provider_);
        journal_event(Json{{"type", "plan"},
                           {"revision", plan_.revision},
                           {"subtasks", plan_.to_json()["subtasks"]}});
        while (true) {
            bool restarted = false;
            for (std::size_t i = 0; i < plan_.subtasks.size(); ++i) {
                const Subtask st = plan_.subtasks[i];
                if (st.tool == "finalize") continue;      // answer is composed below
                if (completed_.count(st.k)) continue;     // carried over from before
                execute_subtask(st, "");
                ++since_checkpoint_;
                const std::string trigger = checkpoint_trigger(st);
                if (!trigger.empty() && run_checkpoint(trigger)) {
                    do_replan();
                    restarted = true;
                    break;
                }
            }
            if (restarted) continue;
            if (cfg_.mode != "static" && since_checkpoint_ > 0) {
                if (run_checkpoint("final")) {
                    do_replan();
                    continue;
                }
            }
            break;
        }
        ensure_all_completed();
        answer_ = compose_answer();
    }

    std::string checkpoint_trigger(const Subtask& st) const {
        if (cfg_.mode == "static") return "";
        const auto& crit = cfg_.critical_tools;
        if (std::find(crit.begin(), crit.end(), st.tool) != crit.end()) return "critical";
        if (since_checkpoint_ >= cfg_.checkpoint_every) return "cadence";
        return "";
    }

    void ensure_all_completed() const {
        std::string missing;
        for (const Subtask& st : plan_.subtasks) {
            if (st.tool == "finalize" || completed_.count(st.k)) continue;
            if (!missing.empty()) missing += ", ";
            missing += "subtask " + std::to_string(st.k) + " (" + st.tool + ")";
        }
        if (!missing.empty()) {
            throw Error(ErrorCode::session_failure, "unrecovered failures: " + missing);
        }
    }

    // --- subtask execution ----------------------------------------------

    void execute_subtask(const Subtask& st, const std::string& hint) {
        Json params;
        try {
            params = parse_params(st, query_.text, registry_, *pool_,
                                  render_action_log(log_), provider_, hint);
        } catch (const Error& e) {
            if (is_session_fatal(e.code())) throw;
            ActionRecord rec;
            rec.k = st.k;
            rec.tool = st.tool;
            rec.params = Json::object();
            rec.outcome.summary = "parameter extraction failed";
            rec.outcome.diagnostics = {std::string(error_code_name(e.code())) + ": " + e.what()};
            rec.status = ActionStatus::failed;
            rec.seq = seq_next_++;
            append_record(std::move(rec));
            return;
        }
        invoke_subtask(st, params);
    }

    void invoke_subtask(const Subtask& st, const Json& params) {
        ActionRecord rec;
        rec.k = st.k;
        rec.tool = st.tool;
        rec.params = params;
        rec.seq = seq_next_++;
        const NodeId node = "n" + std::to_string(rec.seq);
        try {
            rec.outcome = pde::invoke(registry_, st.tool, params, *pool_, node, rec.seq);
            rec.status = ActionStatus::ok;
        } catch (const Error& e) {
            rec.status = ActionStatus::failed;
            rec.outcome.summary = std::string("error: ") + e.what();
            rec.outcome.diagnostics = {std::string(error_code_name(e.code())) + ": " + e.what()};
        }
        append_record(std::move(rec));
    }

    static bool is_session_fatal(ErrorCode code) {
        return code == ErrorCode::script_exhausted || code == ErrorCode::provider_failure ||
               code == ErrorCode::auth_failure;
    }

    void append_record(ActionRecord rec) {
        const std::size_t index = log_.size();
        log_.push_back(std::move(rec));
        const ActionRecord& r = log_.back();
        node_of_.push_back(memory_.add_action_node(r));
        latest_[r.k] = index;
        journal_.push_back(JournalEntry{static_cast<int>(index), Json()});
        if (r.status == ActionStatus::ok) {
            completed_.insert(r.k);
        } else {
            bump_collapse(failure_signature(r));
        }
    }

    std::string failure_signature(const ActionRecord& r) const {
        std::string category = "unknown";
        if (!r.outcome.diagnostics.empty()) {
            const std::string& d = r.outcome.diagnostics.front();
            category = d.substr(0, d.find(':'));
        }
        return std::to_string(r.k) + "|" + r.tool + "|" + category;
    }

    void bump_collapse(const std::string& signature) {
        if (++collapse_[signature] >= cfg_.collapse_after) collapse_signal_ = true;
    }

    // --- checkpoints ------------------------------------------------------

    // Runs one validation event over everything since the previous one.
    // Returns true when the inner loop escalated (collapse or budget).
    bool run_checkpoint(const std::string& trigger) {
        ++stats_.validation_events;
        since_checkpoint_ = 0;
        const std::size_t start = window_start_;
        int directives_used = 0;
        int rejected = 0;
        bool any_provider = false;
        std::string result = "pass";
        while (true) {
            const std::vector<ActionRecord> window(log_.begin() + start, log_.end());
            if (window_clean(window, memory_, *pool_)) break;
            if (collapse_signal_) {
                result = "escalate";
                break;
            }
            if (directives_used >= cfg_.inner_retry_budget) {
                result = "escalate";
                break;
            }
            bool called = false;
            const Directive d =
                checkpoint_validate(query_.text, window, memory_, *pool_, provider_, &called);
            if (called) {
                any_provider = true;
                ++stats_.corrective_calls;
            }
            ++directives_used;
            if (d.action == "pass") break;   // provider waved the flags through
            if (!directive_ok(d)) {
                ++rejected;
                bump_collapse("directive|" + d.action);
                continue;
            }
            apply_directive(d);
            ++stats_.inner_recoveries;
        }
        Json event{{"type", "checkpoint"},
                   {"trigger", trigger},
                   {"window", window_seqs(start)},
                   {"provider_called", any_provider},
                   {"directives", directives_used},
                   {"result", result}};
        if (rejected > 0) event["rejected"] = rejected;
        journal_event(std::move(event));
        window_start_ = log_.size();
        return result == "escalate";
    }

    Json window_seqs(std::size_t start) const {
        Json seqs = Json::array();
        for (std::size_t i = start; i < log_.size(); ++i) seqs.push_back(log_[i].seq);
        return seqs;
    }

    bool directive_ok(const Directive& d) const {
        if (d.action == "retry") return latest_.count(d.k) > 0;
        if (d.action == "reparse") return find_subtask(d.k) != nullptr;
        if (d.action == "evict_redo") return !d.node.empty() && memory_.has_node(d.node);
        return false;
    }

    const Subtask* find_subtask(int k) const {
        for (const Subtask& st : plan_.subtasks) {
            if (st.k == k) return &st;
        }
        return nullptr;
    }

    void apply_directive(const Directive& d) {
        if (d.action == "retry") {
            const ActionRecord& prev = log_[latest_.at(d.k)];
            invoke_subtask(Subtask{d.k, prev.tool, ""}, prev.params);
        } else if (d.action == "reparse") {
            execute_subtask(*find_subtask(d.k), d.hint);
        } else {
            evict_and_redo(d);
        }
    }

    // Inner-loop recovery: evict the directed node's artifacts plus all data
    // descendants, flip the affected ok records to invalidated, then re-parse
    // and re-run those subtasks. Ascending seq is a topological order of the
    // tainted subgraph because data edges always point from earlier producers
    // to later consumers.
    void evict_and_redo(const Directive& d) {
        pool_->evict_descendants(memory_, d.node);
        std::set<NodeId> tainted = memory_.descendants(d.node, DepKind::data);
        tainted.insert(d.node);
        std::vector<int> redo;
        for (std::size_t i = 0; i < log_.size(); ++i) {
            if (!tainted.count(node_of_[i])) continue;
            ActionRecord& r = log_[i];
            if (r.status == ActionStatus::ok) {
                r.status = ActionStatus::invalidated;
                ++stats_.actions_invalidated;
                completed_.erase(r.k);
            }
            if (latest_.at(r.k) == i && std::find(redo.begin(), redo.end(), r.k) == redo.end()) {
                redo.push_back(r.k);
            }
        }
        for (int k : redo) {
            const Subtask* st = find_subtask(k);
            if (st) execute_subtask(*st, d.hint);
        }
    }

    // --- replanning -------------------------------------------------------

    void do_replan() {
        if (stats_.replans >= cfg_.outer_replan_budget) {
            throw Error(ErrorCode::session_failure,
                        "replan budget exhausted; " + failure_digest());
        }
        ++stats_.replans;
        const std::string feedback =
            failure_digest() + "\n\ngraph:\n" + render_graph_summary(memory_);
        plan_ = replan(query_, plan_, feedback, registry_, provider_);
        collapse_.clear();
        collapse_signal_ = false;
        since_checkpoint_ = 0;
        window_start_ = log_.size();
        journal_event(Json{{"type", "replan"},
                           {"revision", plan_.revision},
                           {"subtasks", plan_.to_json()["subtasks"]}});
    }

    // Unresolved failures, one line each: latest record per subtask id that
    // is still failed.
    std::string failure_digest() const {
        std::string text = "failures:";
        for (const auto& [k, index] : latest_) {
            const ActionRecord& r = log_[index];
            if (r.status != ActionStatus::failed) continue;
            text += "\n" + render_action_line(r);
        }
        return text;
    }

    // --- answer + result --------------------------------------------------

    std::string compose_answer() {
        std::string outcomes;
        for (const ActionRecord& r : log_) {
            if (r.status != ActionStatus::ok) continue;
            outcomes += "k=" + std::to_string(r.k) + " " + r.tool + ": " + r.outcome.summary + "\n";
        }
        const PromptBundle prompt = answer_prompt(query_.text, outcomes);
        std::string last_error;
        for (int attempt = 0; attempt < 2; ++attempt) {
            PromptBundle p = prompt;
            if (attempt > 0) p.user += "\n\n## previous attempt rejected\n" + last_error + "\n";
            ProviderResult res = provider_.complete(Role::orchestrator, p, "answer_v1");
            if (res.malformed) {
                last_error = res.error;
                continue;
            }
            return res.record.at("answer").get<std::string>();
        }
        throw Error(ErrorCode::provider_failure, "answer rejected after retry: " + last_error);
    }

    void journal_event(Json event) { journal_.push_back(JournalEntry{-1, std::move(event)}); }

    void finish(SessionResult& out) {
        out.answer = answer_;
        out.log = log_;
        out.final_plan = plan_;
        out.pool = pool_;
        out.pool_snapshot = pool_->snapshot();

        stats_.actions_total = static_cast<int>(log_.size());
        stats_.actions_failed = 0;
        for (const ActionRecord& r : log_) {
            if (r.status == ActionStatus::failed) ++stats_.actions_failed;
        }
        out.stats = stats_;

        // Journal lines carry final statuses, so invalidations that happened
        // after a record was written are visible in the persisted log.
        Json journal = Json::array();
        for (const JournalEntry& entry : journal_) {
            if (entry.action < 0) {
                journal.push_back(entry.event);
                continue;
            }
            Json line;
            line["type"] = "action";
            const Json rendered = log_[entry.action].to_json();
            for (const auto& [key, value] : rendered.items()) {
                line[key] = value;
            }
            journal.push_back(std::move(line));
        }
        out.journal = std::move(journal);

        ToolGraph exec;
        for (const ActionRecord& r : log_) {
            if (r.status == ActionStatus::ok) exec.add_action_node(r);
        }
        exec.finalize();
        out.exec_graph = std::move(exec);

        Json echo = cfg_.to_json();
        echo["provider"] = raw_provider_.name();
        out.config_echo = std::move(echo);
    }

    const Query& query_;
    const pde::ToolRegistry& registry_;
    ChatProvider& raw_provider_;
    ProgActConfig cfg_;
    SessionStats stats_;
    CountingProvider provider_;
    std::shared_ptr<pde::ResourcePool> pool_;
    ToolGraph memory_;                  // live graph, includes failed nodes
    std::vector<ActionRecord> log_;
    std::vector<NodeId> node_of_;       // graph node per log record
    std::map<int, std::size_t> latest_; // subtask id -> latest record index
    std::set<int> completed_;           // subtask ids with a current ok record
    std::map<std::string, int> collapse_;
    bool collapse_signal_ = false;
    Plan plan_;
    std::string answer_;
    int seq_next_ = 1;
    int since_checkpoint_ = 0;
    std::size_t window_start_ = 0;
    std::vector<JournalEntry> journal_;
};

}  // namespace

Json Subtask::to_json() const {
    Json j;
    j["k"] = k;
    j["tool"] = tool;
    if (!goal.empty()) j["goal"] = goal;
    return j;
}

Json Plan::to_json() const {
    Json j;
    j["revision"] = revision;
    Json list = Json::array();
    for (const Subtask& st : subtasks) list.push_back(st.to_json());
    j["subtasks"] = std::move(list);
    return j;
}

void ProgActConfig::normalize() {
    if (mode != "progact" && mode != "stepwise" && mode != "static") {
        throw Error(ErrorCode::invalid_input, "unknown mode: " + mode);
    }
    if (checkpoint_every < 1) {
        throw Error(ErrorCode::invalid_input, "checkpoint_every must be >= 1");
    }
    if (inner_retry_budget < 0 || collapse_after < 0 || outer_replan_budget < 0) {
        throw Error(ErrorCode::invalid_input, "budgets must be >= 0");
    }
    if (max_subtasks < 1) {
        throw Error(ErrorCode::invalid_input, "max_subtasks must be >= 1");
    }
    if (mode == "stepwise") checkpoint_every = 1;
}

void ProgActConfig::apply_overrides(const Json& overrides) {
    if (!overrides.is_object()) {
        throw Error(ErrorCode::invalid_input, "config overrides must be an object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (key == "checkpoint_every") {
            checkpoint_every = value.get<int>();
        } else if (key == "inner_retry_budget") {
            inner_retry_budget = value.get<int>();
        } else if (key == "collapse_after") {
            collapse_after = value.get<int>();
        } else if (key == "outer_replan_budget") {
            outer_replan_budget = value.get<int>();
        } else if (key == "max_subtasks") {
            max_subtasks = value.get<int>();
        } else if (key == "mode") {
            mode = value.get<std::string>();
        } else if (key == "critical_tools") {
            critical_tools = value.get<std::vector<std::string>>();
        } else {
            throw Error(ErrorCode::invalid_input, "unknown config key: " + key);
        }
    }
}

Json ProgActConfig::to_json() const {
    Json j;
    j["mode"] = mode;
    j["checkpoint_every"] = checkpoint_every;
    j["critical_tools"] = critical_tools;
    j["inner_retry_budget"] = inner_retry_budget;
    j["collapse_after"] = collapse_after;
    j["outer_replan_budget"] = outer_replan_budget;
    j["max_subtasks"] = max_subtasks;
    return j;
}

Json SessionStats::to_json() const {
    Json j;
    j["provider_calls"] = provider_calls;
    j["corrective_calls"] = corrective_calls;
    j["validation_events"] = validation_events;
    j["inner_recoveries"] = inner_recoveries;
    j["replans"] = replans;
    j["actions_total"] = actions_total;
    j["actions_invalidated"] = actions_invalidated;
    j["actions_failed"] = actions_failed;
    return j;
}

void SessionResult::persist(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::string lines;
    for (const Json& entry : journal) lines += entry.dump() + "\n";
    write_text_file(dir / "actions.jsonl", lines);
    write_json_file(dir / "graph.json", exec_graph.to_json());
    write_json_file(dir / "pool.json", pool_snapshot);
    std::string md;
    if (completed) {
        md = answer.empty() ? "(empty answer)\n" : answer + "\n";
    } else {
        md = "# session failed\n\n" + failure_reason + "\n";
    }
    write_text_file(dir / "answer.md", md);
    write_json_file(dir / "config.json", config_echo);
}

Plan plan(const Query& query, const pde::ToolRegistry& registry, ChatProvider& provider) {
    if (query.text.empty()) {
        throw Error(ErrorCode::invalid_input, "query text is empty");
    }
    if (registry.size() == 0) {
        throw Error(ErrorCode::invalid_input, "tool registry is empty");
    }
    return request_plan(plan_prompt(query.text, registry.schema_doc()), registry, provider,
                        kDefaultMaxSubtasks);
}

Json parse_params(const Subtask& subtask, const std::string& query,
                  const pde::ToolRegistry& registry, const pde::ResourcePool& pool,
                  const std::string& action_log, ChatProvider& provider,
                  const std::string& hint) {
    const pde::ToolSpec& spec = registry.tool(subtask.tool);
    PromptBundle base = params_prompt(query, subtask.to_json(), registry.schema_doc(),
                                      action_log, pool.listing());
    if (!hint.empty()) base.user += "\n\n## corrective hint\n" + hint + "\n";
    std::string last_error;
    ErrorCode last_code = ErrorCode::schema_violation;
    for (int attempt = 0; attempt < 2; ++attempt) {
        PromptBundle p = base;
        if (attempt > 0) p.user += "\n\n## previous attempt rejected\n" + last_error + "\n";
        ProviderResult res = provider.complete(Role::parser, p, "params_v1");
        if (res.malformed) {
            last_error = res.error;
            last_code = ErrorCode::schema_violation;
            continue;
        }
        Json params = res.record.at("params");
        try {
            pde::validate_params(spec, params);
        } catch (const Error& e) {
            last_error = e.what();
            last_code = e.code();
            continue;
        }
        const std::string live = liveness_errors(spec, params, pool);
        if (!live.empty()) {
            last_error = live;
            last_code = ErrorCode::dangling_handle;
            continue;
        }
        return params;
    }
    throw Error(last_code, subtask.tool + ": " + last_error);
}

Directive checkpoint_validate(const std::string& query, const std::vector<ActionRecord>& window,
                              const ToolGraph& graph, const pde::ResourcePool& pool,
                              ChatProvider& provider, bool* provider_called) {
    if (provider_called) *provider_called = false;
    if (window_clean(window, graph, pool)) {
        return Directive{};   // pass, zero provider calls
    }
    std::string window_text;
    for (const ActionRecord& r : window) window_text += render_action_line(r) + "\n";
    const PromptBundle prompt = checkpoint_prompt(query, window_text, render_graph_summary(graph));
    ProviderResult res = provider.complete(Role::orchestrator, prompt, "directive_v1");
    if (provider_called) *provider_called = true;
    if (res.malformed) {
        return Directive{"invalid", 0, "", res.error};
    }
    Directive d;
    d.action = res.record.at("action").get<std::string>();
    if (res.record.contains("k")) d.k = res.record["k"].get<int>();
    if (res.record.contains("node")) d.node = res.record["node"].get<std::string>();
    if (res.record.contains("hint")) d.hint = res.record["hint"].get<std::string>();
    return d;
}

Plan replan(const Query& query, const Plan& current, const std::string& feedback,
            const pde::ToolRegistry& registry, ChatProvider& provider) {
    Plan revised = request_plan(
        replan_prompt(query.text, current.to_json(), feedback, registry.schema_doc()),
        registry, provider, kDefaultMaxSubtasks);
    revised.revision = current.revision + 1;
    return revised;
}

SessionResult run_session(const Query& query, const pde::ToolRegistry& registry,
                          ChatProvider& provider, const ProgActConfig& cfg,
                          const std::filesystem::path& artifact_dir) {
    if (query.text.empty()) {
        throw Error(ErrorCode::invalid_input, "query text is empty");
    }
    ProgActConfig normalized = cfg;
    normalized.normalize();
    SessionEngine engine(query, registry, provider, std::move(normalized), artifact_dir);
    return engine.run();
}

std::string render_action_log(const std::vector<ActionRecord>& log) {
    if (log.empty()) return "(no actions yet)\n";
    std::string text;
    for (const ActionRecord& r : log) text += render_action_line(r) + "\n";
    return text;
}

}  // namespace pdechain
