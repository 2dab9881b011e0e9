#include "pdechain/providers.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "pdechain/errors.hpp"

namespace pdechain {

const char* role_name(Role role) {
    switch (role) {
        case Role::planner: return "planner";
        case Role::parser: return "parser";
        case Role::orchestrator: return "orchestrator";
    }
    return "?";
}

namespace {

Role role_from(const std::string& name) {
    if (name == "planner") return Role::planner;
    if (name == "parser") return Role::parser;
    if (name == "orchestrator") return Role::orchestrator;
    throw Error(ErrorCode::invalid_input, "unknown provider role '" + name + "'");
}

ProviderResult wrap_record(Json record, const std::string& schema_id) {
    ProviderResult out;
    if (!record.is_object()) {
        out.malformed = true;
        out.raw = record.is_string() ? record.get<std::string>() : record.dump();
        out.error = "response is not a JSON object";
        return out;
    }
    std::string err = check_schema(schema_id, record);
    if (!err.empty()) {
        out.malformed = true;
        out.raw = record.dump();
        out.error = err;
        return out;
    }
    out.record = std::move(record);
    return out;
}

}  // namespace

ScriptFixture ScriptFixture::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path));
}

ScriptFixture ScriptFixture::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array())
        throw Error(ErrorCode::invalid_input, "script fixture needs a 'steps' array");
    ScriptFixture out;
    out.name_ = doc.value("name", "unnamed");
    for (const auto& step : doc["steps"]) {
        if (!step.is_object() || !step.contains("role") || !step.contains("step") ||
            !step.contains("response"))
            throw Error(ErrorCode::invalid_input,
                        "script fixture steps need role, step, and response fields");
        Role role = role_from(step["role"].get<std::string>());
        int index = step["step"].get<int>();
        auto key = std::make_pair(static_cast<int>(role), index);
        if (out.steps_.count(key))
            throw Error(ErrorCode::invalid_input,
                        "script fixture repeats step (" + step["role"].get<std::string>() + ", " +
                            std::to_string(index) + ")");
        out.steps_[key] = step["response"];
    }
    return out;
}

const Json& ScriptFixture::response(Role role, int step) const {
    auto it = steps_.find({static_cast<int>(role), step});
    if (it == steps_.end())
        throw Error(ErrorCode::script_exhausted,
                    "script '" + name_ + "' exhausted at role=" + role_name(role) +
                        " step=" + std::to_string(step));
    return it->second;
}

ScriptedProvider::ScriptedProvider(ScriptFixture fixture) : fixture_(std::move(fixture)) {}

ProviderResult ScriptedProvider::complete(Role role, const PromptBundle& prompt,
                                          const std::string& schema_id) {
    (void)prompt;   // replay is keyed by call order, not content
    int step = next_step_[static_cast<int>(role)]++;
    return wrap_record(fixture_.response(role, step), schema_id);
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
        throw Error(ErrorCode::invalid_input, "http provider needs a base URL");
}

ProviderResult HttpProvider::complete(Role role, const PromptBundle& prompt,
                                      const std::string& schema_id) {
    Json body;
    body["model"] = config_.model;
    body["temperature"] = 0;
    Json messages = Json::array();
    messages.push_back({{"role", "system"}, {"content", prompt.system}});
    messages.push_back({{"role", "user"}, {"content", prompt.user}});
    body["messages"] = std::move(messages);
    (void)role;

    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string payload = body.dump();
    int backoff = config_.backoff_ms;
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_sec);
        client.set_read_timeout(config_.timeout_sec);
        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;   // transport problems are the only retryable class
        }
        if (res->status == 401 || res->status == 403)
            throw Error(ErrorCode::auth_failure,
                        "authentication failed (status " + std::to_string(res->status) + ")");
        if (res->status >= 500) {
            last_error = "server error (status " + std::to_string(res->status) + ")";
            continue;
        }
        if (res->status != 200)
            throw Error(ErrorCode::provider_failure,
                        "unexpected status " + std::to_string(res->status) + ": " + res->body);

        Json envelope = Json::parse(res->body, nullptr, false);
        if (envelope.is_discarded() || !envelope.contains("choices") ||
            !envelope["choices"].is_array() || envelope["choices"].empty())
            throw Error(ErrorCode::provider_failure,
                        "response is not a chat-completions envelope");
        const Json& message = envelope["choices"][0].value("message", Json::object());
        std::string content = message.value("content", "");

        Json record = Json::parse(content, nullptr, false);
        if (record.is_discarded()) {
            ProviderResult out;
            out.malformed = true;
            out.raw = content;
            out.error = "content is not valid JSON";
            return out;
        }
        return wrap_record(std::move(record), schema_id);
    }
    throw Error(ErrorCode::provider_failure,
                "request failed after " + std::to_string(config_.max_attempts) +
                    " attempts: " + last_error);
}

PromptBundle plan_prompt(const std::string& query, const Json& registry_schema) {
    PromptBundle p;
    p.system =
        "You are the planner of a PDE-solving toolchain. Decompose the problem into an "
        "ordered list of tool subtasks. Respond with JSON "
        "{\"subtasks\":[{\"k\":1,\"tool\":\"...\",\"goal\":\"...\"}]} and nothing else. "
        "Task ids must be strictly increasing; every tool must come from the registry; "
        "use the pseudo-tool \"finalize\" as the last subtask to compose the answer.";
    p.user = "Problem:\n" + query + "\n\nTool registry:\n" + registry_schema.dump(2) + "\n";
    return p;
}

PromptBundle params_prompt(const std::string& query, const Json& subtask,
                           const Json& registry_schema, const std::string& action_log,
                           const std::string& pool_listing) {
    PromptBundle p;
    p.system =
        "You extract tool parameters for one subtask of a PDE-solving plan. Respond with "
        "JSON {\"params\":{...}} and nothing else. Handle-typed parameters must reference "
        "live pool handles from the listing.";
    p.user = "Problem:\n" + query + "\n\nSubtask:\n" + subtask.dump(2) + "\n\nTool registry:\n" +
             registry_schema.dump(2) + "\n\nActions so far:\n" + action_log + "\nResource pool:\n" +
             pool_listing;
    return p;
}

PromptBundle checkpoint_prompt(const std::string& query, const std::string& window,
                               const std::string& graph_summary) {
    PromptBundle p;
    p.system =
        "You validate a window of executed tool actions. Respond with JSON "
        "{\"action\":\"pass\"} if everything is sound, or a correction directive "
        "{\"action\":\"retry\"|\"reparse\"|\"evict_redo\",\"k\":<subtask>,\"node\":\"<node>\","
        "\"hint\":\"...\"} and nothing else.";
    p.user = "Problem:\n" + query + "\n\nRecent actions:\n" + window + "\nExecution graph:\n" +
             graph_summary;
    return p;
}

PromptBundle replan_prompt(const std::string& query, const Json& old_plan,
                           const std::string& feedback, const Json& registry_schema) {
    PromptBundle p;
    p.system =
        "You revise a failing PDE-solving plan. Keep completed subtask ids when their "
        "artifacts are still useful. Respond with JSON "
        "{\"subtasks\":[{\"k\":1,\"tool\":\"...\",\"goal\":\"...\"}]} and nothing else.";
    p.user = "Problem:\n" + query + "\n\nCurrent plan:\n" + old_plan.dump(2) + "\n\nFailures:\n" +
             feedback + "\nTool registry:\n" + registry_schema.dump(2) + "\n";
    return p;
}

PromptBundle answer_prompt(const std::string& query, const std::string& outcomes) {
    PromptBundle p;
    p.system =
        "You compose the final answer to a PDE problem from the executed tool outcomes. "
        "Respond with JSON {\"answer\":\"...\"} and nothing else.";
    p.user = "Problem:\n" + query + "\n\nOutcomes:\n" + outcomes;
    return p;
}

std::string check_schema(const std::string& schema_id, const Json& record) {
    if (!record.is_object()) return "record must be a JSON object";
    if (schema_id == "plan_v1") {
        if (!record.contains("subtasks") || !record["subtasks"].is_array())
            return "plan record needs a 'subtasks' array";
        if (record["subtasks"].empty()) return "plan has no subtasks";
        for (const auto& s : record["subtasks"]) {
            if (!s.is_object()) return "subtasks must be objects";
            if (!s.contains("k") || !s["k"].is_number_integer())
                return "subtask needs an integer 'k'";
            if (!s.contains("tool") || !s["tool"].is_string())
                return "subtask needs a string 'tool'";
            if (s.contains("goal") && !s["goal"].is_string())
                return "subtask 'goal' must be a string";
        }
        return "";
    }
    if (schema_id == "params_v1") {
        if (!record.contains("params") || !record["params"].is_object())
            return "params record needs a 'params' object";
        return "";
    }
    if (schema_id == "directive_v1") {
        if (!record.contains("action") || !record["action"].is_string())
            return "directive needs a string 'action'";
        const std::string action = record["action"].get<std::string>();
        if (action != "pass" && action != "retry" && action != "reparse" &&
            action != "evict_redo")
            return "directive action must be pass|retry|reparse|evict_redo";
        if (action != "pass" && (!record.contains("k") || !record["k"].is_number_integer()))
            return "correction directives need an integer 'k'";
        return "";
    }
    if (schema_id == "answer_v1") {
        if (!record.contains("answer") || !record["answer"].is_string())
            return "answer record needs a string 'answer'";
        return "";
    }
    return "unknown schema id '" + schema_id + "'";
}

}  // namespace pdechain
