#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "pdechain/jsonio.hpp"

namespace pdechain {

enum class Role { planner, parser, orchestrator };
const char* role_name(Role role);

struct PromptBundle {
    std::string system;
    std::string user;
};

struct ProviderResult {
    Json record;            // valid structured record when !malformed
    bool malformed = false;
    std::string raw;        // offending text when malformed
    std::string error;      // why it was rejected
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string name() const = 0;
    virtual ProviderResult complete(Role role, const PromptBundle& prompt,
                                    const std::string& schema_id) = 0;
};

// Canned responses keyed by (role, per-role step index). Exhaustion is a hard
// error: it means the run drifted from the recorded conversation.
class ScriptFixture {
public:
    static ScriptFixture load(const std::filesystem::path& path);
    static ScriptFixture from_json(const Json& doc);

    const Json& response(Role role, int step) const;
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::map<std::pair<int, int>, Json> steps_;   // (role, step) -> response
};

class ScriptedProvider final : public ChatProvider {
public:
    explicit ScriptedProvider(ScriptFixture fixture);
    std::string name() const override { return "scripted:" + fixture_.name(); }
    ProviderResult complete(Role role, const PromptBundle& prompt,
                            const std::string& schema_id) override;

private:
    ScriptFixture fixture_;
    std::map<int, int> next_step_;   // per-role call counter
};

struct HttpProviderConfig {
    std::string base_url;                       // e.g. http://127.0.0.1:8080
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    std::string api_key;                        // empty -> no Authorization header
    int max_attempts = 3;
    int backoff_ms = 200;                       // doubles per retry
    int timeout_sec = 30;
};

// Chat-completions client: deterministic request shape (temperature 0),
// exponential backoff on transport errors only. Non-JSON content comes back
// as a malformed result for the caller's repair loop, never as a retry.
class HttpProvider final : public ChatProvider {
public:
    explicit HttpProvider(HttpProviderConfig config);
    std::string name() const override { return "http:" + config_.model; }
    ProviderResult complete(Role role, const PromptBundle& prompt,
                            const std::string& schema_id) override;

private:
    HttpProviderConfig config_;
};

// Deterministic prompt construction: identical inputs yield byte-identical
// bundles, which is what makes scripted replay and caching sound.
PromptBundle plan_prompt(const std::string& query, const Json& registry_schema);
PromptBundle params_prompt(const std::string& query, const Json& subtask,
                           const Json& registry_schema, const std::string& action_log,
                           const std::string& pool_listing);
PromptBundle checkpoint_prompt(const std::string& query, const std::string& window,
                               const std::string& graph_summary);
PromptBundle replan_prompt(const std::string& query, const Json& old_plan,
                           const std::string& feedback, const Json& registry_schema);
PromptBundle answer_prompt(const std::string& query, const std::string& outcomes);

// Structural checks for provider records; returns an error description or
// empty string. Schema ids: plan_v1, params_v1, directive_v1, answer_v1.
std::string check_schema(const std::string& schema_id, const Json& record);

}  // namespace pdechain
