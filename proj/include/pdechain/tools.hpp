#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdechain/artifacts.hpp"
#include "pdechain/record.hpp"

namespace pdechain::pde {

enum class ParamType {
    real,
    integer,
    text,
    expr,          // must parse in the expression language
    enum_choice,   // one of `options`
    handle,        // live pool handle of `handle_kind`
    handles,       // comma-separated list of live handles of `handle_kind`
};

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::text;
    bool required = true;
    std::vector<std::string> options;          // enum_choice
    std::optional<ArtifactKind> handle_kind;   // handle / handles
    std::string doc;
};

struct ToolContext {
    ResourcePool& pool;
    const Json& params;
    NodeId producer;
    int seq = 0;
    std::vector<std::string>* diagnostics = nullptr;
};

struct ToolResult {
    ArtifactPayload payload;
    std::string summary;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> params;
    ArtifactKind returns;
    std::function<ToolResult(ToolContext&)> body;
};

class ToolRegistry {
public:
    void add(ToolSpec spec);
    bool has(const std::string& name) const;
    const ToolSpec& tool(const std::string& name) const;
    std::vector<std::string> names() const;
    std::size_t size() const { return tools_.size(); }

    // Machine-readable schema document; embedded verbatim in prompts.
    Json schema_doc() const;

private:
    std::vector<ToolSpec> tools_;
};

// The bundled PDE tool set.
ToolRegistry make_default_registry();

// Schema validation only (types, enums, handle formats); liveness is checked
// at invocation. Throws schema_violation naming the offending field.
void validate_params(const ToolSpec& spec, const Json& params);

// Full invocation path: schema validation, handle liveness + kind checks,
// tool body, pool insertion. Returns the outcome recorded in the action log.
Outcome invoke(const ToolRegistry& registry, const std::string& tool_name, const Json& params,
               ResourcePool& pool, const NodeId& producer, int seq);

}  // namespace pdechain::pde
