#pragma once

#include <string>
#include <vector>

#include "pdechain/jsonio.hpp"

namespace pdechain {

enum class ActionStatus { ok, failed, invalidated };

inline const char* action_status_name(ActionStatus status) {
    switch (status) {
        case ActionStatus::ok: return "ok";
        case ActionStatus::failed: return "failed";
        case ActionStatus::invalidated: return "invalidated";
    }
    return "?";
}

// Result text and artifact handle of one tool execution.
struct Outcome {
    std::string handle;                     // empty when the tool failed
    std::string summary;
    std::vector<std::string> diagnostics;   // error/warning strings
};

/// One executed step: subtask id, tool, extracted parameters, outcome.
struct ActionRecord {
    int k = 0;
    std::string tool;
    Json params = Json::object();
    Outcome outcome;
    ActionStatus status = ActionStatus::ok;
    int seq = 0;

    Json to_json() const;
};

}  // namespace pdechain
