#include "pdechain/record.hpp"

namespace pdechain {

Json ActionRecord::to_json() const {
    Json diag = Json::array();
    for (const std::string& d : outcome.diagnostics) {
        diag.push_back(d);
    }
    return Json{
        {"type", "action"},
        {"seq", seq},
        {"k", k},
        {"tool", tool},
        {"params", params},
        {"outcome", Json{{"handle", outcome.handle}, {"summary", outcome.summary}, {"diagnostics", diag}}},
        {"status", action_status_name(status)},
    };
}

}  // namespace pdechain
