#include <doctest.h>

#include <atomic>
#include <httplib.h>
#include <string>
#include <thread>

#include "pdechain/errors.hpp"
#include "pdechain/providers.hpp"

using namespace pdechain;

namespace {

// Loopback chat-completions stub; the handler decides status and body per call.
class StubServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit StubServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         ++hits_;
                         handler_(req, res);
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        REQUIRE(server_.is_running());
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int hits() const { return hits_.load(); }

private:
    httplib::Server server_;
    Handler handler_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
};

std::string envelope(const std::string& content) {
    Json body{{"choices", Json::array({Json{{"message", Json{{"content", content}}}}})}};
    return body.dump();
}

HttpProviderConfig quick_config(const std::string& base_url) {
    HttpProviderConfig cfg;
    cfg.base_url = base_url;
    cfg.backoff_ms = 10;
    return cfg;
}

const PromptBundle kPrompt{"system text", "user text"};

}  // namespace

TEST_CASE("http provider decodes a well-formed completion") {
    Json seen_body;
    std::string seen_auth = "unset";
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = Json::parse(req.body);
        seen_auth = req.has_header("Authorization") ? req.get_header_value("Authorization") : "";
        res.set_content(envelope(R"({"answer":"hi"})"), "application/json");
    });

    HttpProvider provider(quick_config(server.base_url()));
    ProviderResult r = provider.complete(Role::orchestrator, kPrompt, "answer_v1");
    CHECK_FALSE(r.malformed);
    CHECK(r.record == Json{{"answer", "hi"}});
    CHECK(server.hits() == 1);

    CHECK(seen_body["model"] == "default");
    CHECK(seen_body["temperature"] == 0);
    REQUIRE(seen_body["messages"].size() == 2);
    CHECK(seen_body["messages"][0]["role"] == "system");
    CHECK(seen_body["messages"][0]["content"] == "system text");
    CHECK(seen_body["messages"][1]["role"] == "user");
    CHECK(seen_auth.empty());   // no key configured -> no Authorization header
}

TEST_CASE("http provider sends a bearer token when a key is configured") {
    std::string seen_auth;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        res.set_content(envelope(R"({"answer":"ok"})"), "application/json");
    });
    HttpProviderConfig cfg = quick_config(server.base_url());
    cfg.api_key = "sk-test";
    HttpProvider provider(cfg);
    provider.complete(Role::orchestrator, kPrompt, "answer_v1");
    CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("auth failures abort immediately without retries") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
        res.set_content("{}", "application/json");
    });
    HttpProvider provider(quick_config(server.base_url()));
    try {
        provider.complete(Role::planner, kPrompt, "plan_v1");
        FAIL("expected auth_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::auth_failure);
    }
    CHECK(server.hits() == 1);
}

TEST_CASE("non-json content is a malformed result, not a retry") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(envelope("not json"), "application/json");
    });
    HttpProvider provider(quick_config(server.base_url()));
    ProviderResult r = provider.complete(Role::parser, kPrompt, "params_v1");
    CHECK(r.malformed);
    CHECK(r.raw == "not json");
    CHECK_FALSE(r.error.empty());
    CHECK(server.hits() == 1);
}

TEST_CASE("server errors are retried with backoff until one succeeds") {
    std::atomic<int> calls{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++calls == 1) {
            res.status = 500;
            res.set_content("overloaded", "text/plain");
        } else {
            res.set_content(envelope(R"({"answer":"recovered"})"), "application/json");
        }
    });
    HttpProvider provider(quick_config(server.base_url()));
    ProviderResult r = provider.complete(Role::orchestrator, kPrompt, "answer_v1");
    CHECK_FALSE(r.malformed);
    CHECK(r.record["answer"] == "recovered");
    CHECK(server.hits() == 2);
}

TEST_CASE("persistent server errors exhaust the retry budget") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("down", "text/plain");
    });
    HttpProviderConfig cfg = quick_config(server.base_url());
    cfg.max_attempts = 2;
    HttpProvider provider(cfg);
    try {
        provider.complete(Role::planner, kPrompt, "plan_v1");
        FAIL("expected provider_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::provider_failure);
        CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
    }
    CHECK(server.hits() == 2);
}

TEST_CASE("a response without the choices envelope is a provider failure") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"usage":{"total_tokens":3}})", "application/json");
    });
    HttpProvider provider(quick_config(server.base_url()));
    try {
        provider.complete(Role::parser, kPrompt, "params_v1");
        FAIL("expected provider_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::provider_failure);
    }
}

TEST_CASE("script fixtures reject duplicate steps and flag exhaustion") {
    const Json dup{{"name", "dup"},
                   {"steps", Json::array({Json{{"role", "parser"}, {"step", 0},
                                               {"response", Json{{"params", Json::object()}}}},
                                          Json{{"role", "parser"}, {"step", 0},
                                               {"response", Json{{"params", Json::object()}}}}})}};
    try {
        ScriptFixture::from_json(dup);
        FAIL("expected invalid_input");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_input);
        CHECK(std::string(e.what()).find("repeats step") != std::string::npos);
    }

    const Json single{{"name", "short"},
                      {"steps", Json::array({Json{{"role", "parser"}, {"step", 0},
                                                  {"response",
                                                   Json{{"params", Json{{"kind", "interval"},
                                                                        {"xmin", 0.0},
                                                                        {"xmax", 1.0}}}}}}})}};
    ScriptedProvider provider{ScriptFixture::from_json(single)};
    CHECK(provider.name() == "scripted:short");
    ProviderResult first = provider.complete(Role::parser, kPrompt, "params_v1");
    CHECK_FALSE(first.malformed);
    try {
        provider.complete(Role::parser, kPrompt, "params_v1");
        FAIL("expected script_exhausted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::script_exhausted);
        CHECK(std::string(e.what()).find("exhausted") != std::string::npos);
    }
}

TEST_CASE("scripted provider surfaces schema violations as malformed results") {
    const Json doc{{"name", "off_schema"},
                   {"steps", Json::array({Json{{"role", "planner"}, {"step", 0},
                                               {"response", Json{{"subtasks", 7}}}},
                                          Json{{"role", "parser"}, {"step", 0},
                                               {"response", "free text"}}})}};
    ScriptedProvider provider{ScriptFixture::from_json(doc)};
    ProviderResult bad_plan = provider.complete(Role::planner, kPrompt, "plan_v1");
    CHECK(bad_plan.malformed);
    CHECK(bad_plan.error.find("subtasks") != std::string::npos);
    ProviderResult text = provider.complete(Role::parser, kPrompt, "params_v1");
    CHECK(text.malformed);
    CHECK(text.raw == "free text");
}

TEST_CASE("schema checks accept well-formed records and name the defect otherwise") {
    CHECK(check_schema("plan_v1", Json{{"subtasks", Json::array({Json{{"k", 1},
                                                                      {"tool", "solve"}}})}})
              .empty());
    CHECK_FALSE(check_schema("plan_v1", Json{{"subtasks", Json::array()}}).empty());
    CHECK_FALSE(check_schema("plan_v1", Json{{"subtasks",
                                              Json::array({Json{{"tool", "solve"}}})}})
                    .empty());

    CHECK(check_schema("params_v1", Json{{"params", Json::object()}}).empty());
    CHECK_FALSE(check_schema("params_v1", Json{{"params", 3}}).empty());

    CHECK(check_schema("directive_v1", Json{{"action", "pass"}}).empty());
    CHECK(check_schema("directive_v1", Json{{"action", "retry"}, {"k", 2}}).empty());
    CHECK_FALSE(check_schema("directive_v1", Json{{"action", "retry"}}).empty());
    CHECK_FALSE(check_schema("directive_v1", Json{{"action", "explode"}, {"k", 1}}).empty());

    CHECK(check_schema("answer_v1", Json{{"answer", "done"}}).empty());
    CHECK_FALSE(check_schema("answer_v1", Json{{"answer", 1}}).empty());
    CHECK_FALSE(check_schema("nope_v9", Json::object()).empty());
}

TEST_CASE("unreachable endpoints fail after the configured attempts") {
    HttpProviderConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";   // discard port, nothing listens
    cfg.max_attempts = 2;
    cfg.backoff_ms = 1;
    cfg.timeout_sec = 1;
    HttpProvider provider(cfg);
    try {
        provider.complete(Role::planner, kPrompt, "plan_v1");
        FAIL("expected provider_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::provider_failure);
    }
}
