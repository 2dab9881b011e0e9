#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pdechain/bench.hpp"
#include "pdechain/errors.hpp"
#include "pdechain/session.hpp"
#include "pdechain/tools.hpp"

using namespace pdechain;

namespace {

Json step(const char* role, int index, Json response) {
    return Json{{"role", role}, {"step", index}, {"response", std::move(response)}};
}

Json fixture_doc(std::string name, std::vector<Json> steps) {
    return Json{{"name", std::move(name)}, {"steps", steps}};
}

ScriptedProvider provider_for(const Json& doc) {
    return ScriptedProvider(ScriptFixture::from_json(doc));
}

Json one_step_plan() {
    return Json{{"subtasks",
                 Json::array({Json{{"k", 1}, {"tool", "define_geometry"}, {"goal", "domain"}}})}};
}

Json good_geometry_params() {
    return Json{{"params", Json{{"kind", "interval"}, {"xmin", 0.0}, {"xmax", 1.0}}}};
}

Json bad_geometry_params() {
    return Json{{"params", Json{{"kind", "circle"}, {"xmin", 0.0}, {"xmax", 1.0}}}};
}

ActionRecord make_record(int k, const std::string& tool, Json params, const std::string& handle,
                         ActionStatus status, int seq) {
    ActionRecord r;
    r.k = k;
    r.tool = tool;
    r.params = std::move(params);
    r.outcome.handle = handle;
    r.outcome.summary = status == ActionStatus::ok ? "done" : "boom";
    r.status = status;
    r.seq = seq;
    return r;
}

const bench::BenchCase& case_by_id(const std::vector<bench::BenchCase>& cases,
                                   const std::string& id) {
    for (const auto& c : cases)
        if (c.id == id) return c;
    throw std::runtime_error("missing case " + id);
}

}  // namespace

TEST_CASE("single-subtask session completes with a clean silent checkpoint") {
    const Json doc = fixture_doc(
        "mini", {step("planner", 0, one_step_plan()), step("parser", 0, good_geometry_params()),
                 step("orchestrator", 0, Json{{"answer", "done"}})});
    auto registry = pde::make_default_registry();
    auto provider = provider_for(doc);
    ProgActConfig cfg;

    SessionResult r = run_session(Query{"make a unit interval", {}}, registry, provider, cfg);
    CHECK(r.completed);
    CHECK(r.failure_reason.empty());
    CHECK(r.answer == "done");
    CHECK(r.stats.validation_events == 1);    // final checkpoint over the open window
    CHECK(r.stats.corrective_calls == 0);     // clean window: mechanical pass, no call
    CHECK(r.stats.provider_calls == 3);       // plan + params + answer
    CHECK(r.stats.actions_total == 1);
    CHECK(r.stats.actions_failed == 0);
    CHECK(r.exec_graph.node_count() == 1);
    CHECK(r.pool->live("domain:1"));
}

TEST_CASE("parser self-repair consumes one extra call and leaves no failed action") {
    const Json doc = fixture_doc(
        "repair", {step("planner", 0, one_step_plan()), step("parser", 0, bad_geometry_params()),
                   step("parser", 1, good_geometry_params()),
                   step("orchestrator", 0, Json{{"answer", "fixed"}})});
    auto registry = pde::make_default_registry();
    auto provider = provider_for(doc);
    ProgActConfig cfg;

    SessionResult r = run_session(Query{"unit interval", {}}, registry, provider, cfg);
    CHECK(r.completed);
    CHECK(r.stats.provider_calls == 4);
    CHECK(r.stats.corrective_calls == 0);
    CHECK(r.stats.actions_failed == 0);
    CHECK(r.stats.actions_total == 1);
}

TEST_CASE("parse_params throws after the self-repair retry also fails") {
    const Json doc = fixture_doc("stubborn", {step("parser", 0, bad_geometry_params()),
                                              step("parser", 1, bad_geometry_params())});
    auto registry = pde::make_default_registry();
    auto provider = provider_for(doc);
    pde::ResourcePool pool;

    try {
        parse_params(Subtask{1, "define_geometry", "domain"}, "unit interval", registry, pool,
                     "", provider);
        FAIL("expected schema_violation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::schema_violation);
    }
}

TEST_CASE("checkpoint passes mechanically without consulting the provider") {
    auto registry = pde::make_default_registry();
    pde::ResourcePool pool;
    ToolGraph graph;

    ActionRecord ok1 = make_record(1, "define_geometry",
                                   Json{{"kind", "interval"}, {"xmin", 0.0}, {"xmax", 1.0}},
                                   "domain:1", ActionStatus::ok, 1);
    graph.add_action_node(ok1);
    pool.put(pde::Domain{}, "n1", 1);

    auto empty = provider_for(fixture_doc("silent", {}));

    SUBCASE("all-ok window") {
        bool called = true;
        Directive d = checkpoint_validate("q", {ok1}, graph, pool, empty, &called);
        CHECK(d.action == "pass");
        CHECK_FALSE(called);
    }

    SUBCASE("failure superseded by a later ok of the same subtask") {
        ActionRecord failed = make_record(1, "define_geometry", Json::object(), "",
                                          ActionStatus::failed, 1);
        ActionRecord redo = ok1;
        redo.seq = 2;
        bool called = true;
        Directive d = checkpoint_validate("q", {failed, redo}, graph, pool, empty, &called);
        CHECK(d.action == "pass");
        CHECK_FALSE(called);
    }
}

TEST_CASE("dirty checkpoint windows request a correction directive") {
    auto registry = pde::make_default_registry();
    pde::ResourcePool pool;
    ToolGraph graph;

    SUBCASE("unsuperseded failure") {
        ActionRecord failed = make_record(1, "define_geometry", Json::object(), "",
                                          ActionStatus::failed, 1);
        graph.add_action_node(failed);
        auto provider = provider_for(
            fixture_doc("retry", {step("orchestrator", 0, Json{{"action", "retry"}, {"k", 1}})}));
        bool called = false;
        Directive d = checkpoint_validate("q", {failed}, graph, pool, provider, &called);
        CHECK(called);
        CHECK(d.action == "retry");
        CHECK(d.k == 1);
    }

    SUBCASE("ok record referencing an evicted handle") {
        ActionRecord producer = make_record(1, "define_geometry", Json::object(), "domain:1",
                                            ActionStatus::ok, 1);
        const NodeId n1 = graph.add_action_node(producer);
        pool.put(pde::Domain{}, n1, 1);
        ActionRecord consumer = make_record(2, "define_pde", Json{{"domain", "domain:1"}},
                                            "pde:1", ActionStatus::ok, 2);
        graph.add_action_node(consumer);
        pool.evict_descendants(graph, n1);

        auto provider = provider_for(fixture_doc(
            "evict",
            {step("orchestrator", 0,
                  Json{{"action", "evict_redo"}, {"k", 1}, {"node", n1}, {"hint", "rebuild"}})}));
        bool called = false;
        Directive d = checkpoint_validate("q", {consumer}, graph, pool, provider, &called);
        CHECK(called);
        CHECK(d.action == "evict_redo");
        CHECK(d.node == n1);
    }
}

TEST_CASE("fault recovery evicts the bad branch and re-executes it") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    const auto& hc = case_by_id(cases, "heat_f1");
    auto registry = pde::make_default_registry();
    ScriptedProvider provider{ScriptFixture::load(hc.script)};
    ProgActConfig cfg;

    SessionResult r = run_session(Query{hc.nl_description, {}}, registry, provider, cfg);
    REQUIRE(r.completed);
    CHECK(r.stats.inner_recoveries == 1);
    CHECK(r.stats.replans == 0);
    CHECK(r.stats.validation_events == 4);
    CHECK(r.stats.actions_failed == 1);        // the unstable solve
    CHECK(r.stats.actions_invalidated >= 1);   // the evicted solver settings
    CHECK_FALSE(r.pool->live("solver:1"));
    CHECK(r.pool->live("solver:2"));
    CHECK(r.pool->live("solution:1"));
    CHECK(r.exec_graph.node_count() == 9);     // only surviving ok actions remain
    CHECK_FALSE(r.answer.empty());

    const auto dir = std::filesystem::temp_directory_path() / "pdechain_session_persist";
    std::filesystem::remove_all(dir);
    r.persist(dir);
    for (const char* name : {"actions.jsonl", "graph.json", "pool.json", "answer.md",
                             "config.json"})
        CHECK(std::filesystem::exists(dir / name));
    std::filesystem::remove_all(dir);
}

TEST_CASE("static mode leaves injected faults unrecovered") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    const auto& hc = case_by_id(cases, "heat_f1");
    auto registry = pde::make_default_registry();
    ScriptedProvider provider{ScriptFixture::load(hc.script)};
    ProgActConfig cfg;
    cfg.mode = "static";

    SessionResult r = run_session(Query{hc.nl_description, {}}, registry, provider, cfg);
    CHECK_FALSE(r.completed);
    CHECK(r.failure_reason.find("unrecovered failures") != std::string::npos);
    CHECK(r.stats.validation_events == 0);
    CHECK(r.stats.corrective_calls == 0);
    CHECK(r.answer.empty());
}

TEST_CASE("stepwise mode validates after every action") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    const auto& hc = case_by_id(cases, "heat_f1");
    auto registry = pde::make_default_registry();
    ProgActConfig stepwise;
    stepwise.mode = "stepwise";
    stepwise.normalize();
    CHECK(stepwise.checkpoint_every == 1);

    ScriptedProvider provider{ScriptFixture::load(hc.script)};
    SessionResult r = run_session(Query{hc.nl_description, {}}, registry, provider, stepwise);
    REQUIRE(r.completed);

    ScriptedProvider again{ScriptFixture::load(hc.script)};
    ProgActConfig progact;
    SessionResult base = run_session(Query{hc.nl_description, {}}, registry, again, progact);
    REQUIRE(base.completed);
    CHECK(r.stats.validation_events > base.stats.validation_events);
}

TEST_CASE("session replay is byte-identical") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    const auto& hc = case_by_id(cases, "heat_f1");
    auto registry = pde::make_default_registry();
    ProgActConfig cfg;

    auto run_once = [&] {
        ScriptedProvider provider{ScriptFixture::load(hc.script)};
        return run_session(Query{hc.nl_description, {}}, registry, provider, cfg);
    };
    SessionResult a = run_once();
    SessionResult b = run_once();
    CHECK(a.journal.dump(1) == b.journal.dump(1));
    CHECK(a.exec_graph.serialize() == b.exec_graph.serialize());
    CHECK(a.pool_snapshot.dump(1) == b.pool_snapshot.dump(1));
    CHECK(a.answer == b.answer);
}

TEST_CASE("planning retries once on validation feedback, then gives up") {
    auto registry = pde::make_default_registry();
    const Json bad_plan =
        Json{{"subtasks", Json::array({Json{{"k", 1}, {"tool", "no_such_tool"}}})}};

    SUBCASE("second attempt is accepted") {
        auto provider = provider_for(fixture_doc(
            "retry_ok", {step("planner", 0, bad_plan), step("planner", 1, one_step_plan())}));
        Plan p = plan(Query{"q", {}}, registry, provider);
        REQUIRE(p.subtasks.size() == 1);
        CHECK(p.subtasks[0].tool == "define_geometry");
        CHECK(p.revision == 0);
    }

    SUBCASE("two rejections raise session_failure") {
        auto provider = provider_for(
            fixture_doc("hopeless", {step("planner", 0, bad_plan), step("planner", 1, bad_plan)}));
        try {
            plan(Query{"q", {}}, registry, provider);
            FAIL("expected session_failure");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::session_failure);
        }
    }
}

TEST_CASE("replanning increments the revision") {
    auto registry = pde::make_default_registry();
    Plan current;
    current.subtasks.push_back(Subtask{1, "define_geometry", "domain"});
    auto provider = provider_for(fixture_doc("revise", {step("planner", 0, one_step_plan())}));
    Plan revised = replan(Query{"q", {}}, current, "the solve keeps failing", registry, provider);
    CHECK(revised.revision == 1);
    REQUIRE(revised.subtasks.size() == 1);
}

TEST_CASE("collapse escalates to a plan revision") {
    auto cases = bench::load_cases(PDECHAIN_PACKS_DIR "/faultpack");
    const auto& wc = case_by_id(cases, "wave_f1");
    auto registry = pde::make_default_registry();
    ScriptedProvider provider{ScriptFixture::load(wc.script)};
    ProgActConfig cfg;

    SessionResult r = run_session(Query{wc.nl_description, {}}, registry, provider, cfg);
    REQUIRE(r.completed);
    CHECK(r.stats.replans == 1);
    CHECK(r.final_plan.revision == 1);
}

TEST_CASE("config validation rejects nonsense budgets and modes") {
    ProgActConfig cfg;
    cfg.mode = "yolo";
    CHECK_THROWS_AS(cfg.normalize(), Error);
    ProgActConfig neg;
    neg.checkpoint_every = 0;
    CHECK_THROWS_AS(neg.normalize(), Error);
    ProgActConfig over;
    over.apply_overrides(Json{{"checkpoint_every", 5}, {"mode", "stepwise"}});
    over.normalize();
    CHECK(over.checkpoint_every == 1);   // stepwise wins over the override
}

TEST_CASE("action log rendering lists one line per record") {
    std::vector<ActionRecord> log;
    log.push_back(make_record(1, "define_geometry", Json::object(), "domain:1",
                              ActionStatus::ok, 1));
    log.push_back(make_record(2, "solve", Json::object(), "", ActionStatus::failed, 2));
    const std::string text = render_action_log(log);
    CHECK(text.find("define_geometry") != std::string::npos);
    CHECK(text.find("solve") != std::string::npos);
    CHECK(text.find("failed") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
