#include "pdechain/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "pdechain/errors.hpp"
#include "pdechain/expr.hpp"

namespace pdechain::bench {

namespace {

const std::vector<std::string>& taxonomy() {
    static const std::vector<std::string> kCategories{
        "Heat",    "Diffusion", "Diffusion-Reaction", "Wave",    "Klein-Gordon", "Advection",
        "Burgers", "Laplace",   "Poisson",            "Allen-Cahn", "Other",
    };
    return kCategories;
}

[[noreturn]] void case_error(const std::string& id, const std::string& message) {
    throw Error(ErrorCode::schema_violation, "case " + (id.empty() ? "?" : id) + ": " + message);
}

std::string require_string(const Json& doc, const std::string& id, const std::string& field) {
    if (!doc.contains(field) || !doc[field].is_string() || doc[field].get<std::string>().empty()) {
        case_error(id, "field " + field + ": non-empty string required");
    }
    return doc[field].get<std::string>();
}

BenchCase parse_case(const Json& doc, const std::filesystem::path& file) {
    if (!doc.is_object()) case_error(file.stem().string(), "case document must be an object");
    BenchCase c;
    c.id = require_string(doc, file.stem().string(), "id");
    c.category = require_string(doc, c.id, "category");
    if (!known_category(c.category)) case_error(c.id, "field category: unknown '" + c.category + "'");
    c.nl_description = require_string(doc, c.id, "nl_description");
    if (!doc.contains("pattern_graph")) case_error(c.id, "field pattern_graph: required");
    try {
        c.pattern_graph = ToolGraph::from_json(doc["pattern_graph"]);
        c.pattern_graph.finalize();
    } catch (const Error& e) {
        case_error(c.id, std::string("field pattern_graph: ") + e.what());
    }
    if (doc.contains("expected_invocations")) {
        if (!doc["expected_invocations"].is_array()) {
            case_error(c.id, "field expected_invocations: array required");
        }
        for (const Json& item : doc["expected_invocations"]) {
            if (!item.is_object() || !item.contains("tool") || !item.contains("params") ||
                !item.contains("output")) {
                case_error(c.id, "field expected_invocations: entries need tool/params/output");
            }
            c.expected_invocations.push_back(ExpectedInvocation{
                item["tool"].get<std::string>(),
                item["params"].get<std::string>(),
                item["output"].get<std::string>(),
            });
        }
    }
    if (doc.contains("numeric_check")) {
        const Json& nc = doc["numeric_check"];
        if (!nc.is_object() || !nc.contains("reference") || !nc.contains("threshold")) {
            case_error(c.id, "field numeric_check: needs reference and threshold");
        }
        NumericCheck check;
        check.reference = nc["reference"].get<std::string>();
        check.threshold = nc["threshold"].get<double>();
        if (nc.contains("norm")) check.norm = nc["norm"].get<std::string>();
        if (check.threshold <= 0.0) case_error(c.id, "field numeric_check.threshold: must be > 0");
        if (check.norm != "l2" && check.norm != "linf") {
            case_error(c.id, "field numeric_check.norm: l2 or linf");
        }
        try {
            expr::Expr::parse(check.reference);
        } catch (const Error& e) {
            case_error(c.id, std::string("field numeric_check.reference: ") + e.what());
        }
        c.numeric_check = std::move(check);
    }
    if (doc.contains("script")) c.script = doc["script"].get<std::string>();
    return c;
}

std::string format3(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", value);
    return buffer;
}

// Runs one case in isolation; every failure mode folds into the result.
CaseResult run_one(const BenchCase& c, const pde::ToolRegistry& registry,
                   const ProviderFactory& factory, const BenchOptions& options) {
    CaseResult r;
    r.id = c.id;
    r.category = c.category;
    try {
        std::unique_ptr<ChatProvider> provider = factory(c);
        if (!provider) {
            throw Error(ErrorCode::provider_failure, "provider factory returned nothing");
        }
        const std::filesystem::path session_dir =
            options.out_dir.empty() ? std::filesystem::path{} : options.out_dir / c.id;
        SessionResult session =
            run_session(Query{c.nl_description, {}}, registry, *provider, options.session_cfg,
                        session_dir);
        if (!session_dir.empty()) session.persist(session_dir);

        r.completed = session.completed;
        r.failure_reason = session.failure_reason;
        r.stats = session.stats;
        r.logical = metrics::compute_logical_scores(session.exec_graph, c.pattern_graph,
                                                    options.metric_cfg);

        text::HashingEmbedder embedder;
        std::size_t cursor = 0;
        for (const ExpectedInvocation& expected : c.expected_invocations) {
            text::LocalScores scores;
            for (; cursor < session.log.size(); ++cursor) {
                const ActionRecord& rec = session.log[cursor];
                if (rec.status != ActionStatus::ok || rec.tool != expected.tool) continue;
                const std::string actual = rec.params.dump() + " -> " + rec.outcome.summary;
                const std::string reference = expected.params_text + " -> " + expected.output_text;
                scores = text::local_scores(embedder, actual, reference);
                ++cursor;
                break;
            }
            r.local.push_back(scores);
        }

        bool numeric_ok = true;
        if (c.numeric_check) {
            r.numeric_error = numeric_error(session, *c.numeric_check);
            numeric_ok = r.numeric_error.has_value() &&
                         *r.numeric_error <= c.numeric_check->threshold;
        }
        r.pass = session.completed && numeric_ok;
    } catch (const Error& e) {
        r.pass = false;
        r.completed = false;
        r.failure_reason = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    return r;
}

struct Aggregate {
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    void add(double value) {
        if (count == 0) {
            min = max = value;
        } else {
            min = std::min(min, value);
            max = std::max(max, value);
        }
        sum += value;
        ++count;
    }

    Json to_json() const {
        Json j;
        j["mean"] = count ? sum / count : 0.0;
        j["min"] = min;
        j["max"] = max;
        return j;
    }
};

}  // namespace

bool known_category(const std::string& name) {
    const auto& cats = taxonomy();
    return std::find(cats.begin(), cats.end(), name) != cats.end();
}

std::vector<BenchCase> load_cases(const std::filesystem::path& pack_dir) {
    const std::filesystem::path manifest_path = pack_dir / "pack.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw Error(ErrorCode::io_error, "pack manifest not found: " + manifest_path.string());
    }
    const Json manifest = read_json_file(manifest_path);
    if (!manifest.is_object() || !manifest.contains("cases") || !manifest["cases"].is_array()) {
        throw Error(ErrorCode::schema_violation,
                    "pack.json must be an object with a 'cases' array");
    }
    std::vector<BenchCase> cases;
    std::set<std::string> seen;
    for (const Json& entry : manifest["cases"]) {
        if (!entry.is_string()) {
            throw Error(ErrorCode::schema_violation, "pack.json cases must be file names");
        }
        const std::filesystem::path file = pack_dir / entry.get<std::string>();
        BenchCase c = parse_case(read_json_file(file), file);
        if (!seen.insert(c.id).second) {
            throw Error(ErrorCode::schema_violation, "duplicate case id: " + c.id);
        }
        // Scripts resolve against the case file so manifests may pull cases
        // from sibling packs.
        if (!c.script.empty()) c.script = (file.parent_path() / c.script).string();
        cases.push_back(std::move(c));
    }
    return cases;
}

Json CaseResult::to_json() const {
    Json j;
    j["id"] = id;
    j["category"] = category;
    j["pass"] = pass;
    j["completed"] = completed;
    if (numeric_error) {
        j["numeric_error"] = *numeric_error;
    } else {
        j["numeric_error"] = nullptr;
    }
    j["logical"] = logical.to_json();
    Json local_list = Json::array();
    for (const text::LocalScores& s : local) {
        Json e;
        e["sts"] = s.sts;
        e["bert_p"] = s.bert_p;
        e["bert_r"] = s.bert_r;
        e["bert_f1"] = s.bert_f1;
        local_list.push_back(std::move(e));
    }
    j["local"] = std::move(local_list);
    if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
    j["stats"] = stats.to_json();
    return j;
}

Json BenchReport::to_json() const {
    Json j;
    Json case_list = Json::array();
    for (const CaseResult& r : results) case_list.push_back(r.to_json());
    j["cases"] = std::move(case_list);

    Json categories = Json::array();
    int total_pass = 0;
    for (const std::string& cat : taxonomy()) {
        int total = 0;
        int pass = 0;
        for (const CaseResult& r : results) {
            if (r.category != cat) continue;
            ++total;
            if (r.pass) ++pass;
        }
        if (total == 0) continue;
        total_pass += pass;
        Json row;
        row["category"] = cat;
        row["total"] = total;
        row["pass"] = pass;
        row["pass_rate"] = static_cast<double>(pass) / total;
        categories.push_back(std::move(row));
    }
    j["categories"] = std::move(categories);

    Json totals;
    totals["cases"] = results.size();
    totals["pass"] = total_pass;
    totals["pass_rate"] = results.empty() ? 0.0 : static_cast<double>(total_pass) / results.size();
    j["totals"] = std::move(totals);

    Aggregate r_v, r_e, js, nged, embed, structural, sts, bert_f1;
    for (const CaseResult& r : results) {
        r_v.add(r.logical.r_v);
        r_e.add(r.logical.r_e);
        js.add(r.logical.js_sim);
        nged.add(r.logical.nged_sim);
        embed.add(r.logical.embed_sim);
        structural.add((r.logical.structural.connectivity + r.logical.structural.role_nodes +
                        r.logical.structural.critical_path + r.logical.structural.exec_order) /
                       4.0);
        for (const text::LocalScores& s : r.local) {
            sts.add(s.sts);
            bert_f1.add(s.bert_f1);
        }
    }
    Json metrics_block;
    metrics_block["r_v"] = r_v.to_json();
    metrics_block["r_e"] = r_e.to_json();
    metrics_block["js_sim"] = js.to_json();
    metrics_block["nged_sim"] = nged.to_json();
    metrics_block["embed_sim"] = embed.to_json();
    metrics_block["structural"] = structural.to_json();
    metrics_block["sts"] = sts.to_json();
    metrics_block["bert_f1"] = bert_f1.to_json();
    j["metrics"] = std::move(metrics_block);

    j["config"] = config_echo;
    return j;
}

std::string BenchReport::render_markdown() const {
    const Json j = to_json();
    std::string md = "# bench report\n\n";
    md += "| category | total | pass | pass rate |\n";
    md += "|---|---|---|---|\n";
    for (const Json& row : j["categories"]) {
        md += "| " + row["category"].get<std::string>() + " | " +
              std::to_string(row["total"].get<int>()) + " | " +
              std::to_string(row["pass"].get<int>()) + " | " +
              format3(row["pass_rate"].get<double>()) + " |\n";
    }
    md += "| **total** | " + std::to_string(j["totals"]["cases"].get<int>()) + " | " +
          std::to_string(j["totals"]["pass"].get<int>()) + " | " +
          format3(j["totals"]["pass_rate"].get<double>()) + " |\n";

    md += "\n## metric means\n\n";
    md += "| metric | mean | min | max |\n";
    md += "|---|---|---|---|\n";
    for (const auto& [name, agg] : j["metrics"].items()) {
        md += "| " + name + " | " + format3(agg["mean"].get<double>()) + " | " +
              format3(agg["min"].get<double>()) + " | " + format3(agg["max"].get<double>()) +
              " |\n";
    }

    md += "\n## cases\n\n";
    md += "| id | category | pass | numeric error |\n";
    md += "|---|---|---|---|\n";
    for (const CaseResult& r : results) {
        std::string numeric = "-";
        if (r.numeric_error) numeric = format_double(*r.numeric_error);
        md += "| " + r.id + " | " + r.category + " | " + (r.pass ? "yes" : "no") + " | " +
              numeric + " |\n";
    }
    return md;
}

BenchReport run_bench(const std::vector<BenchCase>& cases, const pde::ToolRegistry& registry,
                      const ProviderFactory& factory, const BenchOptions& options) {
    std::vector<CaseResult> results(cases.size());
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || cases.size() <= 1) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            results[i] = run_one(cases[i], registry, factory, options);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cases.size()) break;
                results[i] = run_one(cases[i], registry, factory, options);
            }
        };
        std::vector<std::thread> threads;
        const int n = std::min<int>(jobs, static_cast<int>(cases.size()));
        threads.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    std::sort(results.begin(), results.end(),
              [](const CaseResult& a, const CaseResult& b) { return a.id < b.id; });

    BenchReport report;
    report.results = std::move(results);
    Json config;
    config["session"] = options.session_cfg.to_json();
    config["metrics"] = options.metric_cfg.to_json();
    config["jobs"] = jobs;
    report.config_echo = std::move(config);
    return report;
}

std::optional<double> numeric_error(const SessionResult& session, const NumericCheck& check) {
    if (!session.pool) return std::nullopt;

    // Newest surviving solution artifact wins.
    std::string handle;
    int best_seq = -1;
    const Json snapshot = session.pool->snapshot();
    for (const Json& entry : snapshot["entries"]) {
        if (entry["kind"].get<std::string>() != "solution") continue;
        if (entry["evicted"].get<bool>()) continue;
        const int seq = entry["seq"].get<int>();
        if (seq > best_seq) {
            best_seq = seq;
            handle = entry["handle"].get<std::string>();
        }
    }
    if (handle.empty()) return std::nullopt;

    const auto& solution = std::get<pde::Solution>(session.pool->get(handle));
    const expr::Expr reference = expr::Expr::parse(check.reference);

    double sum_sq = 0.0;
    double max_abs = 0.0;
    std::size_t count = 0;
    if (solution.y.empty()) {
        for (std::size_t i = 0; i < solution.x.size(); ++i) {
            expr::Bindings b;
            b.x = solution.x[i];
            if (solution.time_dependent) b.t = solution.t_final;
            const double diff = solution.u[i] - reference.eval(b);
            sum_sq += diff * diff;
            max_abs = std::max(max_abs, std::abs(diff));
            ++count;
        }
    } else {
        for (std::size_t jy = 0; jy < solution.y.size(); ++jy) {
            for (std::size_t ix = 0; ix < solution.x.size(); ++ix) {
                expr::Bindings b;
                b.x = solution.x[ix];
                b.y = solution.y[jy];
                if (solution.time_dependent) b.t = solution.t_final;
                const double diff = solution.u[jy * solution.x.size() + ix] - reference.eval(b);
                sum_sq += diff * diff;
                max_abs = std::max(max_abs, std::abs(diff));
                ++count;
            }
        }
    }
    if (count == 0) return std::nullopt;
    if (check.norm == "linf") return max_abs;
    return std::sqrt(sum_sq / static_cast<double>(count));
}

}  // namespace pdechain::bench
