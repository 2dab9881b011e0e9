#include "pdechain/tools.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>

#include "pdechain/errors.hpp"
#include "pdechain/expr.hpp"
#include "pdechain/kernels.hpp"

namespace pdechain::pde {

namespace {

[[noreturn]] void schema_fail(const std::string& message) {
    throw Error(ErrorCode::schema_violation, message);
}

bool handle_has_kind(const std::string& value, ArtifactKind kind) {
    std::size_t colon = value.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= value.size()) return false;
    if (value.substr(0, colon) != artifact_kind_name(kind)) return false;
    return std::all_of(value.begin() + colon + 1, value.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

double p_real(const Json& params, const char* name) { return params.at(name).get<double>(); }

std::optional<double> p_real_opt(const Json& params, const char* name) {
    if (!params.contains(name)) return std::nullopt;
    return params.at(name).get<double>();
}

int p_int(const Json& params, const char* name) {
    return static_cast<int>(params.at(name).get<double>());
}

std::optional<int> p_int_opt(const Json& params, const char* name) {
    if (!params.contains(name)) return std::nullopt;
    return static_cast<int>(params.at(name).get<double>());
}

std::string p_text(const Json& params, const char* name) {
    return params.at(name).get<std::string>();
}

std::optional<std::string> p_text_opt(const Json& params, const char* name) {
    if (!params.contains(name)) return std::nullopt;
    return params.at(name).get<std::string>();
}

template <class T>
const T& fetch(ResourcePool& pool, const Json& params, const char* name) {
    return std::get<T>(pool.get(p_text(params, name)));
}

double parse_real_token(const std::string& token, const char* what) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw Error(ErrorCode::invalid_input,
                    std::string(what) + ": cannot parse number '" + token + "'");
    return value;
}

double interpolate_1d(const Solution& sol, double x) {
    if (x < sol.x.front() - 1e-12 || x > sol.x.back() + 1e-12)
        throw Error(ErrorCode::invalid_input,
                    "point " + format_double(x) + " lies outside the solution domain");
    x = std::clamp(x, sol.x.front(), sol.x.back());
    auto hi = std::upper_bound(sol.x.begin(), sol.x.end(), x);
    if (hi == sol.x.begin()) ++hi;
    if (hi == sol.x.end()) --hi;
    std::size_t i = static_cast<std::size_t>(hi - sol.x.begin());
    double w = (x - sol.x[i - 1]) / (sol.x[i] - sol.x[i - 1]);
    return (1.0 - w) * sol.u[i - 1] + w * sol.u[i];
}

double interpolate_2d(const Solution& sol, double x, double y) {
    auto axis_index = [](const std::vector<double>& axis, double v, const char* name) {
        if (v < axis.front() - 1e-12 || v > axis.back() + 1e-12)
            throw Error(ErrorCode::invalid_input, std::string(name) + "-coordinate " +
                                                      format_double(v) +
                                                      " lies outside the solution domain");
        v = std::clamp(v, axis.front(), axis.back());
        auto hi = std::upper_bound(axis.begin(), axis.end(), v);
        if (hi == axis.begin()) ++hi;
        if (hi == axis.end()) --hi;
        std::size_t i = static_cast<std::size_t>(hi - axis.begin());
        double w = (v - axis[i - 1]) / (axis[i] - axis[i - 1]);
        return std::pair<std::size_t, double>{i, w};
    };
    auto [i, wx] = axis_index(sol.x, x, "x");
    auto [j, wy] = axis_index(sol.y, y, "y");
    const std::size_t nx = sol.x.size();
    auto at = [&](std::size_t ii, std::size_t jj) { return sol.u[jj * nx + ii]; };
    double lo = (1.0 - wx) * at(i - 1, j - 1) + wx * at(i, j - 1);
    double hi2 = (1.0 - wx) * at(i - 1, j) + wx * at(i, j);
    return (1.0 - wy) * lo + wy * hi2;
}

ToolResult geometry_body(ToolContext& ctx) {
    Domain d;
    d.shape = p_text(ctx.params, "kind");
    d.xmin = p_real(ctx.params, "xmin");
    d.xmax = p_real(ctx.params, "xmax");
    if (d.xmax <= d.xmin) throw Error(ErrorCode::invalid_input, "xmax must exceed xmin");
    std::string summary;
    if (d.is_2d()) {
        auto ymin = p_real_opt(ctx.params, "ymin");
        auto ymax = p_real_opt(ctx.params, "ymax");
        if (!ymin || !ymax)
            throw Error(ErrorCode::invalid_input, "rectangle domains need ymin and ymax");
        d.ymin = *ymin;
        d.ymax = *ymax;
        if (d.ymax <= d.ymin) throw Error(ErrorCode::invalid_input, "ymax must exceed ymin");
        summary = "rectangle domain [" + format_double(d.xmin) + ", " + format_double(d.xmax) +
                  "] x [" + format_double(d.ymin) + ", " + format_double(d.ymax) + "]";
    } else {
        summary = "interval domain [" + format_double(d.xmin) + ", " + format_double(d.xmax) + "]";
    }
    return {std::move(d), std::move(summary)};
}

ToolResult time_domain_body(ToolContext& ctx) {
    TimeDomain t;
    t.t0 = p_real(ctx.params, "t0");
    t.t1 = p_real(ctx.params, "t1");
    if (t.t1 <= t.t0) throw Error(ErrorCode::invalid_input, "t1 must exceed t0");
    std::string summary =
        "time domain [" + format_double(t.t0) + ", " + format_double(t.t1) + "]";
    return {t, std::move(summary)};
}

ToolResult pde_body(ToolContext& ctx) {
    PdeSpec spec;
    spec.category = p_text(ctx.params, "category");
    static const char* kReserved[] = {"klein_gordon", "burgers", "allen_cahn"};
    for (const char* r : kReserved)
        if (spec.category == r)
            throw Error(ErrorCode::invalid_input,
                        "category '" + spec.category + "' is reserved but not supported");

    for (const char* name : {"alpha", "c", "a", "k"})
        if (auto v = p_real_opt(ctx.params, name)) spec.coefficients[name] = *v;
    spec.source = p_text_opt(ctx.params, "source");

    auto require = [&](const char* name) {
        if (!spec.coefficients.count(name))
            throw Error(ErrorCode::invalid_input,
                        "category '" + spec.category + "' requires coefficient '" + name + "'");
    };
    if (spec.category == "heat") require("alpha");
    if (spec.category == "diffusion_reaction") {
        require("alpha");
        require("k");
    }
    if (spec.category == "wave") require("c");
    if (spec.category == "advection") require("a");

    std::string summary = spec.category + " equation";
    const char* sep = " with ";
    for (const auto& [name, value] : spec.coefficients) {
        summary += sep + std::string(name) + "=" + format_double(value);
        sep = ", ";
    }
    if (spec.source) summary += std::string(sep) + "source " + *spec.source;
    return {std::move(spec), std::move(summary)};
}

ToolResult bc_body(ToolContext& ctx) {
    BoundaryCondition bc;
    bc.btype = p_text(ctx.params, "btype");
    bc.location = p_text(ctx.params, "location");
    bc.value = p_text(ctx.params, "value");
    std::string summary = bc.btype + " condition at " + bc.location + ": " + bc.value;
    return {std::move(bc), std::move(summary)};
}

ToolResult ic_body(ToolContext& ctx) {
    InitialCondition ic;
    ic.value = p_text(ctx.params, "value");
    ic.velocity = p_text_opt(ctx.params, "velocity");
    std::string summary = "initial condition " + ic.value;
    if (ic.velocity) summary += ", velocity " + *ic.velocity;
    return {std::move(ic), std::move(summary)};
}

ToolResult assemble_body(ToolContext& ctx) {
    Problem p;
    p.domain = fetch<Domain>(ctx.pool, ctx.params, "domain");
    if (ctx.params.contains("timedomain"))
        p.time = fetch<TimeDomain>(ctx.pool, ctx.params, "timedomain");
    p.pde = fetch<PdeSpec>(ctx.pool, ctx.params, "pde");
    for (const auto& handle : split_handle_tokens(p_text(ctx.params, "bcs")))
        p.bcs.push_back(std::get<BoundaryCondition>(ctx.pool.get(handle)));
    if (ctx.params.contains("ic"))
        p.ic = fetch<InitialCondition>(ctx.pool, ctx.params, "ic");
    std::string summary = "assembled " + p.pde.category + " problem with " +
                          std::to_string(p.bcs.size()) + " boundary condition" +
                          (p.bcs.size() == 1 ? "" : "s");
    return {std::move(p), std::move(summary)};
}

ToolResult solver_body(ToolContext& ctx) {
    SolverSettings s;
    s.nx = p_int(ctx.params, "nx");
    if (s.nx < 3) throw Error(ErrorCode::invalid_input, "nx must be at least 3");
    s.ny = p_int_opt(ctx.params, "ny");
    if (s.ny && *s.ny < 3) throw Error(ErrorCode::invalid_input, "ny must be at least 3");
    s.nt = p_int_opt(ctx.params, "nt");
    if (s.nt && *s.nt < 1) throw Error(ErrorCode::invalid_input, "nt must be at least 1");
    s.scheme = p_text_opt(ctx.params, "scheme").value_or("auto");

    std::string summary = "solver settings: nx=" + std::to_string(s.nx);
    if (s.ny) summary += ", ny=" + std::to_string(*s.ny);
    if (s.nt) summary += ", nt=" + std::to_string(*s.nt);
    summary += ", scheme=" + s.scheme;
    return {std::move(s), std::move(summary)};
}

ToolResult solve_body(ToolContext& ctx) {
    const auto& problem = fetch<Problem>(ctx.pool, ctx.params, "problem");
    SolverSettings settings;   // nx=101, scheme=auto unless configured
    if (ctx.params.contains("solver"))
        settings = fetch<SolverSettings>(ctx.pool, ctx.params, "solver");

    Solution sol = solve_kernel(problem, settings);

    std::string summary;
    if (sol.time_dependent) {
        summary = "solved " + sol.category + " on " + std::to_string(sol.x.size()) +
                  " points, " + sol.meta["steps"].dump() + " steps (" +
                  sol.meta["scheme"].get<std::string>() + ")";
    } else {
        summary = "solved " + sol.category + " on " + std::to_string(sol.x.size()) + "x" +
                  std::to_string(sol.y.size()) + " grid (" +
                  sol.meta["scheme"].get<std::string>() + ", " + sol.meta["sweeps"].dump() +
                  " sweeps)";
    }
    if (ctx.diagnostics) {
        if (sol.meta.contains("lambda"))
            ctx.diagnostics->push_back("lambda=" +
                                       format_double(sol.meta["lambda"].get<double>()));
        if (sol.meta.contains("nu"))
            ctx.diagnostics->push_back("nu=" + format_double(sol.meta["nu"].get<double>()));
        if (sol.meta.contains("residual"))
            ctx.diagnostics->push_back("residual=" +
                                       format_double(sol.meta["residual"].get<double>()));
    }
    return {std::move(sol), std::move(summary)};
}

ToolResult evaluate_body(ToolContext& ctx) {
    const auto& sol = fetch<Solution>(ctx.pool, ctx.params, "solution");
    std::string points = p_text(ctx.params, "points");

    ValueList out;
    std::string summary = "values:";
    if (sol.y.empty()) {
        for (const auto& token : split_handle_tokens(points)) {
            double x = parse_real_token(token, "points");
            double v = interpolate_1d(sol, x);
            out.values.push_back(v);
            summary += " u(" + format_double(x) + ")=" + format_double(v);
        }
    } else {
        // 2-D points are `x,y` pairs separated by semicolons.
        std::size_t start = 0;
        while (start < points.size()) {
            std::size_t end = points.find(';', start);
            if (end == std::string::npos) end = points.size();
            auto coords = split_handle_tokens(points.substr(start, end - start));
            if (coords.size() != 2)
                throw Error(ErrorCode::invalid_input,
                            "2-D points must be 'x,y' pairs separated by ';'");
            double x = parse_real_token(coords[0], "points");
            double y = parse_real_token(coords[1], "points");
            double v = interpolate_2d(sol, x, y);
            out.values.push_back(v);
            summary +=
                " u(" + format_double(x) + "," + format_double(y) + ")=" + format_double(v);
            start = end + 1;
        }
    }
    if (out.values.empty()) throw Error(ErrorCode::invalid_input, "points list is empty");
    return {std::move(out), std::move(summary)};
}

ToolResult error_body(ToolContext& ctx) {
    const auto& sol = fetch<Solution>(ctx.pool, ctx.params, "solution");
    expr::Expr reference = expr::Expr::parse(p_text(ctx.params, "reference"));
    std::string norm = p_text(ctx.params, "norm");

    double sum_sq = 0.0, max_abs = 0.0;
    std::size_t count = 0;
    auto accumulate = [&](double numeric, double exact) {
        double d = numeric - exact;
        sum_sq += d * d;
        max_abs = std::max(max_abs, std::abs(d));
        ++count;
    };
    if (sol.y.empty()) {
        for (std::size_t i = 0; i < sol.x.size(); ++i) {
            expr::Bindings b;
            b.x = sol.x[i];
            b.t = sol.t_final;
            accumulate(sol.u[i], reference.eval(b));
        }
    } else {
        for (std::size_t j = 0; j < sol.y.size(); ++j)
            for (std::size_t i = 0; i < sol.x.size(); ++i) {
                expr::Bindings b;
                b.x = sol.x[i];
                b.y = sol.y[j];
                b.t = sol.t_final;
                accumulate(sol.u[j * sol.x.size() + i], reference.eval(b));
            }
    }
    RealValue r;
    r.value = norm == "linf" ? max_abs : std::sqrt(sum_sq / static_cast<double>(count));
    std::string summary = norm + " error " + format_double(r.value) + " against reference";
    return {r, std::move(summary)};
}

ToolResult export_body(ToolContext& ctx) {
    const auto& sol = fetch<Solution>(ctx.pool, ctx.params, "solution");
    std::string given = p_text(ctx.params, "path");
    std::filesystem::path target(given);
    if (target.is_relative() && !ctx.pool.artifact_dir().empty())
        target = ctx.pool.artifact_dir() / target;

    std::string csv;
    std::size_t rows = 0;
    if (sol.y.empty()) {
        csv = sol.time_dependent ? "x,t,u\n" : "x,u\n";
        for (std::size_t i = 0; i < sol.x.size(); ++i) {
            csv += format_double(sol.x[i]);
            if (sol.time_dependent) csv += "," + format_double(sol.t_final);
            csv += "," + format_double(sol.u[i]) + "\n";
            ++rows;
        }
    } else {
        csv = "x,y,u\n";
        for (std::size_t j = 0; j < sol.y.size(); ++j)
            for (std::size_t i = 0; i < sol.x.size(); ++i) {
                csv += format_double(sol.x[i]) + "," + format_double(sol.y[j]) + "," +
                       format_double(sol.u[j * sol.x.size() + i]) + "\n";
                ++rows;
            }
    }
    write_text_file(target, csv);

    Json meta;
    meta["category"] = sol.category;
    meta["nx"] = sol.x.size();
    if (!sol.y.empty()) meta["ny"] = sol.y.size();
    if (sol.time_dependent) meta["t_final"] = sol.t_final;
    meta["solver"] = sol.meta;
    write_json_file(target.string() + ".meta.json", meta);

    FileRef ref;
    ref.path = given;
    ref.bytes = csv.size();
    std::string summary = "exported " + std::to_string(rows) + " rows to " + given;
    return {std::move(ref), std::move(summary)};
}

const char* param_type_name(ParamType t) {
    switch (t) {
        case ParamType::real: return "real";
        case ParamType::integer: return "int";
        case ParamType::text: return "text";
        case ParamType::expr: return "expr";
        case ParamType::enum_choice: return "enum";
        case ParamType::handle: return "handle";
        case ParamType::handles: return "handle list";
    }
    return "?";
}

}  // namespace

void ToolRegistry::add(ToolSpec spec) {
    if (has(spec.name))
        throw Error(ErrorCode::invalid_input, "tool '" + spec.name + "' already registered");
    tools_.push_back(std::move(spec));
}

bool ToolRegistry::has(const std::string& name) const {
    return std::any_of(tools_.begin(), tools_.end(),
                       [&](const ToolSpec& t) { return t.name == name; });
}

const ToolSpec& ToolRegistry::tool(const std::string& name) const {
    for (const auto& t : tools_)
        if (t.name == name) return t;
    throw Error(ErrorCode::unknown_tool, "unknown tool '" + name + "'");
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& t : tools_) out.push_back(t.name);
    return out;
}

Json ToolRegistry::schema_doc() const {
    Json tools = Json::array();
    for (const auto& t : tools_) {
        Json entry;
        entry["name"] = t.name;
        entry["description"] = t.description;
        Json params = Json::array();
        for (const auto& p : t.params) {
            Json ps;
            ps["name"] = p.name;
            ps["type"] = param_type_name(p.type);
            ps["required"] = p.required;
            if (!p.options.empty()) ps["options"] = p.options;
            if (p.handle_kind) ps["artifact"] = artifact_kind_name(*p.handle_kind);
            if (!p.doc.empty()) ps["doc"] = p.doc;
            params.push_back(std::move(ps));
        }
        entry["params"] = std::move(params);
        entry["returns"] = artifact_kind_name(t.returns);
        tools.push_back(std::move(entry));
    }
    Json doc;
    doc["tools"] = std::move(tools);
    return doc;
}

void validate_params(const ToolSpec& spec, const Json& params) {
    if (!params.is_object()) schema_fail(spec.name + ": parameters must be a JSON object");
    for (const auto& [key, _] : params.items()) {
        bool known = std::any_of(spec.params.begin(), spec.params.end(),
                                 [&](const ParamSpec& p) { return p.name == key; });
        if (!known) schema_fail(spec.name + ": unknown parameter '" + key + "'");
    }
    for (const auto& p : spec.params) {
        if (!params.contains(p.name)) {
            if (p.required)
                schema_fail(spec.name + ": missing required parameter '" + p.name + "'");
            continue;
        }
        const Json& v = params.at(p.name);
        auto type_fail = [&] {
            schema_fail(spec.name + ": parameter '" + p.name + "' must be " +
                        param_type_name(p.type));
        };
        switch (p.type) {
            case ParamType::real:
                if (!v.is_number()) type_fail();
                break;
            case ParamType::integer:
                if (!v.is_number_integer() &&
                    !(v.is_number() && v.get<double>() == std::floor(v.get<double>())))
                    type_fail();
                break;
            case ParamType::text:
                if (!v.is_string()) type_fail();
                break;
            case ParamType::expr: {
                if (!v.is_string()) type_fail();
                try {
                    expr::Expr::parse(v.get<std::string>());
                } catch (const Error& e) {
                    schema_fail(spec.name + ": parameter '" + p.name + "': " + e.what());
                }
                break;
            }
            case ParamType::enum_choice: {
                if (!v.is_string()) type_fail();
                const std::string s = v.get<std::string>();
                if (std::find(p.options.begin(), p.options.end(), s) == p.options.end())
                    schema_fail(spec.name + ": parameter '" + p.name + "' must be one of " +
                                [&] {
                                    std::string opts;
                                    for (const auto& o : p.options)
                                        opts += (opts.empty() ? "" : "|") + o;
                                    return opts;
                                }() +
                                ", got '" + s + "'");
                break;
            }
            case ParamType::handle: {
                if (!v.is_string()) type_fail();
                if (!handle_has_kind(v.get<std::string>(), *p.handle_kind))
                    schema_fail(spec.name + ": parameter '" + p.name + "' expects a " +
                                artifact_kind_name(*p.handle_kind) + " handle, got '" +
                                v.get<std::string>() + "'");
                break;
            }
            case ParamType::handles: {
                if (!v.is_string()) type_fail();
                auto tokens = split_handle_tokens(v.get<std::string>());
                if (tokens.empty())
                    schema_fail(spec.name + ": parameter '" + p.name + "' must list at least one " +
                                artifact_kind_name(*p.handle_kind) + " handle");
                for (const auto& token : tokens)
                    if (!handle_has_kind(token, *p.handle_kind))
                        schema_fail(spec.name + ": parameter '" + p.name + "' expects " +
                                    artifact_kind_name(*p.handle_kind) + " handles, got '" +
                                    token + "'");
                break;
            }
        }
    }
}

Outcome invoke(const ToolRegistry& registry, const std::string& tool_name, const Json& params,
               ResourcePool& pool, const NodeId& producer, int seq) {
    const ToolSpec& spec = registry.tool(tool_name);
    validate_params(spec, params);

    // Handle liveness: every referenced artifact must still be in the pool.
    for (const auto& p : spec.params) {
        if (!params.contains(p.name)) continue;
        if (p.type == ParamType::handle) {
            pool.get(params.at(p.name).get<std::string>());
        } else if (p.type == ParamType::handles) {
            for (const auto& token : split_handle_tokens(params.at(p.name).get<std::string>()))
                pool.get(token);
        }
    }

    Outcome outcome;
    ToolContext ctx{pool, params, producer, seq, &outcome.diagnostics};
    ToolResult result;
    try {
        result = spec.body(ctx);
    } catch (const Error& e) {
        // Internal failures surface with the tool name; distinctive codes
        // (stability, non-convergence, dangling handle) stay typed.
        ErrorCode code =
            e.code() == ErrorCode::invalid_input ? ErrorCode::tool_failure : e.code();
        throw Error(code, tool_name + ": " + e.what());
    }
    outcome.handle = pool.put(std::move(result.payload), producer, seq);
    outcome.summary = std::move(result.summary);
    return outcome;
}

ToolRegistry make_default_registry() {
    using PT = ParamType;
    using AK = ArtifactKind;
    ToolRegistry reg;

    reg.add({"define_geometry",
             "Create the spatial domain: an interval [xmin, xmax] or a rectangle.",
             {
                 {"kind", PT::enum_choice, true, {"interval", "rectangle"}, {}, ""},
                 {"xmin", PT::real, true, {}, {}, ""},
                 {"xmax", PT::real, true, {}, {}, ""},
                 {"ymin", PT::real, false, {}, {}, "rectangle only"},
                 {"ymax", PT::real, false, {}, {}, "rectangle only"},
             },
             AK::domain, geometry_body});

    reg.add({"define_time_domain",
             "Create the time interval [t0, t1] for evolution problems.",
             {
                 {"t0", PT::real, true, {}, {}, ""},
                 {"t1", PT::real, true, {}, {}, ""},
             },
             AK::timedomain, time_domain_body});

    reg.add({"define_pde",
             "Declare the equation: category plus its coefficients and optional source term.",
             {
                 {"category", PT::enum_choice, true,
                  {"heat", "wave", "laplace", "poisson", "advection", "diffusion_reaction",
                   "klein_gordon", "burgers", "allen_cahn"},
                  {}, "klein_gordon/burgers/allen_cahn are reserved"},
                 {"alpha", PT::real, false, {}, {}, "diffusivity (heat, diffusion_reaction)"},
                 {"c", PT::real, false, {}, {}, "wave speed"},
                 {"a", PT::real, false, {}, {}, "advection speed"},
                 {"k", PT::real, false, {}, {}, "linear reaction rate"},
                 {"source", PT::expr, false, {}, {}, "forcing term s(x[,y][,t])"},
                 {"domain", PT::handle, false, {}, AK::domain, "associates the equation with a domain"},
             },
             AK::pde, pde_body});

    reg.add({"define_boundary_condition",
             "Declare a dirichlet or neumann condition on part of the boundary.",
             {
                 {"btype", PT::enum_choice, true, {"dirichlet", "neumann"}, {}, ""},
                 {"location", PT::enum_choice, true, {"left", "right", "all"}, {}, ""},
                 {"value", PT::expr, true, {}, {}, "boundary value g(x[,y][,t])"},
             },
             AK::bc, bc_body});

    reg.add({"define_initial_condition",
             "Declare the initial state u(x, t0) and, for wave problems, the initial velocity.",
             {
                 {"value", PT::expr, true, {}, {}, ""},
                 {"velocity", PT::expr, false, {}, {}, "wave problems only"},
             },
             AK::ic, ic_body});

    reg.add({"assemble_problem",
             "Combine domain, equation, conditions, and optional time domain into a problem.",
             {
                 {"domain", PT::handle, true, {}, AK::domain, ""},
                 {"timedomain", PT::handle, false, {}, AK::timedomain, ""},
                 {"pde", PT::handle, true, {}, AK::pde, ""},
                 {"bcs", PT::handles, true, {}, AK::bc, "comma-separated bc handles"},
                 {"ic", PT::handle, false, {}, AK::ic, ""},
             },
             AK::problem, assemble_body});

    reg.add({"configure_solver",
             "Choose grid resolution and scheme; omitted values use per-category defaults.",
             {
                 {"nx", PT::integer, true, {}, {}, "grid points along x (>= 3)"},
                 {"ny", PT::integer, false, {}, {}, "grid points along y (2-D only)"},
                 {"nt", PT::integer, false, {}, {}, "time steps (default from stability)"},
                 {"scheme", PT::enum_choice, false, {"auto", "explicit", "implicit"}, {}, ""},
             },
             AK::solver, solver_body});

    reg.add({"solve",
             "Run the category-appropriate numerical scheme and store the solution.",
             {
                 {"problem", PT::handle, true, {}, AK::problem, ""},
                 {"solver", PT::handle, false, {}, AK::solver, "defaults: nx=101, scheme=auto"},
             },
             AK::solution, solve_body});

    reg.add({"evaluate_solution",
             "Interpolate the solution at the given points.",
             {
                 {"solution", PT::handle, true, {}, AK::solution, ""},
                 {"points", PT::text, true, {}, {},
                  "1-D: comma-separated x values; 2-D: 'x,y' pairs separated by ';'"},
             },
             AK::values, evaluate_body});

    reg.add({"compute_error",
             "Compare the solution against a reference expression under a norm.",
             {
                 {"solution", PT::handle, true, {}, AK::solution, ""},
                 {"reference", PT::expr, true, {}, {}, "reference u(x[,y][,t])"},
                 {"norm", PT::enum_choice, true, {"l2", "linf"}, {}, ""},
             },
             AK::real, error_body});

    reg.add({"export_solution",
             "Write the solution grid to CSV with a metadata sidecar.",
             {
                 {"solution", PT::handle, true, {}, AK::solution, ""},
                 {"path", PT::text, true, {}, {}, "target file; relative paths land in the session directory"},
             },
             AK::file, export_body});

    return reg;
}

}  // namespace pdechain::pde
