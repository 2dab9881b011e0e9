#include "pdechain/graph_metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "pdechain/errors.hpp"

namespace pdechain::metrics {

void MetricConfig::validate() const {
    if (alpha <= 0.0) throw Error(ErrorCode::invalid_input, "metric config: alpha must be positive");
    if (slope_k <= 0.0) throw Error(ErrorCode::invalid_input, "metric config: slope_k must be positive");
    if (damping <= 0.0 || damping >= 1.0)
        throw Error(ErrorCode::invalid_input, "metric config: damping must lie in (0, 1)");
    if (pr_tol <= 0.0) throw Error(ErrorCode::invalid_input, "metric config: pr_tol must be positive");
    if (n2v.dims < 2) throw Error(ErrorCode::invalid_input, "metric config: n2v.dims must be at least 2");
    if (n2v.walk_len < 1 || n2v.walks_per_node < 1 || n2v.window < 1 || n2v.epochs < 1 ||
        n2v.neg_samples < 0)
        throw Error(ErrorCode::invalid_input, "metric config: node2vec parameters out of range");
    if (n2v.p <= 0.0 || n2v.q <= 0.0)
        throw Error(ErrorCode::invalid_input, "metric config: n2v.p and n2v.q must be positive");
    if (ged_beam_width < 1)
        throw Error(ErrorCode::invalid_input, "metric config: ged_beam_width must be positive");
}

Json MetricConfig::to_json() const {
    Json j;
    j["alpha"] = alpha;
    j["slope_k"] = slope_k;
    j["damping"] = damping;
    j["pr_tol"] = pr_tol;
    j["ged_exact_limit"] = ged_exact_limit;
    j["ged_beam_width"] = ged_beam_width;
    j["include_order_edges"] = include_order_edges;
    Json n;
    n["dims"] = n2v.dims;
    n["walk_len"] = n2v.walk_len;
    n["walks_per_node"] = n2v.walks_per_node;
    n["p"] = n2v.p;
    n["q"] = n2v.q;
    n["window"] = n2v.window;
    n["epochs"] = n2v.epochs;
    n["neg_samples"] = n2v.neg_samples;
    n["seed"] = n2v.seed;
    j["node2vec"] = std::move(n);
    return j;
}

Json LogicalScores::to_json() const {
    Json j;
    j["r_v"] = r_v;
    j["r_e"] = r_e;
    j["js_sim"] = js_sim;
    j["nged_sim"] = nged_sim;
    j["embed_sim"] = embed_sim;
    Json s;
    s["connectivity"] = structural.connectivity;
    s["role_nodes"] = structural.role_nodes;
    s["critical_path"] = structural.critical_path;
    s["exec_order"] = structural.exec_order;
    j["structural"] = std::move(s);
    j["ged_cost"] = ged.cost;
    j["ged_approximate"] = ged.approximate;
    return j;
}

MetricView make_metric_view(const ToolGraph& graph, const MetricConfig& cfg) {
    MetricView view;
    std::vector<const GraphNode*> tool_nodes;
    for (const auto& n : graph.nodes())
        if (n.kind == NodeKind::tool) tool_nodes.push_back(&n);
    std::sort(tool_nodes.begin(), tool_nodes.end(),
              [](const GraphNode* a, const GraphNode* b) { return a->seq < b->seq; });

    std::map<std::string, int> index;   // node id -> view index
    std::map<std::string, int> occurrence;
    for (const auto* n : tool_nodes) {
        int occ = ++occurrence[n->role];
        index[n->id] = static_cast<int>(view.labels.size());
        view.labels.push_back(n->role + "#" + std::to_string(occ));
        view.roles.push_back(n->role);
    }

    std::set<std::pair<int, int>> seen;
    for (const auto& e : graph.edges()) {
        if (e.dep == DepKind::order && !cfg.include_order_edges) continue;
        auto s = index.find(e.src);
        auto d = index.find(e.dst);
        if (s == index.end() || d == index.end()) continue;
        if (seen.insert({s->second, d->second}).second)
            view.edges.emplace_back(s->second, d->second);
    }
    std::sort(view.edges.begin(), view.edges.end());
    return view;
}

std::pair<double, double> node_edge_match(const ToolGraph& exec, const ToolGraph& pattern,
                                          const MetricConfig& cfg) {
    MetricView ve = make_metric_view(exec, cfg);
    MetricView vp = make_metric_view(pattern, cfg);
    if (vp.node_count() == 0)
        throw Error(ErrorCode::invalid_input, "node_edge_match: pattern graph has no tool nodes");

    std::set<std::string> exec_labels(ve.labels.begin(), ve.labels.end());
    std::size_t node_hits = 0;
    for (const auto& l : vp.labels)
        if (exec_labels.count(l)) ++node_hits;
    double r_v = static_cast<double>(node_hits) / static_cast<double>(vp.node_count());

    double r_e = 1.0;
    if (vp.edge_count() > 0) {
        std::set<std::pair<std::string, std::string>> exec_edges;
        for (auto [s, d] : ve.edges) exec_edges.insert({ve.labels[s], ve.labels[d]});
        std::size_t edge_hits = 0;
        for (auto [s, d] : vp.edges)
            if (exec_edges.count({vp.labels[s], vp.labels[d]})) ++edge_hits;
        r_e = static_cast<double>(edge_hits) / static_cast<double>(vp.edge_count());
    }
    return {r_v, r_e};
}

std::vector<double> pagerank(const MetricView& view, const MetricConfig& cfg) {
    const std::size_t n = view.node_count();
    if (n == 0) throw Error(ErrorCode::invalid_input, "pagerank: graph has no tool nodes");

    std::vector<std::vector<int>> in_edges(n);
    std::vector<int> out_deg(n, 0);
    for (auto [s, d] : view.edges) {
        in_edges[d].push_back(s);
        ++out_deg[s];
    }

    const double d = cfg.damping;
    std::vector<double> rank(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (int iter = 0; iter < 100000; ++iter) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (out_deg[i] == 0) dangling += rank[i];
        double base = (1.0 - d) / static_cast<double>(n) + d * dangling / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i : in_edges[j]) acc += rank[i] / static_cast<double>(out_deg[i]);
            next[j] = base + d * acc;
        }
        double delta = 0.0;
        for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - rank[j]);
        rank.swap(next);
        if (delta < cfg.pr_tol) break;
    }
    // Normalize away residual drift so the result is an exact distribution.
    double total = std::accumulate(rank.begin(), rank.end(), 0.0);
    for (auto& r : rank) r /= total;
    return rank;
}

std::map<std::string, double> pagerank(const ToolGraph& graph, const MetricConfig& cfg) {
    MetricView view = make_metric_view(graph, cfg);
    std::vector<double> rank = pagerank(view, cfg);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < view.node_count(); ++i) out[view.labels[i]] = rank[i];
    return out;
}

double js_similarity(const ToolGraph& pattern, const ToolGraph& exec, const MetricConfig& cfg) {
    auto pr_p = pagerank(pattern, cfg);
    auto pr_e = pagerank(exec, cfg);

    std::set<std::string> universe;
    for (const auto& [l, _] : pr_p) universe.insert(l);
    for (const auto& [l, _] : pr_e) universe.insert(l);

    auto value = [](const std::map<std::string, double>& m, const std::string& l) {
        auto it = m.find(l);
        return it == m.end() ? 0.0 : it->second;
    };
    // Jensen-Shannon divergence against the mixture, base-2 logs so the
    // divergence lands in [0, 1].
    double djs = 0.0;
    for (const auto& l : universe) {
        double p = value(pr_p, l);
        double q = value(pr_e, l);
        double m = 0.5 * (p + q);
        if (p > 0.0) djs += 0.5 * p * std::log2(p / m);
        if (q > 0.0) djs += 0.5 * q * std::log2(q / m);
    }
    djs = std::clamp(djs, 0.0, 1.0);
    return 1.0 - std::sqrt(djs);
}

namespace {

struct AdjMatrix {
    int n = 0;
    std::vector<char> m;   // row-major
    bool at(int i, int j) const { return m[static_cast<std::size_t>(i) * n + j] != 0; }
};

AdjMatrix adjacency(const MetricView& v) {
    AdjMatrix a;
    a.n = static_cast<int>(v.node_count());
    a.m.assign(static_cast<std::size_t>(a.n) * a.n, 0);
    for (auto [s, d] : v.edges) a.m[static_cast<std::size_t>(s) * a.n + d] = 1;
    return a;
}

// Cost contribution of assigning A-node `i` given assignments of all j < i.
// `mapping[j] >= 0` is the matched B index, -1 means deleted.
double pair_cost(const AdjMatrix& a, const AdjMatrix& b, const std::vector<int>& mapping, int i,
                 int bi) {
    double c = 0.0;
    for (int j = 0; j < i; ++j) {
        bool ea_fwd = a.at(j, i);
        bool ea_bck = a.at(i, j);
        if (mapping[j] >= 0 && bi >= 0) {
            c += (ea_fwd != b.at(mapping[j], bi)) ? 1.0 : 0.0;
            c += (ea_bck != b.at(bi, mapping[j])) ? 1.0 : 0.0;
        } else {
            // One side unmapped: every A edge on the pair must be deleted.
            c += (ea_fwd ? 1.0 : 0.0) + (ea_bck ? 1.0 : 0.0);
        }
    }
    return c;
}

// Insertions owed for B nodes left unmatched, plus B edges touching them.
double completion_cost(const MetricView& vb, const AdjMatrix& b, std::uint64_t used_b) {
    double c = 0.0;
    for (int k = 0; k < b.n; ++k)
        if (!(used_b >> k & 1)) c += 1.0;
    for (auto [s, d] : vb.edges)
        if (!(used_b >> s & 1) || !(used_b >> d & 1)) c += 1.0;
    return c;
}

struct BeamState {
    double cost = 0.0;
    std::vector<int> mapping;
    std::uint64_t used_b = 0;
};

double remaining_bound(int assigned, int n_a, int na_deleted, std::uint64_t used_b, int n_b) {
    int rest_a = n_a - assigned;
    int free_b = n_b - static_cast<int>(std::popcount(used_b));
    (void)na_deleted;
    return static_cast<double>(std::abs(rest_a - free_b));
}

double ged_beam(const MetricView& va, const MetricView& vb, const AdjMatrix& a, const AdjMatrix& b,
                int beam_width) {
    std::vector<BeamState> beam{BeamState{}};
    for (int i = 0; i < a.n; ++i) {
        std::vector<BeamState> next;
        for (const auto& st : beam) {
            for (int bi = 0; bi < b.n; ++bi) {
                if (st.used_b >> bi & 1) continue;
                BeamState ns = st;
                ns.cost += (va.roles[i] == vb.roles[bi]) ? 0.0 : 1.0;
                ns.cost += pair_cost(a, b, st.mapping, i, bi);
                ns.mapping.push_back(bi);
                ns.used_b |= std::uint64_t{1} << bi;
                next.push_back(std::move(ns));
            }
            BeamState del = st;
            del.cost += 1.0 + pair_cost(a, b, st.mapping, i, -1);
            del.mapping.push_back(-1);
            next.push_back(std::move(del));
        }
        std::stable_sort(next.begin(), next.end(), [&](const BeamState& x, const BeamState& y) {
            double bx = x.cost + remaining_bound(i + 1, a.n, 0, x.used_b, b.n);
            double by = y.cost + remaining_bound(i + 1, a.n, 0, y.used_b, b.n);
            if (bx != by) return bx < by;
            return x.mapping < y.mapping;
        });
        if (static_cast<int>(next.size()) > beam_width) next.resize(beam_width);
        beam = std::move(next);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& st : beam) best = std::min(best, st.cost + completion_cost(vb, b, st.used_b));
    return best;
}

void ged_branch(const MetricView& va, const MetricView& vb, const AdjMatrix& a, const AdjMatrix& b,
                std::vector<int>& mapping, std::uint64_t used_b, double cost, double& best) {
    int i = static_cast<int>(mapping.size());
    if (cost + remaining_bound(i, a.n, 0, used_b, b.n) >= best) return;
    if (i == a.n) {
        best = std::min(best, cost + completion_cost(vb, b, used_b));
        return;
    }
    // Label-equal candidates first: cheap assignments tighten `best` early.
    std::vector<int> order;
    for (int bi = 0; bi < b.n; ++bi)
        if (!(used_b >> bi & 1) && va.roles[i] == vb.roles[bi]) order.push_back(bi);
    for (int bi = 0; bi < b.n; ++bi)
        if (!(used_b >> bi & 1) && va.roles[i] != vb.roles[bi]) order.push_back(bi);

    for (int bi : order) {
        double c = cost + ((va.roles[i] == vb.roles[bi]) ? 0.0 : 1.0) +
                   pair_cost(a, b, mapping, i, bi);
        mapping.push_back(bi);
        ged_branch(va, vb, a, b, mapping, used_b | (std::uint64_t{1} << bi), c, best);
        mapping.pop_back();
    }
    double c = cost + 1.0 + pair_cost(a, b, mapping, i, -1);
    mapping.push_back(-1);
    ged_branch(va, vb, a, b, mapping, used_b, c, best);
    mapping.pop_back();
}

// Canonical argument order keeps the (symmetric-cost) computation
// insensitive to which graph is passed first, including in the beam regime.
bool view_precedes(const MetricView& x, const MetricView& y) {
    if (x.node_count() != y.node_count()) return x.node_count() < y.node_count();
    if (x.edge_count() != y.edge_count()) return x.edge_count() < y.edge_count();
    if (x.labels != y.labels) return x.labels < y.labels;
    return x.edges <= y.edges;
}

}  // namespace

GedResult ged(const MetricView& a_in, const MetricView& b_in, const MetricConfig& cfg) {
    const MetricView& a = view_precedes(a_in, b_in) ? a_in : b_in;
    const MetricView& b = view_precedes(a_in, b_in) ? b_in : a_in;
    if (b.node_count() > 64)
        throw Error(ErrorCode::invalid_input, "ged: graphs beyond 64 nodes are not supported");

    AdjMatrix am = adjacency(a);
    AdjMatrix bm = adjacency(b);

    GedResult result;
    result.approximate =
        a.node_count() > cfg.ged_exact_limit || b.node_count() > cfg.ged_exact_limit;
    double beam = ged_beam(a, b, am, bm, cfg.ged_beam_width);
    if (result.approximate) {
        result.cost = beam;
        return result;
    }
    double best = beam;   // beam result is an upper bound seeding the search
    std::vector<int> mapping;
    mapping.reserve(a.node_count());
    ged_branch(a, b, am, bm, mapping, 0, 0.0, best);
    result.cost = best;
    return result;
}

GedResult ged(const ToolGraph& exec, const ToolGraph& pattern, const MetricConfig& cfg) {
    return ged(make_metric_view(exec, cfg), make_metric_view(pattern, cfg), cfg);
}

double nged_score(double nged, double alpha) {
    return 1.0 - (1.0 - std::exp(-alpha * nged)) / (1.0 - std::exp(-alpha));
}

double nged_similarity(const ToolGraph& exec, const ToolGraph& pattern, const MetricConfig& cfg) {
    MetricView ve = make_metric_view(exec, cfg);
    MetricView vp = make_metric_view(pattern, cfg);
    double base = static_cast<double>(ve.node_count() + ve.edge_count() + vp.node_count() +
                                      vp.edge_count());
    if (base == 0.0) return 1.0;   // two empty graphs are identical
    double nged = std::min(ged(ve, vp, cfg).cost / base, 1.0);
    return nged_score(nged, cfg.alpha);
}

std::vector<std::vector<double>> node2vec_embed(const ToolGraph& graph, const MetricConfig& cfg) {
    return node2vec_embed(make_metric_view(graph, cfg), cfg.n2v);
}

double sigmoid_score(double sim_raw, double slope_k) {
    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    double hi = sigmoid(slope_k);
    double lo = 1.0 - hi;   // sigmoid(-k), written to make score(0) exactly 0.5
    return (sigmoid(slope_k * sim_raw) - lo) / (hi - lo);
}

namespace {

std::vector<double> graph_embedding(const MetricView& view, const MetricConfig& cfg) {
    auto vectors = node2vec_embed(view, cfg.n2v);
    auto weights = pagerank(view, cfg);
    std::vector<double> g(static_cast<std::size_t>(cfg.n2v.dims), 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        for (std::size_t d = 0; d < g.size(); ++d) g[d] += weights[i] * vectors[i][d];
    return g;
}

}  // namespace

double embedding_similarity(const ToolGraph& exec, const ToolGraph& pattern,
                            const MetricConfig& cfg) {
    MetricView ve = make_metric_view(exec, cfg);
    MetricView vp = make_metric_view(pattern, cfg);
    if (ve.node_count() == 0 || vp.node_count() == 0)
        throw Error(ErrorCode::invalid_input, "embedding_similarity: graph has no tool nodes");

    std::vector<double> ge = graph_embedding(ve, cfg);
    std::vector<double> gp = graph_embedding(vp, cfg);

    double sim_raw;
    if (ge == gp) {
        // Identical aggregates (e.g. a graph against itself) score a clean 1
        // rather than whatever rounding the norms would introduce.
        sim_raw = 1.0;
    } else {
        double dot = 0.0, ne = 0.0, np = 0.0;
        for (std::size_t d = 0; d < ge.size(); ++d) {
            dot += ge[d] * gp[d];
            ne += ge[d] * ge[d];
            np += gp[d] * gp[d];
        }
        if (ne == 0.0 || np == 0.0)
            throw Error(ErrorCode::degenerate_embedding,
                        "embedding_similarity: zero-norm graph embedding");
        sim_raw = std::clamp(dot / (std::sqrt(ne) * std::sqrt(np)), -1.0, 1.0);
    }
    return sigmoid_score(sim_raw, cfg.slope_k);
}

namespace {

double lcs_ratio(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j)
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        prev.swap(cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

std::vector<int> topo_indices(const MetricView& v) {
    const int n = static_cast<int>(v.node_count());
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> out(n);
    for (auto [s, d] : v.edges) {
        out[s].push_back(d);
        ++indeg[d];
    }
    std::vector<int> ready, order;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::sort(ready.begin(), ready.end(), std::greater<>());
        int u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (int w : out[u])
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (static_cast<int>(order.size()) != n)
        throw Error(ErrorCode::cyclic_graph, "structural_similarity: graph contains a cycle");
    return order;
}

// Longest directed path, returned as its label sequence. Ties resolve to the
// smallest node index at every choice point so the result is reproducible.
std::vector<std::string> longest_path_labels(const MetricView& v) {
    const int n = static_cast<int>(v.node_count());
    if (n == 0) return {};
    std::vector<std::vector<int>> in(n);
    for (auto [s, d] : v.edges) in[d].push_back(s);

    std::vector<int> length(n, 1), pred(n, -1);
    for (int u : topo_indices(v)) {
        std::sort(in[u].begin(), in[u].end());
        for (int s : in[u])
            if (length[s] + 1 > length[u]) {
                length[u] = length[s] + 1;
                pred[u] = s;
            }
    }
    int end = 0;
    for (int i = 1; i < n; ++i)
        if (length[i] > length[end]) end = i;

    std::vector<std::string> labels;
    for (int u = end; u != -1; u = pred[u]) labels.push_back(v.labels[u]);
    std::reverse(labels.begin(), labels.end());
    return labels;
}

double density(const MetricView& v) {
    double n = static_cast<double>(v.node_count());
    return static_cast<double>(v.edge_count()) / std::max(1.0, n * (n - 1.0));
}

}  // namespace

StructuralScores structural_similarity(const ToolGraph& exec, const ToolGraph& pattern,
                                       const MetricConfig& cfg) {
    MetricView ve = make_metric_view(exec, cfg);
    MetricView vp = make_metric_view(pattern, cfg);
    if (ve.node_count() == 0 || vp.node_count() == 0)
        throw Error(ErrorCode::invalid_input, "structural_similarity: graph has no tool nodes");

    StructuralScores s;
    s.connectivity = 1.0 - std::abs(density(ve) - density(vp));

    // Multiset Jaccard over occurrence-indexed labels.
    std::map<std::string, int> ce, cp;
    for (const auto& l : ve.labels) ++ce[l];
    for (const auto& l : vp.labels) ++cp[l];
    int inter = 0, uni = 0;
    std::set<std::string> all;
    for (const auto& [l, _] : ce) all.insert(l);
    for (const auto& [l, _] : cp) all.insert(l);
    for (const auto& l : all) {
        int a = ce.count(l) ? ce[l] : 0;
        int b = cp.count(l) ? cp[l] : 0;
        inter += std::min(a, b);
        uni += std::max(a, b);
    }
    s.role_nodes = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);

    s.critical_path = lcs_ratio(longest_path_labels(ve), longest_path_labels(vp));

    // Execution-order agreement over the shared label set only, so extra
    // unmatched steps do not drown out ordering information.
    std::set<std::string> shared;
    for (const auto& l : ve.labels)
        if (std::find(vp.labels.begin(), vp.labels.end(), l) != vp.labels.end()) shared.insert(l);
    std::vector<std::string> se, sp;
    for (const auto& l : ve.labels)
        if (shared.count(l)) se.push_back(l);
    for (const auto& l : vp.labels)
        if (shared.count(l)) sp.push_back(l);
    s.exec_order = lcs_ratio(se, sp);
    return s;
}

LogicalScores compute_logical_scores(const ToolGraph& exec, const ToolGraph& pattern,
                                     const MetricConfig& cfg) {
    cfg.validate();
    MetricView ve = make_metric_view(exec, cfg);
    MetricView vp = make_metric_view(pattern, cfg);
    if (vp.node_count() == 0)
        throw Error(ErrorCode::invalid_input, "compute_logical_scores: pattern graph is empty");

    LogicalScores out;
    out.ged = ged(ve, vp, cfg);
    double base = static_cast<double>(ve.node_count() + ve.edge_count() + vp.node_count() +
                                      vp.edge_count());
    out.nged_sim = nged_score(std::min(out.ged.cost / base, 1.0), cfg.alpha);

    if (ve.node_count() == 0) {
        // An execution that produced no tool calls matches nothing; every
        // similarity component bottoms out rather than erroring.
        out.r_v = 0.0;
        out.r_e = vp.edge_count() == 0 ? 1.0 : 0.0;
        return out;
    }
    auto [r_v, r_e] = node_edge_match(exec, pattern, cfg);
    out.r_v = r_v;
    out.r_e = r_e;
    out.js_sim = js_similarity(pattern, exec, cfg);
    out.embed_sim = embedding_similarity(exec, pattern, cfg);
    out.structural = structural_similarity(exec, pattern, cfg);
    return out;
}

}  // namespace pdechain::metrics
