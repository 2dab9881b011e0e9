#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pdechain/graph.hpp"

namespace pdechain::metrics {

struct Node2VecParams {
    int dims = 32;
    int walk_len = 10;
    int walks_per_node = 20;
    double p = 1.0;
    double q = 1.0;
    int window = 4;
    int epochs = 5;
    int neg_samples = 5;
    std::uint64_t seed = 42;
};

struct MetricConfig {
    double alpha = 2.0;          // NGED sensitivity
    double slope_k = 1.0;        // sigmoid slope for embedding similarity
    double damping = 0.85;       // PageRank damping factor
    double pr_tol = 1e-12;       // power-iteration tolerance
    Node2VecParams n2v;
    std::size_t ged_exact_limit = 10;   // exact branch-and-bound up to this node count
    int ged_beam_width = 200;
    bool include_order_edges = false;   // order edges excluded from matching by default

    void validate() const;
    Json to_json() const;
};

struct StructuralScores {
    double connectivity = 0.0;
    double role_nodes = 0.0;
    double critical_path = 0.0;
    double exec_order = 0.0;
};

struct GedResult {
    double cost = 0.0;
    bool approximate = false;
};

struct LogicalScores {
    double r_v = 0.0;
    double r_e = 0.0;
    double js_sim = 0.0;
    double nged_sim = 0.0;
    double embed_sim = 0.0;
    StructuralScores structural;
    GedResult ged;

    Json to_json() const;
};

// Comparison view of a graph: tool nodes in seq order, identified by their
// role label with a per-role occurrence index so duplicate tools stay
// distinguishable across graphs ("solve#1", "solve#2").
struct MetricView {
    std::vector<std::string> labels;             // occurrence-indexed, seq order
    std::vector<std::string> roles;              // bare role per node, seq order
    std::vector<std::pair<int, int>> edges;      // deduplicated, indices into labels

    std::size_t node_count() const { return labels.size(); }
    std::size_t edge_count() const { return edges.size(); }
};

MetricView make_metric_view(const ToolGraph& graph, const MetricConfig& cfg);

// Eq.-5-style node/edge match ratios over the shared label universe.
std::pair<double, double> node_edge_match(const ToolGraph& exec, const ToolGraph& pattern,
                                          const MetricConfig& cfg);

// PageRank importance per node label; entries sum to 1.
std::map<std::string, double> pagerank(const ToolGraph& graph, const MetricConfig& cfg);
std::vector<double> pagerank(const MetricView& view, const MetricConfig& cfg);

// 1 - sqrt(JS divergence) between PageRank distributions, base-2 logs.
double js_similarity(const ToolGraph& pattern, const ToolGraph& exec, const MetricConfig& cfg);

// Unit-cost graph edit distance (node insert/delete/substitute, edge
// insert/delete). Exact when both graphs fit ged_exact_limit, otherwise a
// lower-bound-guided beam approximation flagged `approximate`.
GedResult ged(const ToolGraph& exec, const ToolGraph& pattern, const MetricConfig& cfg);
GedResult ged(const MetricView& a, const MetricView& b, const MetricConfig& cfg);

// Exponentially mapped normalized GED similarity.
double nged_similarity(const ToolGraph& exec, const ToolGraph& pattern, const MetricConfig& cfg);
double nged_score(double nged, double alpha);

// Per-node embeddings in view node order; deterministic for a fixed seed.
std::vector<std::vector<double>> node2vec_embed(const ToolGraph& graph, const MetricConfig& cfg);
std::vector<std::vector<double>> node2vec_embed(const MetricView& view, const Node2VecParams& params);

// Cosine of PageRank-weighted graph embeddings, rescaled through a
// parameterized sigmoid onto [0, 1].
double embedding_similarity(const ToolGraph& exec, const ToolGraph& pattern, const MetricConfig& cfg);
double sigmoid_score(double sim_raw, double slope_k);

StructuralScores structural_similarity(const ToolGraph& exec, const ToolGraph& pattern,
                                       const MetricConfig& cfg);

// Full logical score record; tolerates an empty execution graph (all
// similarity components report 0 in that case).
LogicalScores compute_logical_scores(const ToolGraph& exec, const ToolGraph& pattern,
                                     const MetricConfig& cfg);

}  // namespace pdechain::metrics
