#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdechain/record.hpp"

namespace pdechain {

using NodeId = std::string;

enum class NodeKind { tool, subtask };
enum class DepKind { data, order };

struct GraphNode {
    NodeId id;
    std::string role;   // tool name
    NodeKind kind = NodeKind::tool;
    int seq = 0;
};

struct GraphEdge {
    NodeId src;
    NodeId dst;
    DepKind dep = DepKind::data;

    bool operator==(const GraphEdge&) const = default;
    auto operator<=>(const GraphEdge&) const = default;
};

// Directed graph of tool/subtask nodes. Serves as live graph memory during a
// session and as pattern/execution graph for the metrics.
//
// Construction is single-writer; finalize() verifies acyclicity and locks the
// graph, after which it is safe to share across threads.
class ToolGraph {
public:
    // Raw construction (pattern graphs, tests).
    void add_node(NodeId id, std::string role, NodeKind kind, int seq);
    void add_edge(const NodeId& src, const NodeId& dst, DepKind dep);

    // Inserts a node for an executed action. Data edges are derived from every
    // parameter value that names a live handle produced by an earlier node;
    // when no data edge links the seq-predecessor, an order edge is recorded.
    NodeId add_action_node(const ActionRecord& record);

    // All nodes reachable from `node` (excluded itself) via directed edges.
    std::set<NodeId> descendants(const NodeId& node) const;
    // Same, following only edges of kind `dep`.
    std::set<NodeId> descendants(const NodeId& node, DepKind dep) const;

    // Edge-respecting order, ties broken by ascending seq.
    std::vector<NodeId> topological_order() const;

    void finalize();
    bool finalized() const { return finalized_; }

    bool has_node(const NodeId& id) const { return index_.count(id) > 0; }
    const GraphNode& node(const NodeId& id) const;
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }
    bool has_edge(const NodeId& src, const NodeId& dst) const;
    bool empty() const { return nodes_.empty(); }
    std::size_t node_count() const { return nodes_.size(); }

    // Producer node of a handle registered via add_action_node, or empty.
    NodeId producer_of(const std::string& handle) const;

    std::string serialize() const;
    Json to_json() const;
    static ToolGraph parse(const std::string& text);
    static ToolGraph from_json(const Json& value);

    bool equals(const ToolGraph& other) const;

private:
    std::vector<GraphNode> nodes_;
    std::vector<GraphEdge> edges_;
    std::map<NodeId, std::size_t> index_;
    std::set<int> seqs_;
    std::map<std::string, NodeId> handle_producer_;
    bool finalized_ = false;

    void check_mutable() const;
};

// Human-readable listing used in prompt bundles.
std::string render_graph_summary(const ToolGraph& graph);

// Comma-separated list of handle tokens, whitespace trimmed, empties dropped.
std::vector<std::string> split_handle_tokens(const std::string& value);

}  // namespace pdechain
