#include "pdechain/graph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace pdechain {

namespace {

const char* node_kind_name(NodeKind kind) {
    return kind == NodeKind::tool ? "tool" : "subtask";
}

NodeKind parse_node_kind(const std::string& text) {
    if (text == "tool") return NodeKind::tool;
    if (text == "subtask") return NodeKind::subtask;
    throw Error(ErrorCode::parse_error, "unknown node kind '" + text + "'");
}

const char* dep_kind_name(DepKind dep) {
    return dep == DepKind::data ? "data" : "order";
}

DepKind parse_dep_kind(const std::string& text) {
    if (text == "data") return DepKind::data;
    if (text == "order") return DepKind::order;
    throw Error(ErrorCode::parse_error, "unknown dep_kind '" + text + "'");
}

}  // namespace

void ToolGraph::check_mutable() const {
    if (finalized_) {
        throw Error(ErrorCode::invalid_input, "graph is finalized and immutable");
    }
}

void ToolGraph::add_node(NodeId id, std::string role, NodeKind kind, int seq) {
    check_mutable();
    if (index_.count(id)) {
        throw Error(ErrorCode::invalid_input, "duplicate node id '" + id + "'");
    }
    if (seqs_.count(seq)) {
        throw Error(ErrorCode::duplicate_seq,
                    "duplicate seq " + std::to_string(seq) + " for node '" + id + "'");
    }
    index_[id] = nodes_.size();
    seqs_.insert(seq);
    nodes_.push_back(GraphNode{std::move(id), std::move(role), kind, seq});
}

void ToolGraph::add_edge(const NodeId& src, const NodeId& dst, DepKind dep) {
    check_mutable();
    if (!index_.count(src)) {
        throw Error(ErrorCode::unknown_node, "edge source '" + src + "' not in graph");
    }
    if (!index_.count(dst)) {
        throw Error(ErrorCode::unknown_node, "edge target '" + dst + "' not in graph");
    }
    if (src == dst) {
        throw Error(ErrorCode::invalid_input, "self-loop on '" + src + "' rejected");
    }
    GraphEdge edge{src, dst, dep};
    if (std::find(edges_.begin(), edges_.end(), edge) == edges_.end()) {
        edges_.push_back(edge);
    }
}

NodeId ToolGraph::add_action_node(const ActionRecord& record) {
    check_mutable();
    if (record.tool.empty()) {
        throw Error(ErrorCode::invalid_input, "action record has no tool name");
    }
    if (seqs_.count(record.seq)) {
        throw Error(ErrorCode::duplicate_seq,
                    "duplicate seq " + std::to_string(record.seq) + " for tool '" + record.tool + "'");
    }

    // Seq-predecessor before inserting the new node.
    const GraphNode* prev = nullptr;
    for (const GraphNode& n : nodes_) {
        if (n.seq < record.seq && (!prev || n.seq > prev->seq)) {
            prev = &n;
        }
    }
    const NodeId prev_id = prev ? prev->id : NodeId{};

    NodeId id = "n" + std::to_string(record.seq);
    add_node(id, record.tool, NodeKind::tool, record.seq);

    bool data_from_prev = false;
    if (record.params.is_object()) {
        for (const auto& [name, value] : record.params.items()) {
            (void)name;
            if (!value.is_string()) continue;
            // Values may carry several handles (comma-separated lists).
            for (const auto& token : split_handle_tokens(value.get<std::string>())) {
                const auto it = handle_producer_.find(token);
                if (it == handle_producer_.end()) continue;
                add_edge(it->second, id, DepKind::data);
                if (it->second == prev_id) data_from_prev = true;
            }
        }
    }
    if (!prev_id.empty() && !data_from_prev) {
        add_edge(prev_id, id, DepKind::order);
    }
    if (!record.outcome.handle.empty()) {
        handle_producer_[record.outcome.handle] = id;
    }
    return id;
}

NodeId ToolGraph::producer_of(const std::string& handle) const {
    const auto it = handle_producer_.find(handle);
    return it == handle_producer_.end() ? NodeId{} : it->second;
}

const GraphNode& ToolGraph::node(const NodeId& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) {
        throw Error(ErrorCode::unknown_node, "unknown node '" + id + "'");
    }
    return nodes_[it->second];
}

bool ToolGraph::has_edge(const NodeId& src, const NodeId& dst) const {
    return std::any_of(edges_.begin(), edges_.end(),
                       [&](const GraphEdge& e) { return e.src == src && e.dst == dst; });
}

std::set<NodeId> ToolGraph::descendants(const NodeId& start) const {
    if (!index_.count(start)) {
        throw Error(ErrorCode::unknown_node, "unknown node '" + start + "'");
    }
    std::set<NodeId> seen;
    std::deque<NodeId> frontier{start};
    while (!frontier.empty()) {
        const NodeId cur = frontier.front();
        frontier.pop_front();
        for (const GraphEdge& e : edges_) {
            if (e.src == cur && !seen.count(e.dst) && e.dst != start) {
                seen.insert(e.dst);
                frontier.push_back(e.dst);
            }
        }
    }
    return seen;
}

std::set<NodeId> ToolGraph::descendants(const NodeId& start, DepKind dep) const {
    if (!index_.count(start)) {
        throw Error(ErrorCode::unknown_node, "unknown node '" + start + "'");
    }
    std::set<NodeId> seen;
    std::deque<NodeId> frontier{start};
    while (!frontier.empty()) {
        const NodeId cur = frontier.front();
        frontier.pop_front();
        for (const GraphEdge& e : edges_) {
            if (e.src == cur && e.dep == dep && !seen.count(e.dst) && e.dst != start) {
                seen.insert(e.dst);
                frontier.push_back(e.dst);
            }
        }
    }
    return seen;
}

std::vector<NodeId> ToolGraph::topological_order() const {
    std::map<NodeId, int> indegree;
    for (const GraphNode& n : nodes_) {
        indegree[n.id] = 0;
    }
    for (const GraphEdge& e : edges_) {
        ++indegree[e.dst];
    }

    auto seq_of = [&](const NodeId& id) { return nodes_[index_.at(id)].seq; };
    auto cmp = [&](const NodeId& a, const NodeId& b) { return seq_of(a) < seq_of(b); };

    std::vector<NodeId> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.push_back(id);
    }
    std::sort(ready.begin(), ready.end(), cmp);

    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        const NodeId next = ready.front();
        ready.erase(ready.begin());
        order.push_back(next);
        for (const GraphEdge& e : edges_) {
            if (e.src != next) continue;
            if (--indegree[e.dst] == 0) {
                ready.insert(std::upper_bound(ready.begin(), ready.end(), e.dst, cmp), e.dst);
            }
        }
    }
    if (order.size() != nodes_.size()) {
        // Name one edge inside the residual cycle.
        std::set<NodeId> placed(order.begin(), order.end());
        for (const GraphEdge& e : edges_) {
            if (!placed.count(e.src) && !placed.count(e.dst)) {
                throw Error(ErrorCode::cyclic_graph,
                            "cycle detected involving edge " + e.src + " -> " + e.dst);
            }
        }
        throw Error(ErrorCode::cyclic_graph, "cycle detected");
    }
    return order;
}

void ToolGraph::finalize() {
    topological_order();  // throws on cycles
    finalized_ = true;
}

Json ToolGraph::to_json() const {
    Json nodes = Json::array();
    for (const GraphNode& n : nodes_) {
        nodes.push_back({{"id", n.id}, {"role", n.role}, {"kind", node_kind_name(n.kind)}, {"seq", n.seq}});
    }
    Json edges = Json::array();
    for (const GraphEdge& e : edges_) {
        edges.push_back({{"src", e.src}, {"dst", e.dst}, {"dep_kind", dep_kind_name(e.dep)}});
    }
    return Json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::string ToolGraph::serialize() const {
    return to_json().dump(2) + "\n";
}

ToolGraph ToolGraph::from_json(const Json& value) {
    if (!value.is_object() || !value.contains("nodes") || !value.contains("edges")) {
        throw Error(ErrorCode::parse_error, "graph record must contain 'nodes' and 'edges'");
    }
    ToolGraph graph;
    for (const Json& n : value.at("nodes")) {
        for (const char* field : {"id", "role", "kind", "seq"}) {
            if (!n.contains(field)) {
                throw Error(ErrorCode::parse_error, std::string("graph node missing field '") + field + "'");
            }
        }
        graph.add_node(n.at("id").get<std::string>(), n.at("role").get<std::string>(),
                       parse_node_kind(n.at("kind").get<std::string>()), n.at("seq").get<int>());
    }
    for (const Json& e : value.at("edges")) {
        for (const char* field : {"src", "dst", "dep_kind"}) {
            if (!e.contains(field)) {
                throw Error(ErrorCode::parse_error, std::string("graph edge missing field '") + field + "'");
            }
        }
        graph.add_edge(e.at("src").get<std::string>(), e.at("dst").get<std::string>(),
                       parse_dep_kind(e.at("dep_kind").get<std::string>()));
    }
    return graph;
}

ToolGraph ToolGraph::parse(const std::string& text) {
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        throw Error(ErrorCode::parse_error, "graph record is not valid JSON");
    }
    return from_json(value);
}

bool ToolGraph::equals(const ToolGraph& other) const {
    if (nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size()) {
        return false;
    }
    for (const GraphNode& n : nodes_) {
        if (!other.has_node(n.id)) return false;
        const GraphNode& o = other.node(n.id);
        if (o.role != n.role || o.kind != n.kind || o.seq != n.seq) return false;
    }
    std::vector<GraphEdge> a = edges_;
    std::vector<GraphEdge> b = other.edges_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::string render_graph_summary(const ToolGraph& graph) {
    std::ostringstream out;
    out << "nodes:\n";
    for (const GraphNode& n : graph.nodes()) {
        out << "  " << n.id << " role=" << n.role << " seq=" << n.seq << "\n";
    }
    out << "edges:\n";
    for (const GraphEdge& e : graph.edges()) {
        out << "  " << e.src << " -> " << e.dst << " [" << dep_kind_name(e.dep) << "]\n";
    }
    return out.str();
}

std::vector<std::string> split_handle_tokens(const std::string& value) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= value.size()) {
        std::size_t end = value.find(',', start);
        if (end == std::string::npos) end = value.size();
        std::size_t lo = start, hi = end;
        while (lo < hi && std::isspace(static_cast<unsigned char>(value[lo]))) ++lo;
        while (hi > lo && std::isspace(static_cast<unsigned char>(value[hi - 1]))) --hi;
        if (hi > lo) tokens.push_back(value.substr(lo, hi - lo));
        start = end + 1;
    }
    return tokens;
}

}  // namespace pdechain
