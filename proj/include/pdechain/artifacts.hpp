#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdechain/graph.hpp"
#include "pdechain/jsonio.hpp"

namespace pdechain::pde {

enum class ArtifactKind {
    domain,
    timedomain,
    pde,
    bc,
    ic,
    problem,
    solver,
    solution,
    values,
    real,
    file,
};

std::string artifact_kind_name(ArtifactKind kind);
ArtifactKind artifact_kind_from(const std::string& name);

struct Domain {
    std::string shape;   // "interval" | "rectangle"
    double xmin = 0.0, xmax = 1.0;
    double ymin = 0.0, ymax = 1.0;   // rectangle only
    bool is_2d() const { return shape == "rectangle"; }
};

struct TimeDomain {
    double t0 = 0.0, t1 = 1.0;
};

struct PdeSpec {
    std::string category;
    std::map<std::string, double> coefficients;
    std::optional<std::string> source;   // expression text
};

struct BoundaryCondition {
    std::string btype;      // "dirichlet" | "neumann"
    std::string location;   // "left" | "right" | "all"
    std::string value;      // expression text
};

struct InitialCondition {
    std::string value;
    std::optional<std::string> velocity;   // wave only
};

struct Problem {
    Domain domain;
    std::optional<TimeDomain> time;
    PdeSpec pde;
    std::vector<BoundaryCondition> bcs;
    std::optional<InitialCondition> ic;
};

struct SolverSettings {
    int nx = 101;
    std::optional<int> ny;
    std::optional<int> nt;
    std::string scheme = "auto";
};

struct Solution {
    std::string category;
    std::vector<double> x;
    std::vector<double> y;   // empty for one-dimensional problems
    std::vector<double> u;   // final state, row-major over (y, x) when 2-D
    double t_final = 0.0;
    bool time_dependent = false;
    Json meta;   // scheme, step counts, stability numbers
};

struct ValueList {
    std::vector<double> values;
};

struct RealValue {
    double value = 0.0;
};

struct FileRef {
    std::string path;   // as given by the caller (kept relative if relative)
    std::uint64_t bytes = 0;
};

using ArtifactPayload = std::variant<Domain, TimeDomain, PdeSpec, BoundaryCondition,
                                     InitialCondition, Problem, SolverSettings, Solution,
                                     ValueList, RealValue, FileRef>;

ArtifactKind kind_of(const ArtifactPayload& payload);
Json payload_to_json(const ArtifactPayload& payload);

struct PoolEntry {
    ArtifactKind kind;
    ArtifactPayload payload;
    NodeId producer;
    int seq = 0;
    bool evicted = false;
};

// Session store for artifacts flowing between tools. Handles have the form
// `kind:counter`; counters never restart, so an evicted handle can never be
// resurrected by a later put.
class ResourcePool {
public:
    explicit ResourcePool(std::string session_id = "");

    std::string put(ArtifactPayload payload, const NodeId& producer, int seq);
    const ArtifactPayload& get(const std::string& handle) const;
    bool live(const std::string& handle) const;
    ArtifactKind kind_of_handle(const std::string& handle) const;

    // Evicts every entry produced by `node` or a data-flow descendant of it;
    // returns the evicted handles in creation order.
    std::vector<std::string> evict_descendants(const ToolGraph& graph, const NodeId& node);

    std::vector<std::string> live_handles() const;
    std::size_t live_count() const;
    const std::string& session_id() const { return session_id_; }

    // Directory used to resolve relative file artifacts (export targets).
    void set_artifact_dir(const std::filesystem::path& dir) { artifact_dir_ = dir; }
    const std::filesystem::path& artifact_dir() const { return artifact_dir_; }

    // Handles + kinds + payload digests; stable across runs.
    Json snapshot() const;
    // One handle per line with kind and producer, for prompt bundles.
    std::string listing() const;

private:
    std::string session_id_;
    std::map<std::string, PoolEntry> entries_;
    std::map<std::string, int> counters_;
    std::vector<std::string> order_;   // insertion order
    std::filesystem::path artifact_dir_;
};

}  // namespace pdechain::pde
