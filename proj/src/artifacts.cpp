#include "pdechain/artifacts.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "pdechain/errors.hpp"

namespace pdechain::pde {

namespace {

constexpr std::pair<ArtifactKind, const char*> kKindNames[] = {
    {ArtifactKind::domain, "domain"},   {ArtifactKind::timedomain, "timedomain"},
    {ArtifactKind::pde, "pde"},         {ArtifactKind::bc, "bc"},
    {ArtifactKind::ic, "ic"},           {ArtifactKind::problem, "problem"},
    {ArtifactKind::solver, "solver"},   {ArtifactKind::solution, "solution"},
    {ArtifactKind::values, "values"},   {ArtifactKind::real, "real"},
    {ArtifactKind::file, "file"},
};

Json domain_json(const Domain& d) {
    Json j;
    j["shape"] = d.shape;
    j["xmin"] = d.xmin;
    j["xmax"] = d.xmax;
    if (d.is_2d()) {
        j["ymin"] = d.ymin;
        j["ymax"] = d.ymax;
    }
    return j;
}

Json pde_json(const PdeSpec& p) {
    Json j;
    j["category"] = p.category;
    Json coeffs;
    for (const auto& [k, v] : p.coefficients) coeffs[k] = v;
    j["coefficients"] = std::move(coeffs);
    if (p.source) j["source"] = *p.source;
    return j;
}

Json bc_json(const BoundaryCondition& b) {
    Json j;
    j["btype"] = b.btype;
    j["location"] = b.location;
    j["value"] = b.value;
    return j;
}

Json ic_json(const InitialCondition& i) {
    Json j;
    j["value"] = i.value;
    if (i.velocity) j["velocity"] = *i.velocity;
    return j;
}

}  // namespace

std::string artifact_kind_name(ArtifactKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    throw Error(ErrorCode::invalid_input, "unrepresentable artifact kind");
}

ArtifactKind artifact_kind_from(const std::string& name) {
    for (const auto& [k, n] : kKindNames)
        if (name == n) return k;
    throw Error(ErrorCode::invalid_input, "unknown artifact kind '" + name + "'");
}

ArtifactKind kind_of(const ArtifactPayload& payload) {
    struct Visitor {
        ArtifactKind operator()(const Domain&) { return ArtifactKind::domain; }
        ArtifactKind operator()(const TimeDomain&) { return ArtifactKind::timedomain; }
        ArtifactKind operator()(const PdeSpec&) { return ArtifactKind::pde; }
        ArtifactKind operator()(const BoundaryCondition&) { return ArtifactKind::bc; }
        ArtifactKind operator()(const InitialCondition&) { return ArtifactKind::ic; }
        ArtifactKind operator()(const Problem&) { return ArtifactKind::problem; }
        ArtifactKind operator()(const SolverSettings&) { return ArtifactKind::solver; }
        ArtifactKind operator()(const Solution&) { return ArtifactKind::solution; }
        ArtifactKind operator()(const ValueList&) { return ArtifactKind::values; }
        ArtifactKind operator()(const RealValue&) { return ArtifactKind::real; }
        ArtifactKind operator()(const FileRef&) { return ArtifactKind::file; }
    };
    return std::visit(Visitor{}, payload);
}

Json payload_to_json(const ArtifactPayload& payload) {
    struct Visitor {
        Json operator()(const Domain& d) { return domain_json(d); }
        Json operator()(const TimeDomain& t) {
            Json j;
            j["t0"] = t.t0;
            j["t1"] = t.t1;
            return j;
        }
        Json operator()(const PdeSpec& p) { return pde_json(p); }
        Json operator()(const BoundaryCondition& b) { return bc_json(b); }
        Json operator()(const InitialCondition& i) { return ic_json(i); }
        Json operator()(const Problem& p) {
            Json j;
            j["domain"] = domain_json(p.domain);
            if (p.time) {
                Json t;
                t["t0"] = p.time->t0;
                t["t1"] = p.time->t1;
                j["time"] = std::move(t);
            }
            j["pde"] = pde_json(p.pde);
            Json bcs = Json::array();
            for (const auto& b : p.bcs) bcs.push_back(bc_json(b));
            j["bcs"] = std::move(bcs);
            if (p.ic) j["ic"] = ic_json(*p.ic);
            return j;
        }
        Json operator()(const SolverSettings& s) {
            Json j;
            j["nx"] = s.nx;
            if (s.ny) j["ny"] = *s.ny;
            if (s.nt) j["nt"] = *s.nt;
            j["scheme"] = s.scheme;
            return j;
        }
        Json operator()(const Solution& s) {
            Json j;
            j["category"] = s.category;
            j["nx"] = s.x.size();
            if (!s.y.empty()) j["ny"] = s.y.size();
            j["t_final"] = s.t_final;
            j["u"] = s.u;
            j["meta"] = s.meta;
            return j;
        }
        Json operator()(const ValueList& v) {
            Json j;
            j["values"] = v.values;
            return j;
        }
        Json operator()(const RealValue& r) {
            Json j;
            j["value"] = r.value;
            return j;
        }
        Json operator()(const FileRef& f) {
            Json j;
            j["path"] = f.path;
            j["bytes"] = f.bytes;
            return j;
        }
    };
    return std::visit(Visitor{}, payload);
}

ResourcePool::ResourcePool(std::string session_id) : session_id_(std::move(session_id)) {}

std::string ResourcePool::put(ArtifactPayload payload, const NodeId& producer, int seq) {
    ArtifactKind kind = kind_of(payload);
    std::string name = artifact_kind_name(kind);
    std::string handle = name + ":" + std::to_string(++counters_[name]);
    entries_.emplace(handle, PoolEntry{kind, std::move(payload), producer, seq, false});
    order_.push_back(handle);
    return handle;
}

const ArtifactPayload& ResourcePool::get(const std::string& handle) const {
    auto it = entries_.find(handle);
    if (it == entries_.end())
        throw Error(ErrorCode::dangling_handle, "unknown handle '" + handle + "'");
    if (it->second.evicted)
        throw Error(ErrorCode::dangling_handle, "handle '" + handle + "' was evicted (producer " +
                                                    it->second.producer + ")");
    return it->second.payload;
}

bool ResourcePool::live(const std::string& handle) const {
    auto it = entries_.find(handle);
    return it != entries_.end() && !it->second.evicted;
}

ArtifactKind ResourcePool::kind_of_handle(const std::string& handle) const {
    auto it = entries_.find(handle);
    if (it == entries_.end())
        throw Error(ErrorCode::dangling_handle, "unknown handle '" + handle + "'");
    return it->second.kind;
}

std::vector<std::string> ResourcePool::evict_descendants(const ToolGraph& graph,
                                                         const NodeId& node) {
    // Taint follows data-flow reachability: artifacts fed (transitively) by
    // the bad node's outputs, not everything that merely ran later.
    std::set<NodeId> tainted = graph.descendants(node, DepKind::data);
    tainted.insert(node);
    std::vector<std::string> evicted;
    for (const auto& handle : order_) {
        PoolEntry& entry = entries_.at(handle);
        if (entry.evicted || !tainted.count(entry.producer)) continue;
        entry.evicted = true;
        evicted.push_back(handle);
    }
    return evicted;
}

std::vector<std::string> ResourcePool::live_handles() const {
    std::vector<std::string> out;
    for (const auto& handle : order_)
        if (!entries_.at(handle).evicted) out.push_back(handle);
    return out;
}

std::size_t ResourcePool::live_count() const {
    std::size_t n = 0;
    for (const auto& [_, entry] : entries_)
        if (!entry.evicted) ++n;
    return n;
}

Json ResourcePool::snapshot() const {
    Json entries = Json::array();
    for (const auto& handle : order_) {
        const PoolEntry& entry = entries_.at(handle);
        Json e;
        e["handle"] = handle;
        e["kind"] = artifact_kind_name(entry.kind);
        e["producer"] = entry.producer;
        e["seq"] = entry.seq;
        e["evicted"] = entry.evicted;
        e["digest"] = hex64(fnv1a64(payload_to_json(entry.payload).dump()));
        entries.push_back(std::move(e));
    }
    Json j;
    j["session"] = session_id_;
    j["entries"] = std::move(entries);
    return j;
}

std::string ResourcePool::listing() const {
    std::string out;
    for (const auto& handle : order_) {
        const PoolEntry& entry = entries_.at(handle);
        if (entry.evicted) continue;
        out += handle + " (" + artifact_kind_name(entry.kind) + ") from " + entry.producer + "\n";
    }
    return out.empty() ? "(pool empty)\n" : out;
}

}  // namespace pdechain::pde
