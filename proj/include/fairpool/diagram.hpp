#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "fairpool/error.hpp"

namespace fairpool {

enum class VariableKind { exogenous, endogenous };

inline const char* to_string(VariableKind kind) {
    return kind == VariableKind::exogenous ? "exogenous" : "endogenous";
}

/// Directed edge `source -> target`. Ordered lexicographically by (source, target),
/// which is the tie-break order used throughout the library.
struct Edge {
    std::string source;
    std::string target;

    friend auto operator<=>(const Edge&, const Edge&) = default;
    friend bool operator==(const Edge&, const Edge&) = default;
};

inline std::string to_string(const Edge& e) { return e.source + "->" + e.target; }

using VertexSet = std::set<std::string>;
using EdgeSet = std::set<Edge>;

/// Named vertices plus a directed edge set. Construction is permissive; use
/// validate_diagram() to check the structural invariants.
class CausalDiagram {
public:
    CausalDiagram() = default;

    /// Returns false if the vertex already exists with the same kind.
    bool add_vertex(const std::string& name, VariableKind kind = VariableKind::endogenous) {
        if (name.empty()) throw ValidationError("vertex name must be non-empty");
        auto [it, inserted] = vertices_.emplace(name, kind);
        if (!inserted && it->second != kind)
            throw ValidationError("vertex '" + name + "' declared both exogenous and endogenous");
        return inserted;
    }

    /// Returns false for a duplicate edge.
    bool add_edge(const Edge& e) { return edges_.insert(e).second; }
    bool add_edge(const std::string& source, const std::string& target) {
        return add_edge(Edge{source, target});
    }

    bool remove_edge(const Edge& e) { return edges_.erase(e) > 0; }

    /// Removes the vertex together with every incident edge.
    void remove_vertex(const std::string& name) {
        vertices_.erase(name);
        std::erase_if(edges_, [&](const Edge& e) { return e.source == name || e.target == name; });
    }

    bool has_vertex(const std::string& name) const { return vertices_.count(name) > 0; }
    bool has_edge(const Edge& e) const { return edges_.count(e) > 0; }

    VariableKind kind(const std::string& name) const {
        auto it = vertices_.find(name);
        if (it == vertices_.end()) throw ValidationError("unknown vertex '" + name + "'");
        return it->second;
    }

    const std::map<std::string, VariableKind>& vertices() const { return vertices_; }
    const EdgeSet& edges() const { return edges_; }

    VertexSet vertex_names() const {
        VertexSet out;
        for (const auto& [name, kind] : vertices_) out.insert(name);
        return out;
    }

    VertexSet vertices_of_kind(VariableKind k) const {
        VertexSet out;
        for (const auto& [name, kind] : vertices_)
            if (kind == k) out.insert(name);
        return out;
    }
    VertexSet endogenous() const { return vertices_of_kind(VariableKind::endogenous); }
    VertexSet exogenous() const { return vertices_of_kind(VariableKind::exogenous); }

    /// Sorted by name.
    std::vector<std::string> parents(const std::string& v) const {
        std::vector<std::string> out;
        for (const auto& e : edges_)
            if (e.target == v) out.push_back(e.source);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::string> children(const std::string& v) const {
        std::vector<std::string> out;
        for (const auto& e : edges_)
            if (e.source == v) out.push_back(e.target);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Copy restricted to endogenous vertices and the edges among them.
    CausalDiagram endogenous_part() const {
        CausalDiagram out;
        for (const auto& [name, kind] : vertices_)
            if (kind == VariableKind::endogenous) out.add_vertex(name, kind);
        for (const auto& e : edges_)
            if (out.has_vertex(e.source) && out.has_vertex(e.target)) out.add_edge(e);
        return out;
    }

    friend bool operator==(const CausalDiagram&, const CausalDiagram&) = default;

private:
    std::map<std::string, VariableKind> vertices_;
    EdgeSet edges_;
};

namespace detail {

inline std::map<std::string, std::vector<std::string>> adjacency(const CausalDiagram& d) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [name, kind] : d.vertices()) adj[name];
    for (const auto& e : d.edges()) adj[e.source].push_back(e.target);
    return adj;
}

}  // namespace detail

/// Returns one directed cycle (vertex sequence, rotated to start at its
/// lexicographically smallest vertex), or nullopt if the diagram is acyclic.
inline std::optional<std::vector<std::string>> find_cycle(const CausalDiagram& d) {
    auto adj = detail::adjacency(d);
    enum class Mark { white, grey, black };
    std::map<std::string, Mark> mark;
    for (const auto& [v, _] : adj) mark[v] = Mark::white;

    std::vector<std::string> stack;
    std::optional<std::vector<std::string>> found;

    std::function<bool(const std::string&)> visit = [&](const std::string& v) {
        mark[v] = Mark::grey;
        stack.push_back(v);
        for (const auto& w : adj[v]) {
            if (mark[w] == Mark::grey) {
                auto start = std::find(stack.begin(), stack.end(), w);
                std::vector<std::string> cycle(start, stack.end());
                std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
                found = std::move(cycle);
                return true;
            }
            if (mark[w] == Mark::white && visit(w)) return true;
        }
        stack.pop_back();
        mark[v] = Mark::black;
        return false;
    };

    for (const auto& [v, _] : adj)
        if (mark[v] == Mark::white && visit(v)) break;
    return found;
}

inline bool is_acyclic(const CausalDiagram& d) { return !find_cycle(d).has_value(); }

struct DiagramValidation {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks the diagram invariants: known endpoints, no self-loops, no edges into
/// exogenous vertices, acyclicity. Violations are reported, never thrown.
inline DiagramValidation validate_diagram(const CausalDiagram& d) {
    DiagramValidation result;
    bool endpoints_known = true;
    for (const auto& e : d.edges()) {
        for (const auto* end : {&e.source, &e.target}) {
            if (!d.has_vertex(*end)) {
                result.violations.push_back("edge " + to_string(e) + " references unknown vertex '" +
                                            *end + "'");
                endpoints_known = false;
            }
        }
        if (e.source == e.target) result.violations.push_back("self-loop: " + e.source);
        if (d.has_vertex(e.target) && d.kind(e.target) == VariableKind::exogenous)
            result.violations.push_back("exogenous vertex '" + e.target + "' has incoming edge " +
                                        to_string(e));
    }
    if (endpoints_known) {
        if (auto cycle = find_cycle(d)) {
            std::string msg = "cycle: ";
            for (std::size_t i = 0; i < cycle->size(); ++i) msg += (i ? "," : "") + (*cycle)[i];
            result.violations.push_back(msg);
        }
    }
    return result;
}

/// Kahn's algorithm, always releasing the lexicographically smallest ready vertex.
inline std::vector<std::string> topological_order(const CausalDiagram& d) {
    std::map<std::string, int> indegree;
    for (const auto& [v, _] : d.vertices()) indegree[v] = 0;
    for (const auto& e : d.edges()) ++indegree[e.target];
    auto adj = detail::adjacency(d);

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [v, deg] : indegree)
        if (deg == 0) ready.push(v);

    std::vector<std::string> order;
    while (!ready.empty()) {
        auto v = ready.top();
        ready.pop();
        order.push_back(v);
        for (const auto& w : adj[v])
            if (--indegree[w] == 0) ready.push(w);
    }
    if (order.size() != indegree.size()) throw ValidationError("diagram is cyclic");
    return order;
}

/// Every vertex reachable from some root by one or more directed edges. A root
/// is included only if another root (or itself, impossible when acyclic) reaches it.
inline VertexSet descendants(const CausalDiagram& d, const VertexSet& roots) {
    for (const auto& r : roots)
        if (!d.has_vertex(r)) throw ValidationError("unknown vertex '" + r + "'");
    auto adj = detail::adjacency(d);
    VertexSet seen;
    std::vector<std::string> frontier(roots.begin(), roots.end());
    while (!frontier.empty()) {
        auto v = frontier.back();
        frontier.pop_back();
        for (const auto& w : adj[v])
            if (seen.insert(w).second) frontier.push_back(w);
    }
    return seen;
}

/// True if `to` is reachable from `from` (a vertex reaches itself).
inline bool reaches(const CausalDiagram& d, const std::string& from, const std::string& to) {
    if (from == to) return true;
    return descendants(d, {from}).count(to) > 0;
}

/// Number of edges on the longest directed path.
inline std::size_t longest_path_length(const CausalDiagram& d) {
    std::map<std::string, std::size_t> depth;
    std::size_t best = 0;
    for (const auto& v : topological_order(d)) {
        for (const auto& w : d.children(v)) {
            depth[w] = std::max(depth[w], depth[v] + 1);
            best = std::max(best, depth[w]);
        }
    }
    return best;
}

/// Copy with the given vertices and all their incident edges deleted.
inline CausalDiagram without_vertices(CausalDiagram d, const VertexSet& removed) {
    for (const auto& v : removed) d.remove_vertex(v);
    return d;
}

}  // namespace fairpool
