#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fairpool/diagram.hpp"
#include "fairpool/error.hpp"

namespace fairpool {

inline constexpr double kProbabilityTolerance = 1e-9;

/// Ordered, non-empty set of value labels. Values are handled as indices into it.
using Domain = std::vector<std::string>;

/// Variable name -> value index.
using Assignment = std::map<std::string, std::size_t>;

/// Full assignment of the exogenous variables.
struct Context {
    Assignment values;
    friend auto operator<=>(const Context&, const Context&) = default;
};

/// do(X = x) for each listed endogenous variable.
struct Intervention {
    Assignment forced;
};

/// Lookup-table equation. `table` is indexed in mixed radix over the parent
/// domains, first parent most significant.
struct StructuralEquation {
    std::string target;
    std::vector<std::string> parents;
    std::vector<std::size_t> table;

    static StructuralEquation constant(std::string target, std::size_t value) {
        return {std::move(target), {}, {value}};
    }

    friend bool operator==(const StructuralEquation&, const StructuralEquation&) = default;
};

/// Tabulates `fn` over the Cartesian product of the parent domains.
inline StructuralEquation tabulate(std::string target, std::vector<std::string> parents,
                                   const std::map<std::string, Domain>& domains,
                                   const std::function<std::size_t(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> radix;
    std::size_t rows = 1;
    for (const auto& p : parents) {
        auto it = domains.find(p);
        if (it == domains.end()) throw ValidationError("no domain for parent '" + p + "'");
        radix.push_back(it->second.size());
        rows *= it->second.size();
    }
    std::vector<std::size_t> table(rows);
    std::vector<std::size_t> digits(parents.size(), 0);
    for (std::size_t row = 0; row < rows; ++row) {
        std::size_t rest = row;
        for (std::size_t k = parents.size(); k-- > 0;) {
            digits[k] = rest % radix[k];
            rest /= radix[k];
        }
        table[row] = fn(digits);
    }
    return {std::move(target), std::move(parents), std::move(table)};
}

/// A causal diagram with finite domains, one lookup-table equation per
/// endogenous variable and an independent distribution per exogenous variable.
/// Immutable after construction; the constructor validates every invariant.
class ScmModel {
public:
    ScmModel(CausalDiagram diagram, std::map<std::string, Domain> domains,
             std::map<std::string, StructuralEquation> equations,
             std::map<std::string, std::vector<double>> exogenous_distribution)
        : diagram_(std::move(diagram)),
          domains_(std::move(domains)),
          equations_(std::move(equations)),
          exogenous_(std::move(exogenous_distribution)) {
        validate();
        order_ = topological_order(diagram_);
    }

    const CausalDiagram& diagram() const { return diagram_; }
    const std::map<std::string, Domain>& domains() const { return domains_; }
    const std::map<std::string, StructuralEquation>& equations() const { return equations_; }
    const std::map<std::string, std::vector<double>>& exogenous_distribution() const { return exogenous_; }
    const std::vector<std::string>& order() const { return order_; }

    const Domain& domain(const std::string& v) const {
        auto it = domains_.find(v);
        if (it == domains_.end()) throw ValidationError("unknown variable '" + v + "'");
        return it->second;
    }

    const StructuralEquation& equation(const std::string& v) const {
        auto it = equations_.find(v);
        if (it == equations_.end()) throw ValidationError("no equation for '" + v + "'");
        return it->second;
    }

    std::size_t lookup(const StructuralEquation& eq, const Assignment& values) const {
        std::size_t row = 0;
        for (const auto& p : eq.parents) row = row * domains_.at(p).size() + values.at(p);
        return eq.table[row];
    }

private:
    void validate() const {
        std::vector<std::string> problems = validate_diagram(diagram_).violations;
        for (const auto& [v, kind] : diagram_.vertices()) {
            auto dom = domains_.find(v);
            if (dom == domains_.end() || dom->second.empty()) {
                problems.push_back("variable '" + v + "' has no domain");
                continue;
            }
            if (kind == VariableKind::exogenous) {
                auto dist = exogenous_.find(v);
                if (dist == exogenous_.end()) {
                    problems.push_back("exogenous '" + v + "' has no distribution");
                    continue;
                }
                if (dist->second.size() != dom->second.size()) {
                    problems.push_back("distribution of '" + v + "' does not match its domain size");
                    continue;
                }
                double total = 0.0;
                for (double p : dist->second) {
                    if (!(p >= 0.0)) problems.push_back("distribution of '" + v + "' has a negative entry");
                    total += p;
                }
                if (std::abs(total - 1.0) > kProbabilityTolerance)
                    problems.push_back("distribution of '" + v + "' sums to " + std::to_string(total));
                if (equations_.count(v)) problems.push_back("exogenous '" + v + "' must not have an equation");
                continue;
            }
            auto eq = equations_.find(v);
            if (eq == equations_.end()) {
                problems.push_back("endogenous '" + v + "' has no equation");
                continue;
            }
            if (eq->second.target != v) problems.push_back("equation for '" + v + "' names another target");
            auto sorted_parents = eq->second.parents;
            std::sort(sorted_parents.begin(), sorted_parents.end());
            if (sorted_parents != diagram_.parents(v)) {
                problems.push_back("equation parents of '" + v + "' do not match its incoming edges");
                continue;
            }
            std::size_t rows = 1;
            bool parent_domains = true;
            for (const auto& p : eq->second.parents) {
                auto pd = domains_.find(p);
                if (pd == domains_.end() || pd->second.empty()) {
                    parent_domains = false;
                    break;
                }
                rows *= pd->second.size();
            }
            if (!parent_domains) continue;
            if (eq->second.table.size() != rows) {
                problems.push_back("equation table of '" + v + "' is not total over its parent domains");
                continue;
            }
            for (auto out : eq->second.table)
                if (out >= dom->second.size()) {
                    problems.push_back("equation of '" + v + "' produces a value outside its domain");
                    break;
                }
        }
        for (const auto& [v, _] : equations_)
            if (!diagram_.has_vertex(v)) problems.push_back("equation for unknown variable '" + v + "'");
        for (const auto& [v, _] : exogenous_)
            if (!diagram_.has_vertex(v) || diagram_.kind(v) != VariableKind::exogenous)
                problems.push_back("distribution given for non-exogenous '" + v + "'");
        if (!problems.empty()) throw ValidationError(std::move(problems));
    }

    CausalDiagram diagram_;
    std::map<std::string, Domain> domains_;
    std::map<std::string, StructuralEquation> equations_;
    std::map<std::string, std::vector<double>> exogenous_;
    std::vector<std::string> order_;
};

inline void check_context(const ScmModel& m, const Context& u) {
    for (const auto& v : m.diagram().exogenous()) {
        auto it = u.values.find(v);
        if (it == u.values.end()) throw ValidationError("context misses exogenous '" + v + "'");
        if (it->second >= m.domain(v).size()) throw ValidationError("context value out of domain for '" + v + "'");
    }
}

/// Propagates the context through the equations in topological order.
/// Returns values for the endogenous variables only.
inline Assignment evaluate(const ScmModel& m, const Context& u) {
    check_context(m, u);
    Assignment all = u.values;
    Assignment out;
    for (const auto& v : m.order()) {
        if (m.diagram().kind(v) == VariableKind::exogenous) continue;
        auto value = m.lookup(m.equation(v), all);
        all[v] = value;
        out[v] = value;
    }
    return out;
}

inline double context_probability(const ScmModel& m, const Context& u) {
    double p = 1.0;
    for (const auto& [v, dist] : m.exogenous_distribution()) p *= dist[u.values.at(v)];
    return p;
}

/// Visits every context in mixed-radix order over the exogenous variables sorted by name.
inline void for_each_context(const ScmModel& m, const std::function<void(const Context&, double)>& visit) {
    std::vector<std::string> roots;
    for (const auto& v : m.diagram().exogenous()) roots.push_back(v);
    Context u;
    for (const auto& r : roots) u.values[r] = 0;
    while (true) {
        visit(u, context_probability(m, u));
        std::size_t k = roots.size();
        while (k > 0) {
            --k;
            auto& digit = u.values[roots[k]];
            if (++digit < m.domain(roots[k]).size()) break;
            digit = 0;
            if (k == 0) return;
        }
        if (roots.empty()) return;
    }
}

/// Replaces each targeted equation by a constant and cuts its incoming edges.
inline ScmModel intervene(const ScmModel& m, const Intervention& i) {
    CausalDiagram diagram = m.diagram();
    auto equations = m.equations();
    for (const auto& [v, value] : i.forced) {
        if (!diagram.has_vertex(v)) throw ValidationError("intervention on unknown variable '" + v + "'");
        if (diagram.kind(v) != VariableKind::endogenous)
            throw ValidationError("intervention on exogenous variable '" + v + "'");
        if (value >= m.domain(v).size()) throw ValidationError("intervention value out of domain for '" + v + "'");
        for (const auto& p : diagram.parents(v)) diagram.remove_edge({p, v});
        equations[v] = StructuralEquation::constant(v, value);
    }
    return ScmModel(std::move(diagram), m.domains(), std::move(equations), m.exogenous_distribution());
}

/// Joint distribution over a set of endogenous variables. Keys are value-index
/// tuples ordered like `variables` (sorted by name).
struct ProbabilityTable {
    std::vector<std::string> variables;
    std::map<std::vector<std::size_t>, double> probabilities;

    double total() const {
        double t = 0.0;
        for (const auto& [_, p] : probabilities) t += p;
        return t;
    }

    double at(const std::vector<std::size_t>& key) const {
        auto it = probabilities.find(key);
        return it == probabilities.end() ? 0.0 : it->second;
    }

    ProbabilityTable marginal(const VertexSet& keep) const {
        ProbabilityTable out;
        std::vector<std::size_t> positions;
        for (std::size_t k = 0; k < variables.size(); ++k)
            if (keep.count(variables[k])) {
                out.variables.push_back(variables[k]);
                positions.push_back(k);
            }
        for (const auto& [key, p] : probabilities) {
            std::vector<std::size_t> sub;
            for (auto k : positions) sub.push_back(key[k]);
            out.probabilities[sub] += p;
        }
        return out;
    }
};

/// Exact enumeration of P(targets) over all contexts.
inline ProbabilityTable observational_distribution(const ScmModel& m, const VertexSet& targets) {
    for (const auto& t : targets) {
        if (!m.diagram().has_vertex(t) || m.diagram().kind(t) != VariableKind::endogenous)
            throw ValidationError("'" + t + "' is not an endogenous variable");
    }
    ProbabilityTable table;
    table.variables.assign(targets.begin(), targets.end());
    for_each_context(m, [&](const Context& u, double p) {
        auto values = evaluate(m, u);
        std::vector<std::size_t> key;
        for (const auto& t : table.variables) key.push_back(values.at(t));
        table.probabilities[key] += p;
    });
    return table;
}

}  // namespace fairpool
