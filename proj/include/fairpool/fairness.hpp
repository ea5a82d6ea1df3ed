#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairpool/diagram.hpp"
#include "fairpool/scm.hpp"

namespace fairpool {

/// Split of the endogenous variables into the predictor, protected attributes
/// and features. Features are everything else.
struct FairnessPartition {
    std::string predictor;
    VertexSet protected_attributes;
    VertexSet features;

    static FairnessPartition over(const VertexSet& endogenous, std::string predictor, VertexSet protected_attrs) {
        std::vector<std::string> problems;
        if (!endogenous.count(predictor)) problems.push_back("predictor '" + predictor + "' is not an endogenous variable");
        if (protected_attrs.empty()) problems.push_back("protected set must be non-empty");
        for (const auto& a : protected_attrs) {
            if (a == predictor) problems.push_back("predictor '" + a + "' cannot be protected");
            else if (!endogenous.count(a)) problems.push_back("protected '" + a + "' is not an endogenous variable");
        }
        if (!problems.empty()) throw ValidationError(std::move(problems));
        FairnessPartition p{std::move(predictor), std::move(protected_attrs), {}};
        for (const auto& v : endogenous)
            if (v != p.predictor && !p.protected_attributes.count(v)) p.features.insert(v);
        return p;
    }

    VertexSet all() const {
        VertexSet out = protected_attributes;
        out.insert(features.begin(), features.end());
        out.insert(predictor);
        return out;
    }
};

/// One observed (a, x) and alternative a' for which the predictor's
/// counterfactual distribution moves.
struct FairnessWitness {
    Context context;
    Assignment observed_protected;
    Assignment observed_features;
    Assignment counterfactual_protected;
    std::size_t predictor_value = 0;
    double factual_probability = 0.0;
    double counterfactual_probability = 0.0;
};

struct FairnessVerdict {
    bool fair = true;
    std::vector<FairnessWitness> witnesses;
};

namespace detail {

/// Every joint assignment of `vars` in mixed-radix order.
inline std::vector<Assignment> joint_assignments(const ScmModel& m, const VertexSet& vars) {
    std::vector<Assignment> out{Assignment{}};
    for (const auto& v : vars) {
        std::vector<Assignment> next;
        for (const auto& partial : out)
            for (std::size_t k = 0; k < m.domain(v).size(); ++k) {
                auto a = partial;
                a[v] = k;
                next.push_back(std::move(a));
            }
        out = std::move(next);
    }
    return out;
}

inline Assignment restrict_to(const Assignment& values, const VertexSet& vars) {
    Assignment out;
    for (const auto& v : vars) out[v] = values.at(v);
    return out;
}

inline void check_partition(const ScmModel& m, const FairnessPartition& p) {
    if (p.all() != m.diagram().endogenous())
        throw ValidationError("partition does not cover exactly the model's endogenous variables");
}

}  // namespace detail

/// P(context | evidence) by enumeration. Empty when the evidence has probability zero.
inline std::vector<std::pair<Context, double>> context_posterior(const ScmModel& m, const Assignment& evidence) {
    std::vector<std::pair<Context, double>> out;
    double total = 0.0;
    for_each_context(m, [&](const Context& u, double p) {
        if (p <= 0.0) return;
        auto values = evaluate(m, u);
        for (const auto& [v, x] : evidence)
            if (values.at(v) != x) return;
        out.emplace_back(u, p);
        total += p;
    });
    if (total <= 0.0) return {};
    for (auto& [_, p] : out) p /= total;
    return out;
}

/// Counterfactual fairness decided by exhaustive enumeration: for every
/// evidence (A=a, X=x) of positive probability and every a', the predictor's
/// distribution under do(A=a) and do(A=a'), with contexts weighted by the
/// evidence posterior, must agree within kProbabilityTolerance.
inline FairnessVerdict check_fair_bruteforce(const ScmModel& m, const FairnessPartition& p) {
    detail::check_partition(m, p);

    struct Row {
        Context context;
        double probability;
        Assignment values;
    };
    std::vector<Row> rows;
    for_each_context(m, [&](const Context& u, double prob) { rows.push_back({u, prob, evaluate(m, u)}); });

    const auto alternatives = detail::joint_assignments(m, p.protected_attributes);
    const auto& predictor_domain = m.domain(p.predictor);

    // counterfactual[k][r]: predictor value in context r under do(A = alternatives[k])
    std::vector<std::vector<std::size_t>> counterfactual;
    for (const auto& alt : alternatives) {
        auto model = intervene(m, Intervention{alt});
        std::vector<std::size_t> ys;
        ys.reserve(rows.size());
        for (const auto& row : rows) ys.push_back(evaluate(model, row.context).at(p.predictor));
        counterfactual.push_back(std::move(ys));
    }

    std::map<std::pair<Assignment, Assignment>, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].probability <= 0.0) continue;
        groups[{detail::restrict_to(rows[r].values, p.protected_attributes),
                detail::restrict_to(rows[r].values, p.features)}]
            .push_back(r);
    }

    FairnessVerdict verdict;
    for (const auto& [evidence, members] : groups) {
        const auto& [observed_a, observed_x] = evidence;
        double mass = 0.0;
        for (auto r : members) mass += rows[r].probability;
        if (mass <= 0.0) continue;

        auto distribution = [&](std::size_t alt) {
            std::vector<double> dist(predictor_domain.size(), 0.0);
            for (auto r : members) dist[counterfactual[alt][r]] += rows[r].probability / mass;
            return dist;
        };

        std::size_t factual_alt = 0;
        while (alternatives[factual_alt] != observed_a) ++factual_alt;
        const auto factual = distribution(factual_alt);

        for (std::size_t alt = 0; alt < alternatives.size(); ++alt) {
            if (alt == factual_alt) continue;
            const auto moved = distribution(alt);
            for (std::size_t y = 0; y < factual.size(); ++y) {
                if (std::abs(factual[y] - moved[y]) <= kProbabilityTolerance) continue;
                std::size_t witness_row = members.front();
                for (auto r : members)
                    if (counterfactual[alt][r] != counterfactual[factual_alt][r]) {
                        witness_row = r;
                        break;
                    }
                verdict.witnesses.push_back({rows[witness_row].context, observed_a, observed_x, alternatives[alt], y,
                                             factual[y], moved[y]});
                break;
            }
        }
    }
    verdict.fair = verdict.witnesses.empty();
    return verdict;
}

struct StructuralFairness {
    bool fair = true;
    /// Predictor inputs that are protected or descend from a protected attribute.
    VertexSet offenders;
};

/// Sufficient condition: the predictor reads nothing in A or its descendants.
inline StructuralFairness check_fair_structural(const CausalDiagram& d, const FairnessPartition& p) {
    if (!d.has_vertex(p.predictor)) throw ValidationError("unknown vertex '" + p.predictor + "'");
    if (!is_acyclic(d)) throw ValidationError("diagram is cyclic");
    VertexSet tainted = descendants(d, p.protected_attributes);
    tainted.insert(p.protected_attributes.begin(), p.protected_attributes.end());
    StructuralFairness result;
    for (const auto& parent : d.parents(p.predictor))
        if (tainted.count(parent)) result.offenders.insert(parent);
    result.fair = result.offenders.empty();
    return result;
}

}  // namespace fairpool
