#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "fairpool/diagram.hpp"
#include "fairpool/fairness.hpp"
#include "fairpool/judgment.hpp"

namespace fairpool {

enum class Algorithm { removal_pooling, pooling_removal };

inline const char* to_string(Algorithm a) {
    return a == Algorithm::removal_pooling ? "removal-pooling" : "pooling-removal";
}

/// Structural fairness evidence for a pooled result. The pooled diagram no
/// longer contains the protected attributes, so the check runs on reference
/// diagrams that still do: each expert's diagram (removal-pooling) or the
/// pooled diagram before removal (pooling-removal), with the predictor's
/// inputs replaced by the pooled ones.
struct FairnessCertificate {
    bool holds = true;
    VertexSet offenders;
    std::vector<CausalDiagram> reference_diagrams;
};

struct PoolingReport {
    Algorithm algorithm = Algorithm::removal_pooling;
    std::string predictor;
    VertexSet protected_attributes;
    CausalDiagram pooled_before_removal;
    CausalDiagram pooled_diagram;
    VertexSet predictor_inputs;
    VertexSet removed_vertices;
    /// Per expert: protected attributes and their descendants in that expert's diagram.
    std::vector<VertexSet> expert_removed;
    std::vector<AuditRecord> audit_trail;
    std::size_t depth_bound = 0;
    FairnessCertificate fairness_certificate;

    bool empty() const { return pooled_diagram.edges().empty(); }
};

/// (A ∪ de(A)) minus the predictor, in one diagram.
inline VertexSet protected_closure(const CausalDiagram& d, const VertexSet& protected_attrs,
                                   const std::string& predictor) {
    VertexSet present;
    for (const auto& a : protected_attrs)
        if (d.has_vertex(a)) present.insert(a);
    VertexSet out = descendants(d, present);
    out.insert(present.begin(), present.end());
    out.erase(predictor);
    return out;
}

/// An expert's diagram with its own protected closure removed.
inline CausalDiagram fair_submodel(const CausalDiagram& d, const FairnessPartition& p) {
    return without_vertices(d, protected_closure(d, p.protected_attributes, p.predictor));
}

/// Makes the predictor a sink whose parents are exactly `inputs`.
inline CausalDiagram with_predictor_inputs(CausalDiagram d, const std::string& predictor, const VertexSet& inputs) {
    std::vector<Edge> incident;
    for (const auto& e : d.edges())
        if (e.source == predictor || e.target == predictor) incident.push_back(e);
    for (const auto& e : incident) d.remove_edge(e);
    for (const auto& v : inputs) d.add_edge(v, predictor);
    return d;
}

namespace detail {

struct PreparedInput {
    std::vector<CausalDiagram> experts;
    FairnessPartition partition;
};

inline PreparedInput prepare(const std::vector<CausalDiagram>& experts, const std::string& predictor,
                             const VertexSet& protected_attrs) {
    if (experts.empty()) throw ValidationError("at least one expert is required");
    PreparedInput in;
    for (std::size_t j = 0; j < experts.size(); ++j) {
        auto check = validate_diagram(experts[j]);
        if (!check.ok()) {
            std::vector<std::string> problems;
            for (const auto& v : check.violations) problems.push_back("expert " + std::to_string(j + 1) + ": " + v);
            throw ValidationError(std::move(problems));
        }
        in.experts.push_back(experts[j].endogenous_part());
    }
    for (std::size_t j = 1; j < in.experts.size(); ++j)
        if (in.experts[j].vertex_names() != in.experts.front().vertex_names())
            throw ValidationError("vertex-set mismatch between expert 1 and expert " + std::to_string(j + 1));
    in.partition = FairnessPartition::over(in.experts.front().endogenous(), predictor, protected_attrs);
    return in;
}

inline EdgePooling pool(const std::vector<CausalDiagram>& experts, const std::string& predictor,
                        const AggregationRule& rule, const TieBreak& tie_break, std::size_t& depth_bound) {
    depth_bound = 0;
    for (const auto& d : experts) depth_bound = std::max(depth_bound, longest_path_length(d));
    std::vector<EdgeLayering> layerings;
    for (const auto& d : experts) layerings.push_back(layer_edges(d, predictor, depth_bound));
    return pool_edges(experts, layerings, rule, tie_break);
}

inline void certify(PoolingReport& report, const FairnessPartition& p) {
    auto& cert = report.fairness_certificate;
    cert.holds = is_acyclic(report.pooled_diagram);
    VertexSet tainted = protected_closure(report.pooled_diagram, p.protected_attributes, p.predictor);
    for (const auto& v : report.predictor_inputs)
        if (tainted.count(v) || p.protected_attributes.count(v)) cert.offenders.insert(v);
    for (const auto& world : cert.reference_diagrams) {
        auto verdict = check_fair_structural(world, p);
        cert.offenders.insert(verdict.offenders.begin(), verdict.offenders.end());
    }
    cert.holds = cert.holds && cert.offenders.empty();
}

inline PoolingReport start_report(Algorithm algorithm, const FairnessPartition& p, std::size_t experts) {
    PoolingReport r;
    r.algorithm = algorithm;
    r.predictor = p.predictor;
    r.protected_attributes = p.protected_attributes;
    r.expert_removed.resize(experts);
    return r;
}

}  // namespace detail

/// Removal first: drops every vertex that any expert places in the protected
/// closure, then pools the reduced diagrams.
inline PoolingReport removal_pooling(const std::vector<CausalDiagram>& experts, const std::string& predictor,
                                     const VertexSet& protected_attrs, const AggregationRule& rule,
                                     const TieBreak& tie_break = TieBreak::alphabetical()) {
    auto in = detail::prepare(experts, predictor, protected_attrs);
    auto report = detail::start_report(Algorithm::removal_pooling, in.partition, in.experts.size());

    for (std::size_t j = 0; j < in.experts.size(); ++j) {
        report.expert_removed[j] = protected_closure(in.experts[j], protected_attrs, predictor);
        report.removed_vertices.insert(report.expert_removed[j].begin(), report.expert_removed[j].end());
    }
    std::vector<CausalDiagram> reduced;
    for (const auto& d : in.experts) reduced.push_back(without_vertices(d, report.removed_vertices));

    auto pooled = detail::pool(reduced, predictor, rule, tie_break, report.depth_bound);
    CausalDiagram out;
    for (const auto& v : reduced.front().vertex_names()) out.add_vertex(v);
    for (const auto& e : pooled.pooled) out.add_edge(e);

    report.pooled_before_removal = out;
    report.pooled_diagram = std::move(out);
    report.audit_trail = std::move(pooled.audit);
    auto parents = report.pooled_diagram.parents(predictor);
    report.predictor_inputs = VertexSet(parents.begin(), parents.end());
    for (const auto& d : in.experts)
        report.fairness_certificate.reference_diagrams.push_back(
            with_predictor_inputs(d, predictor, report.predictor_inputs));
    detail::certify(report, in.partition);
    return report;
}

/// Pooling first over the full diagrams, then removal of the protected
/// closure computed in the pooled diagram.
inline PoolingReport pooling_removal(const std::vector<CausalDiagram>& experts, const std::string& predictor,
                                     const VertexSet& protected_attrs, const AggregationRule& rule,
                                     const TieBreak& tie_break = TieBreak::alphabetical()) {
    auto in = detail::prepare(experts, predictor, protected_attrs);
    auto report = detail::start_report(Algorithm::pooling_removal, in.partition, in.experts.size());
    for (std::size_t j = 0; j < in.experts.size(); ++j)
        report.expert_removed[j] = protected_closure(in.experts[j], protected_attrs, predictor);

    auto pooled = detail::pool(in.experts, predictor, rule, tie_break, report.depth_bound);
    CausalDiagram full;
    for (const auto& v : in.experts.front().vertex_names()) full.add_vertex(v);
    for (const auto& e : pooled.pooled) full.add_edge(e);

    report.removed_vertices = protected_closure(full, protected_attrs, predictor);
    report.pooled_diagram = without_vertices(full, report.removed_vertices);
    report.pooled_before_removal = std::move(full);
    report.audit_trail = std::move(pooled.audit);
    auto parents = report.pooled_diagram.parents(predictor);
    report.predictor_inputs = VertexSet(parents.begin(), parents.end());
    report.fairness_certificate.reference_diagrams.push_back(
        with_predictor_inputs(report.pooled_before_removal, predictor, report.predictor_inputs));
    detail::certify(report, in.partition);
    return report;
}

inline PoolingReport run_pooling(Algorithm algorithm, const std::vector<CausalDiagram>& experts,
                                 const std::string& predictor, const VertexSet& protected_attrs,
                                 const AggregationRule& rule, const TieBreak& tie_break) {
    return algorithm == Algorithm::removal_pooling
               ? removal_pooling(experts, predictor, protected_attrs, rule, tie_break)
               : pooling_removal(experts, predictor, protected_attrs, rule, tie_break);
}

struct AlgorithmComparison {
    PoolingReport removal_pooling;
    PoolingReport pooling_removal;
};

inline AlgorithmComparison compare_algorithms(const std::vector<CausalDiagram>& experts,
                                              const std::string& predictor, const VertexSet& protected_attrs,
                                              const AggregationRule& rule,
                                              const TieBreak& tie_break = TieBreak::alphabetical()) {
    return {removal_pooling(experts, predictor, protected_attrs, rule, tie_break),
            pooling_removal(experts, predictor, protected_attrs, rule, tie_break)};
}

}  // namespace fairpool
