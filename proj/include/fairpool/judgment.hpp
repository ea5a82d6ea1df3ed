#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairpool/diagram.hpp"
#include "fairpool/error.hpp"
#include "fairpool/random.hpp"

namespace fairpool {

/// Presence votes of N experts on one edge.
struct EdgeJudgmentProfile {
    Edge edge;
    std::vector<bool> votes;

    std::size_t yes() const { return static_cast<std::size_t>(std::count(votes.begin(), votes.end(), true)); }
};

enum class RuleKind { strict_majority, quota, unanimity, weighted_majority, dictator };

struct AggregationRule {
    RuleKind kind = RuleKind::strict_majority;
    double threshold = 0.5;       // quota only, in (0, 1]
    std::vector<double> weights;  // weighted_majority only
    std::size_t dictator = 0;     // dictator only: copied expert

    static AggregationRule strict_majority() { return {}; }
    static AggregationRule unanimity() { return with_kind(RuleKind::unanimity); }
    static AggregationRule quota(double t) {
        auto r = with_kind(RuleKind::quota);
        r.threshold = t;
        return r;
    }
    static AggregationRule weighted_majority(std::vector<double> w) {
        auto r = with_kind(RuleKind::weighted_majority);
        r.weights = std::move(w);
        return r;
    }
    static AggregationRule copy_expert(std::size_t i) {
        auto r = with_kind(RuleKind::dictator);
        r.dictator = i;
        return r;
    }

    std::string name() const {
        switch (kind) {
            case RuleKind::strict_majority: return "strict-majority";
            case RuleKind::quota: return "quota";
            case RuleKind::unanimity: return "unanimity";
            case RuleKind::weighted_majority: return "weighted-majority";
            case RuleKind::dictator: return "dictator";
        }
        return "?";
    }

    static AggregationRule with_kind(RuleKind k) {
        AggregationRule r;
        r.kind = k;
        return r;
    }

    /// Throws ValidationError when the parameters are unusable with `n` experts.
    void validate(std::size_t n) const {
        if (n == 0) throw ValidationError("at least one expert is required");
        if (kind == RuleKind::quota && !(threshold > 0.0 && threshold <= 1.0))
            throw ValidationError("quota threshold must lie in (0, 1]");
        if (kind == RuleKind::weighted_majority) {
            if (weights.size() != n)
                throw ValidationError("expected " + std::to_string(n) + " weights, got " +
                                      std::to_string(weights.size()));
            double total = 0.0;
            for (double w : weights) {
                if (!(w >= 0.0)) throw ValidationError("weights must be non-negative");
                total += w;
            }
            if (std::abs(total - 1.0) > 1e-9) throw ValidationError("weights must sum to 1");
        }
        if (kind == RuleKind::dictator && dictator >= n) throw ValidationError("dictator index out of range");
    }
};

/// Pooled judgment J*(e) = F(J_1(e), ..., J_N(e)).
inline bool apply_rule(const AggregationRule& rule, const EdgeJudgmentProfile& profile, std::size_t experts) {
    if (profile.votes.size() != experts)
        throw ValidationError("edge " + to_string(profile.edge) + " has " + std::to_string(profile.votes.size()) +
                              " votes, expected " + std::to_string(experts));
    rule.validate(experts);
    const auto n = static_cast<double>(experts);
    const auto yes = profile.yes();
    switch (rule.kind) {
        case RuleKind::strict_majority: return 2 * yes > experts;
        case RuleKind::quota: {
            // ceil(t * N), guarded against 0.3 * 10 = 3.0000000000000004
            const auto needed = static_cast<std::size_t>(std::ceil(rule.threshold * n - 1e-9));
            return yes >= needed;
        }
        case RuleKind::unanimity: return yes == experts;
        case RuleKind::weighted_majority: {
            double support = 0.0;
            for (std::size_t i = 0; i < experts; ++i)
                if (profile.votes[i]) support += rule.weights[i];
            return support > 0.5;
        }
        case RuleKind::dictator: return profile.votes[rule.dictator];
    }
    return false;
}

inline bool apply_rule(const AggregationRule& rule, const EdgeJudgmentProfile& profile) {
    return apply_rule(rule, profile, profile.votes.size());
}

/// Edges of one expert grouped by incidence distance from the predictor.
/// layers[d-1] holds depth d; reached[d] is the vertex set seen after depth d.
struct EdgeLayering {
    std::string predictor;
    std::vector<EdgeSet> layers;
    std::vector<VertexSet> reached;
    EdgeSet unlayered;

    std::optional<std::size_t> depth_of(const Edge& e) const {
        for (std::size_t d = 0; d < layers.size(); ++d)
            if (layers[d].count(e)) return d + 1;
        return std::nullopt;
    }
};

/// Layer d takes every not-yet-layered edge with either endpoint already reached.
/// Edges still unlayered after `max_depth` layers are reported separately.
inline EdgeLayering layer_edges(const CausalDiagram& d, const std::string& predictor, std::size_t max_depth) {
    if (!d.has_vertex(predictor)) throw ValidationError("unknown predictor '" + predictor + "'");
    EdgeLayering out;
    out.predictor = predictor;
    out.reached.push_back({predictor});
    EdgeSet remaining = d.edges();
    for (std::size_t depth = 1; depth <= max_depth; ++depth) {
        const auto& seen = out.reached.back();
        EdgeSet layer;
        for (const auto& e : remaining)
            if (seen.count(e.source) || seen.count(e.target)) layer.insert(e);
        VertexSet next = seen;
        for (const auto& e : layer) {
            remaining.erase(e);
            next.insert(e.source);
            next.insert(e.target);
        }
        out.layers.push_back(std::move(layer));
        out.reached.push_back(std::move(next));
    }
    out.unlayered = std::move(remaining);
    return out;
}

/// Depth bound from the longest directed path of the diagram.
inline EdgeLayering layer_edges(const CausalDiagram& d, const std::string& predictor) {
    return layer_edges(d, predictor, longest_path_length(d));
}

struct TieBreak {
    enum class Mode { alphabetical, seeded_random };
    Mode mode = Mode::alphabetical;
    std::uint64_t seed = 0;

    static TieBreak alphabetical() { return {}; }
    static TieBreak random(std::uint64_t seed) { return {Mode::seeded_random, seed}; }
};

struct AuditRecord {
    Edge edge;
    std::optional<std::size_t> depth;  // nullopt: not connected to the predictor within the depth bound
    std::vector<bool> votes;
    bool rule_result = false;
    bool acyclic_ok = false;
    bool inserted = false;
};

struct EdgePooling {
    EdgeSet pooled;
    std::vector<AuditRecord> audit;
};

/// Judgment aggregation over edges. Each distinct edge is visited once, at its
/// smallest depth over all experts, depth by depth with ties ordered by
/// `tie_break`; never-layered edges come last. Votes are presence in each
/// expert's full edge set. An edge is kept iff the rule accepts it and, when
/// `acyclicity_guard` is set, it closes no cycle with the edges kept so far.
inline EdgePooling pool_edges(const std::vector<CausalDiagram>& experts, const std::vector<EdgeLayering>& layerings,
                              const AggregationRule& rule, const TieBreak& tie_break,
                              bool acyclicity_guard = true) {
    const std::size_t n = experts.size();
    if (n == 0) throw ValidationError("at least one expert is required");
    if (layerings.size() != n) throw ValidationError("one layering per expert is required");
    rule.validate(n);
    const auto universe = experts.front().vertex_names();
    for (std::size_t i = 1; i < n; ++i)
        if (experts[i].vertex_names() != universe) throw ValidationError("vertex-set mismatch between experts");
    for (const auto& l : layerings)
        if (l.predictor != layerings.front().predictor) throw ValidationError("layerings disagree on the predictor");

    constexpr std::size_t kUnlayered = static_cast<std::size_t>(-1);
    std::map<Edge, std::size_t> depth;
    for (const auto& l : layerings) {
        for (std::size_t d = 0; d < l.layers.size(); ++d)
            for (const auto& e : l.layers[d]) {
                auto [it, fresh] = depth.emplace(e, d + 1);
                if (!fresh) it->second = std::min(it->second, d + 1);
            }
        for (const auto& e : l.unlayered) depth.emplace(e, kUnlayered);
    }

    std::map<std::size_t, std::vector<Edge>> by_depth;
    for (const auto& [e, d] : depth) by_depth[d].push_back(e);
    if (tie_break.mode == TieBreak::Mode::seeded_random) {
        Rng rng(tie_break.seed);
        for (auto& [_, group] : by_depth) rng.shuffle(group);
    }

    CausalDiagram current;
    for (const auto& v : universe) current.add_vertex(v);

    EdgePooling out;
    for (const auto& [d, group] : by_depth) {
        for (const auto& e : group) {
            AuditRecord record;
            record.edge = e;
            if (d != kUnlayered) record.depth = d;
            for (const auto& expert : experts) record.votes.push_back(expert.has_edge(e));
            record.rule_result = apply_rule(rule, EdgeJudgmentProfile{e, record.votes}, n);
            record.acyclic_ok = e.source != e.target && !reaches(current, e.target, e.source);
            record.inserted = record.rule_result && (record.acyclic_ok || !acyclicity_guard);
            if (record.inserted) {
                current.add_edge(e);
                out.pooled.insert(e);
            }
            out.audit.push_back(std::move(record));
        }
    }
    return out;
}

/// How one rule configuration fares against the four properties on the
/// three-expert cyclic-majority profile.
struct RuleAssessment {
    std::string configuration;
    AggregationRule rule;
    bool acyclicity_guard = true;
    EdgeSet output_alphabetical;
    EdgeSet output_random;
    std::optional<std::vector<std::string>> cycle;
    bool universal_domain = true;
    bool acyclicity = true;
    bool unbiasedness = true;
    bool non_dictatorship = true;
};

struct ImpossibilityReport {
    std::vector<CausalDiagram> experts;
    std::uint64_t seed = 0;
    std::vector<RuleAssessment> assessments;
};

/// Experts {A->B, B->C}, {B->C, C->A}, {C->A, A->B} plus an isolated predictor
/// Y, so that every edge is visited purely in tie-break order.
inline std::vector<CausalDiagram> cyclic_majority_profile() {
    const std::vector<std::vector<Edge>> edge_sets = {
        {{"A", "B"}, {"B", "C"}}, {{"B", "C"}, {"C", "A"}}, {{"C", "A"}, {"A", "B"}}};
    std::vector<CausalDiagram> experts;
    for (const auto& edges : edge_sets) {
        CausalDiagram d;
        for (const char* v : {"A", "B", "C", "Y"}) d.add_vertex(v);
        for (const auto& e : edges) d.add_edge(e);
        experts.push_back(std::move(d));
    }
    return experts;
}

/// Seed whose shuffle of the cyclic profile leaves A->B last, so the guard rejects it instead of C->A.
inline constexpr std::uint64_t kImpossibilitySeed = 7;

/// True iff flipping every vote always flips the outcome, i.e. the rule favours
/// neither presence nor absence.
inline bool is_neutral(const AggregationRule& rule, std::size_t n) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        EdgeJudgmentProfile profile{{"", ""}, {}}, flipped{{"", ""}, {}};
        for (std::size_t i = 0; i < n; ++i) {
            profile.votes.push_back((mask >> i) & 1U);
            flipped.votes.push_back(!profile.votes.back());
        }
        if (apply_rule(rule, profile, n) == apply_rule(rule, flipped, n)) return false;
    }
    return true;
}

inline ImpossibilityReport demonstrate_impossibility(std::uint64_t seed = kImpossibilitySeed) {
    ImpossibilityReport report;
    report.experts = cyclic_majority_profile();
    report.seed = seed;
    const std::size_t n = report.experts.size();

    std::vector<EdgeLayering> layerings;
    for (const auto& e : report.experts) layerings.push_back(layer_edges(e, "Y"));

    struct Config {
        std::string name;
        AggregationRule rule;
        bool guard;
    };
    const std::vector<Config> configs = {
        {"strict-majority without acyclicity guard", AggregationRule::strict_majority(), false},
        {"strict-majority with acyclicity guard", AggregationRule::strict_majority(), true},
        {"unanimity with acyclicity guard", AggregationRule::unanimity(), true},
        {"copy expert 1", AggregationRule::copy_expert(0), true},
    };

    for (const auto& c : configs) {
        RuleAssessment a;
        a.configuration = c.name;
        a.rule = c.rule;
        a.acyclicity_guard = c.guard;
        const auto alpha = pool_edges(report.experts, layerings, c.rule, TieBreak::alphabetical(), c.guard);
        const auto rnd = pool_edges(report.experts, layerings, c.rule, TieBreak::random(seed), c.guard);
        a.output_alphabetical = alpha.pooled;
        a.output_random = rnd.pooled;

        for (const auto* out : {&alpha.pooled, &rnd.pooled}) {
            CausalDiagram g;
            for (const auto& v : report.experts.front().vertex_names()) g.add_vertex(v);
            for (const auto& e : *out) g.add_edge(e);
            if (auto cyc = find_cycle(g)) {
                a.acyclicity = false;
                if (!a.cycle) a.cycle = cyc;
            }
        }

        // Independence: an edge's fate must follow from its own votes alone.
        bool independent = alpha.pooled == rnd.pooled;
        for (const auto& rec : alpha.audit)
            if (rec.inserted != rec.rule_result) independent = false;
        a.unbiasedness = independent && is_neutral(c.rule, n);

        for (const auto& expert : report.experts)
            if (expert.edges() == alpha.pooled && expert.edges() == rnd.pooled) a.non_dictatorship = false;
        if (c.rule.kind == RuleKind::dictator) a.non_dictatorship = false;

        report.assessments.push_back(std::move(a));
    }
    return report;
}

}  // namespace fairpool
