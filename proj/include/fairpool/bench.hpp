#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fairpool/diagram.hpp"
#include "fairpool/error.hpp"
#include "fairpool/judgment.hpp"
#include "fairpool/pooling.hpp"
#include "fairpool/random.hpp"
#include "fairpool/scm.hpp"

namespace fairpool {

struct EnsembleParams {
    std::size_t experts = 3;
    std::size_t variables = 7;  // including the predictor
    double edge_prob = 0.3;
    std::size_t protected_count = 1;
    /// All experts draw forward edges along one hidden causal order ending in
    /// the predictor. When false each expert has its own order and the
    /// predictor may sit anywhere in it.
    bool shared_order = true;

    void validate() const {
        if (experts == 0) throw ValidationError("--experts must be positive");
        if (variables < 2) throw ValidationError("--vars must be at least 2");
        if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ValidationError("--edge-prob must lie in [0, 1]");
        if (protected_count == 0 || protected_count >= variables)
            throw ValidationError("protected count must lie in [1, vars - 1]");
    }
};

struct Ensemble {
    std::vector<CausalDiagram> experts;
    std::string predictor;
    VertexSet protected_attributes;
};

inline Ensemble random_ensemble(Rng& rng, const EnsembleParams& params) {
    params.validate();
    Ensemble out;
    out.predictor = "Y";
    std::vector<std::string> features;
    for (std::size_t i = 1; i < params.variables; ++i) features.push_back("V" + std::to_string(i));

    auto shuffled = features;
    rng.shuffle(shuffled);
    for (std::size_t k = 0; k < params.protected_count; ++k) out.protected_attributes.insert(shuffled[k]);

    std::vector<std::string> shared = features;
    rng.shuffle(shared);
    shared.push_back(out.predictor);

    for (std::size_t j = 0; j < params.experts; ++j) {
        std::vector<std::string> order = shared;
        if (!params.shared_order) rng.shuffle(order);
        CausalDiagram d;
        for (const auto& v : order) d.add_vertex(v);
        for (std::size_t a = 0; a < order.size(); ++a)
            for (std::size_t b = a + 1; b < order.size(); ++b)
                if (rng.bernoulli(params.edge_prob)) d.add_edge(order[a], order[b]);
        out.experts.push_back(std::move(d));
    }
    return out;
}

/// Equips an endogenous diagram with one independent root U_<v> per variable,
/// random root distributions on a 1/20 grid, and random lookup tables.
inline ScmModel random_scm(const CausalDiagram& endogenous, Rng& rng, std::size_t domain_size = 2) {
    CausalDiagram d = endogenous;
    std::map<std::string, Domain> domains;
    std::map<std::string, std::vector<double>> roots;
    Domain dom;
    for (std::size_t k = 0; k < domain_size; ++k) dom.push_back(std::to_string(k));
    for (const auto& v : endogenous.endogenous()) {
        const std::string u = "U_" + v;
        d.add_vertex(u, VariableKind::exogenous);
        d.add_edge(u, v);
        domains[v] = dom;
        domains[u] = dom;
        std::vector<double> p(domain_size, 0.0);
        double left = 1.0;
        for (std::size_t k = 0; k + 1 < domain_size; ++k) {
            p[k] = left * static_cast<double>(1 + rng.index(19)) / 20.0;
            left -= p[k];
        }
        p.back() = left;
        roots[u] = std::move(p);
    }
    std::map<std::string, StructuralEquation> equations;
    for (const auto& v : endogenous.endogenous())
        equations[v] = tabulate(v, d.parents(v), domains,
                                [&](const std::vector<std::size_t>&) { return rng.index(domain_size); });
    return ScmModel(std::move(d), std::move(domains), std::move(equations), std::move(roots));
}

struct BenchRow {
    std::size_t trial = 0;
    Algorithm algorithm = Algorithm::removal_pooling;
    std::size_t edges = 0;
    std::size_t predictor_inputs = 0;
    bool empty = false;
};

struct BenchResult {
    std::vector<BenchRow> rows;

    double empty_rate(Algorithm a) const {
        std::size_t total = 0, empty = 0;
        for (const auto& r : rows)
            if (r.algorithm == a) {
                ++total;
                empty += r.empty ? 1 : 0;
            }
        return total == 0 ? 0.0 : static_cast<double>(empty) / static_cast<double>(total);
    }
};

/// Both algorithms on `trials` random ensembles. Trial t uses the seed
/// derive_seed(seed, t), so any single trial can be replayed.
inline BenchResult run_bench(const EnsembleParams& params, std::size_t trials, std::uint64_t seed,
                             const AggregationRule& rule = AggregationRule::strict_majority()) {
    params.validate();
    rule.validate(params.experts);
    BenchResult result;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, t));
        auto ensemble = random_ensemble(rng, params);
        for (auto algorithm : {Algorithm::removal_pooling, Algorithm::pooling_removal}) {
            auto report = run_pooling(algorithm, ensemble.experts, ensemble.predictor,
                                      ensemble.protected_attributes, rule, TieBreak::alphabetical());
            result.rows.push_back({t, algorithm, report.pooled_diagram.edges().size(), report.predictor_inputs.size(),
                                   report.empty()});
        }
    }
    return result;
}

inline std::string bench_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "trial,algorithm,edges,predictor_inputs,empty\n";
    for (const auto& r : result.rows)
        out << r.trial << ',' << to_string(r.algorithm) << ',' << r.edges << ',' << r.predictor_inputs << ','
            << (r.empty ? 1 : 0) << '\n';
    return out.str();
}

}  // namespace fairpool
