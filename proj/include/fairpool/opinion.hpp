#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairpool/error.hpp"
#include "fairpool/scm.hpp"

namespace fairpool {

/// Expert weights: non-negative, summing to one.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
        if (w_.empty()) throw ValidationError("weight vector must be non-empty");
        double total = 0.0;
        for (double x : w_) {
            if (!(x >= 0.0)) throw ValidationError("weights must be non-negative");
            total += x;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) throw ValidationError("weights must sum to 1");
    }

    static WeightVector uniform(std::size_t n) {
        if (n == 0) throw ValidationError("weight vector must be non-empty");
        return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const { return w_; }

private:
    std::vector<double> w_;
};

/// P*(x) = sum_i w_i P_i(x), entry by entry.
inline std::vector<double> linear_pool(const std::vector<std::vector<double>>& dists, const WeightVector& w) {
    if (dists.size() != w.size())
        throw ValidationError("expected " + std::to_string(w.size()) + " distributions, got " +
                              std::to_string(dists.size()));
    const std::size_t k = dists.front().size();
    for (const auto& d : dists) {
        if (d.size() != k) throw ValidationError("distributions are over different domains");
        double total = 0.0;
        for (double p : d) {
            if (!(p >= 0.0)) throw ValidationError("distribution has a negative entry");
            total += p;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) throw ValidationError("distribution does not sum to 1");
    }
    std::vector<double> out(k, 0.0);
    for (std::size_t i = 0; i < dists.size(); ++i)
        for (std::size_t x = 0; x < k; ++x) out[x] += w[i] * dists[i][x];
    return out;
}

/// Pools each exogenous root independently. All experts must declare the same
/// exogenous variables with identical domains.
inline std::map<std::string, std::vector<double>> pool_root_distributions(const std::vector<ScmModel>& experts,
                                                                          const WeightVector& w) {
    if (experts.empty()) throw ValidationError("at least one expert is required");
    const auto roots = experts.front().diagram().exogenous();
    for (const auto& m : experts) {
        if (m.diagram().exogenous() != roots) throw ValidationError("exogenous variables differ between experts");
        for (const auto& r : roots)
            if (m.domain(r) != experts.front().domain(r))
                throw ValidationError("domain of '" + r + "' differs between experts");
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& r : roots) {
        std::vector<std::vector<double>> dists;
        for (const auto& m : experts) dists.push_back(m.exogenous_distribution().at(r));
        out[r] = linear_pool(dists, w);
    }
    return out;
}

}  // namespace fairpool
