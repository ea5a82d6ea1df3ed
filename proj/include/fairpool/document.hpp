#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairpool/diagram.hpp"
#include "fairpool/error.hpp"
#include "fairpool/fairness.hpp"
#include "fairpool/pooling.hpp"
#include "fairpool/scm.hpp"

namespace fairpool {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// One expert's deliverable: a diagram over named variables, the predictor,
/// and optionally the equations and root distributions that make it an SCM.
struct ModelDocument {
    int schema_version = kSchemaVersion;
    CausalDiagram diagram;
    std::string predictor;
    std::map<std::string, Domain> domains;
    std::optional<std::map<std::string, StructuralEquation>> equations;
    std::optional<std::map<std::string, std::vector<double>>> exogenous_distributions;

    bool has_scm() const { return equations.has_value(); }

    ScmModel to_scm() const {
        if (!equations) throw ValidationError("document has no structural equations");
        return ScmModel(diagram, domains, *equations, exogenous_distributions.value_or(std::map<std::string, std::vector<double>>{}));
    }
};

namespace detail {

class Collector {
public:
    explicit Collector(std::string source) : source_(std::move(source)) {}

    void add(const std::string& pointer, const std::string& message) {
        problems_.push_back(source_ + ": " + (pointer.empty() ? "/" : pointer) + ": " + message);
    }
    bool empty() const { return problems_.empty(); }
    void raise() {
        if (!problems_.empty()) throw ValidationError(std::move(problems_));
    }

private:
    std::string source_;
    std::vector<std::string> problems_;
};

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& ptr,
                           Collector& c) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) c.add(ptr, "unknown field '" + key + "'");
    }
}

inline const json& empty_object() {
    static const json empty = json::object();
    return empty;
}

inline std::optional<std::string> as_label(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    return std::nullopt;
}

inline std::optional<std::size_t> index_in(const Domain& dom, const json& v) {
    auto label = as_label(v);
    if (!label) return std::nullopt;
    for (std::size_t k = 0; k < dom.size(); ++k)
        if (dom[k] == *label) return k;
    return std::nullopt;
}

}  // namespace detail

/// Parses and validates a model document. Violations name the JSON pointer.
inline ModelDocument parse_model(const json& j, const std::string& source = "<model>") {
    detail::Collector c(source);
    ModelDocument doc;
    if (!j.is_object()) {
        c.add("", "document must be a JSON object");
        c.raise();
    }
    detail::reject_unknown(j, {"schema_version", "variables", "edges", "predictor", "equations",
                               "exogenous_distributions"},
                           "", c);

    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        c.add("/schema_version", "required integer");
    else if (j["schema_version"].get<int>() != kSchemaVersion)
        c.add("/schema_version", "unsupported version " + j["schema_version"].dump());

    if (!j.contains("variables") || !j["variables"].is_array()) {
        c.add("/variables", "required array");
        c.raise();
    }
    const auto& vars = j["variables"];
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const std::string ptr = "/variables/" + std::to_string(i);
        const auto& v = vars[i];
        if (!v.is_object()) {
            c.add(ptr, "variable must be an object");
            continue;
        }
        detail::reject_unknown(v, {"name", "kind", "domain"}, ptr, c);
        if (!v.contains("name") || !v["name"].is_string() || v["name"].get<std::string>().empty()) {
            c.add(ptr + "/name", "required non-empty string");
            continue;
        }
        const auto name = v["name"].get<std::string>();
        VariableKind kind = VariableKind::endogenous;
        if (!v.contains("kind") || !v["kind"].is_string()) {
            c.add(ptr + "/kind", "required: \"exogenous\" or \"endogenous\"");
        } else if (v["kind"] == "exogenous") {
            kind = VariableKind::exogenous;
        } else if (v["kind"] != "endogenous") {
            c.add(ptr + "/kind", "must be \"exogenous\" or \"endogenous\"");
        }
        if (doc.diagram.has_vertex(name)) {
            c.add(ptr + "/name", "duplicate variable '" + name + "'");
            continue;
        }
        doc.diagram.add_vertex(name, kind);
        Domain dom{"0", "1"};
        if (v.contains("domain")) {
            dom.clear();
            const auto& d = v["domain"];
            if (!d.is_array() || d.empty()) {
                c.add(ptr + "/domain", "must be a non-empty array");
            } else {
                std::set<std::string> seen;
                for (std::size_t k = 0; k < d.size(); ++k) {
                    auto label = detail::as_label(d[k]);
                    if (!label) c.add(ptr + "/domain/" + std::to_string(k), "value must be a string or integer");
                    else if (!seen.insert(*label).second)
                        c.add(ptr + "/domain/" + std::to_string(k), "duplicate value '" + *label + "'");
                    else dom.push_back(*label);
                }
            }
        }
        doc.domains[name] = std::move(dom);
    }

    if (!j.contains("edges") || !j["edges"].is_array()) {
        c.add("/edges", "required array");
    } else {
        const auto& edges = j["edges"];
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string ptr = "/edges/" + std::to_string(i);
            const auto& e = edges[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                c.add(ptr, "edge must be [source, target]");
                continue;
            }
            Edge edge{e[0].get<std::string>(), e[1].get<std::string>()};
            if (!doc.diagram.add_edge(edge)) c.add(ptr, "duplicate edge " + to_string(edge));
        }
    }
    for (const auto& v : validate_diagram(doc.diagram).violations) c.add("/edges", v);

    if (!j.contains("predictor") || !j["predictor"].is_string()) {
        c.add("/predictor", "required string");
    } else {
        doc.predictor = j["predictor"].get<std::string>();
        if (!doc.diagram.has_vertex(doc.predictor) || doc.diagram.kind(doc.predictor) != VariableKind::endogenous)
            c.add("/predictor", "'" + doc.predictor + "' is not an endogenous variable");
    }
    c.raise();

    if (j.contains("equations")) {
        const auto& eqs = j["equations"];
        std::map<std::string, StructuralEquation> parsed;
        if (!eqs.is_object()) c.add("/equations", "must be an object");
        const json& eq_obj = eqs.is_object() ? eqs : detail::empty_object();
        for (const auto& [target, body] : eq_obj.items()) {
            const std::string ptr = "/equations/" + target;
            if (!doc.diagram.has_vertex(target) || doc.diagram.kind(target) != VariableKind::endogenous) {
                c.add(ptr, "not an endogenous variable");
                continue;
            }
            if (!body.is_object()) {
                c.add(ptr, "must be an object");
                continue;
            }
            detail::reject_unknown(body, {"parents", "table"}, ptr, c);
            if (!body.contains("parents") || !body["parents"].is_array()) {
                c.add(ptr + "/parents", "required array");
                continue;
            }
            std::vector<std::string> parents;
            bool parents_ok = true;
            for (const auto& p : body["parents"]) {
                if (!p.is_string() || !doc.diagram.has_vertex(p.get<std::string>())) {
                    c.add(ptr + "/parents", "unknown parent " + p.dump());
                    parents_ok = false;
                } else {
                    parents.push_back(p.get<std::string>());
                }
            }
            if (!parents_ok) continue;
            auto sorted = parents;
            std::sort(sorted.begin(), sorted.end());
            if (sorted != doc.diagram.parents(target)) {
                c.add(ptr + "/parents", "must match the incoming edges of '" + target + "'");
                continue;
            }
            std::size_t rows = 1;
            for (const auto& p : parents) rows *= doc.domains[p].size();
            std::vector<std::optional<std::size_t>> table(rows);
            if (!body.contains("table") || !body["table"].is_array()) {
                c.add(ptr + "/table", "required array");
                continue;
            }
            const auto& tbl = body["table"];
            for (std::size_t r = 0; r < tbl.size(); ++r) {
                const std::string rptr = ptr + "/table/" + std::to_string(r);
                const auto& row = tbl[r];
                if (!row.is_object() || !row.contains("when") || !row.contains("value") || !row["when"].is_array() ||
                    row.size() != 2) {
                    c.add(rptr, "row must be {\"when\": [...], \"value\": ...}");
                    continue;
                }
                if (row["when"].size() != parents.size()) {
                    c.add(rptr + "/when", "expected " + std::to_string(parents.size()) + " parent values");
                    continue;
                }
                std::size_t index = 0;
                bool ok = true;
                for (std::size_t k = 0; k < parents.size(); ++k) {
                    auto idx = detail::index_in(doc.domains[parents[k]], row["when"][k]);
                    if (!idx) {
                        c.add(rptr + "/when/" + std::to_string(k), "value not in domain of '" + parents[k] + "'");
                        ok = false;
                        break;
                    }
                    index = index * doc.domains[parents[k]].size() + *idx;
                }
                auto out = detail::index_in(doc.domains[target], row["value"]);
                if (!out) {
                    c.add(rptr + "/value", "value not in domain of '" + target + "'");
                    ok = false;
                }
                if (!ok) continue;
                if (table[index]) c.add(rptr, "duplicate row");
                table[index] = *out;
            }
            StructuralEquation eq{target, parents, {}};
            bool total = true;
            for (const auto& cell : table) {
                if (!cell) total = false;
                else eq.table.push_back(*cell);
            }
            if (!total) {
                c.add(ptr + "/table", "table is not total over the parent domains");
                continue;
            }
            parsed[target] = std::move(eq);
        }
        for (const auto& v : doc.diagram.endogenous())
            if (eqs.is_object() && !eqs.contains(v)) c.add("/equations", "missing equation for '" + v + "'");
        doc.equations = std::move(parsed);
    }

    if (j.contains("exogenous_distributions")) {
        const auto& dists = j["exogenous_distributions"];
        std::map<std::string, std::vector<double>> parsed;
        if (!dists.is_object()) c.add("/exogenous_distributions", "must be an object");
        const json& dist_obj = dists.is_object() ? dists : detail::empty_object();
        for (const auto& [root, probs] : dist_obj.items()) {
            const std::string ptr = "/exogenous_distributions/" + root;
            if (!doc.diagram.has_vertex(root) || doc.diagram.kind(root) != VariableKind::exogenous) {
                c.add(ptr, "not an exogenous variable");
                continue;
            }
            if (!probs.is_array() || probs.size() != doc.domains[root].size()) {
                c.add(ptr, "must be an array with one probability per domain value");
                continue;
            }
            std::vector<double> p;
            double total = 0.0;
            bool ok = true;
            for (const auto& x : probs) {
                if (!x.is_number() || x.get<double>() < 0.0) {
                    c.add(ptr, "probabilities must be non-negative numbers");
                    ok = false;
                    break;
                }
                p.push_back(x.get<double>());
                total += p.back();
            }
            if (!ok) continue;
            if (std::abs(total - 1.0) > kProbabilityTolerance) c.add(ptr, "probabilities must sum to 1");
            parsed[root] = std::move(p);
        }
        for (const auto& r : doc.diagram.exogenous())
            if (dists.is_object() && !dists.contains(r)) c.add("/exogenous_distributions", "missing distribution for '" + r + "'");
        doc.exogenous_distributions = std::move(parsed);
    } else if (doc.equations && !doc.diagram.exogenous().empty()) {
        c.add("/exogenous_distributions", "required when equations and exogenous variables are present");
    }
    c.raise();

    if (doc.equations) {
        try {
            (void)doc.to_scm();
        } catch (const ValidationError& e) {
            for (const auto& v : e.violations()) c.add("/equations", v);
        }
    }
    c.raise();
    return doc;
}

inline json to_json(const CausalDiagram& d) {
    json vertices = json::array();
    for (const auto& [name, _] : d.vertices()) vertices.push_back(name);
    json edges = json::array();
    for (const auto& e : d.edges()) edges.push_back({e.source, e.target});
    return {{"vertices", vertices}, {"edges", edges}};
}

inline CausalDiagram diagram_from_json(const json& j) {
    CausalDiagram d;
    for (const auto& v : j.at("vertices")) d.add_vertex(v.get<std::string>());
    for (const auto& e : j.at("edges")) d.add_edge(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    return d;
}

inline json to_json(const ModelDocument& doc) {
    json j;
    j["schema_version"] = doc.schema_version;
    json vars = json::array();
    for (const auto& [name, kind] : doc.diagram.vertices()) {
        json v{{"name", name}, {"kind", to_string(kind)}};
        auto it = doc.domains.find(name);
        v["domain"] = it == doc.domains.end() ? Domain{"0", "1"} : it->second;
        vars.push_back(std::move(v));
    }
    j["variables"] = std::move(vars);
    json edges = json::array();
    for (const auto& e : doc.diagram.edges()) edges.push_back({e.source, e.target});
    j["edges"] = std::move(edges);
    j["predictor"] = doc.predictor;
    if (doc.equations) {
        json eqs = json::object();
        for (const auto& [target, eq] : *doc.equations) {
            // canonical form: parents sorted by name, rows in mixed-radix order
            std::vector<std::string> parents = eq.parents;
            std::sort(parents.begin(), parents.end());
            std::vector<std::size_t> radix;
            std::size_t rows = 1;
            for (const auto& p : parents) {
                radix.push_back(doc.domains.at(p).size());
                rows *= radix.back();
            }
            json table = json::array();
            std::vector<std::size_t> digits(parents.size());
            for (std::size_t r = 0; r < rows; ++r) {
                std::size_t rest = r;
                for (std::size_t k = parents.size(); k-- > 0;) {
                    digits[k] = rest % radix[k];
                    rest /= radix[k];
                }
                Assignment values;
                json when = json::array();
                for (std::size_t k = 0; k < parents.size(); ++k) {
                    values[parents[k]] = digits[k];
                    when.push_back(doc.domains.at(parents[k])[digits[k]]);
                }
                std::size_t row = 0;
                for (const auto& p : eq.parents) row = row * doc.domains.at(p).size() + values.at(p);
                table.push_back({{"when", when}, {"value", doc.domains.at(target)[eq.table[row]]}});
            }
            eqs[target] = {{"parents", parents}, {"table", table}};
        }
        j["equations"] = std::move(eqs);
    }
    if (doc.exogenous_distributions) j["exogenous_distributions"] = *doc.exogenous_distributions;
    return j;
}

/// Canonical text: sorted keys and vertices, two-space indent, trailing newline.
inline std::string serialize(const json& j) { return j.dump(2) + "\n"; }
inline std::string serialize(const ModelDocument& doc) { return serialize(to_json(doc)); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("cannot read '" + path + "'");
    return buf.str();
}

/// Malformed JSON is reported as an I/O failure; schema problems as validation failures.
inline json read_json(const std::string& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(path + ": malformed JSON: " + e.what());
    }
}

inline ModelDocument load_model(const std::string& path) { return parse_model(read_json(path), path); }

inline json to_json(const AggregationRule& r) {
    json j{{"kind", r.name()}};
    if (r.kind == RuleKind::quota) j["threshold"] = r.threshold;
    if (r.kind == RuleKind::weighted_majority) j["weights"] = r.weights;
    if (r.kind == RuleKind::dictator) j["expert"] = r.dictator + 1;
    return j;
}

inline json to_json(const TieBreak& t) {
    if (t.mode == TieBreak::Mode::alphabetical) return {{"mode", "alphabetical"}};
    return {{"mode", "random"}, {"seed", t.seed}};
}

inline json to_json(const AuditRecord& r) {
    json j{{"edge", {r.edge.source, r.edge.target}},
           {"votes", r.votes},
           {"rule_result", r.rule_result},
           {"acyclic_ok", r.acyclic_ok},
           {"inserted", r.inserted}};
    j["depth"] = r.depth ? json(*r.depth) : json(nullptr);
    return j;
}

inline json to_json(const PoolingReport& r, const AggregationRule& rule, const TieBreak& tie_break) {
    json j;
    j["algorithm"] = to_string(r.algorithm);
    j["rule"] = to_json(rule);
    j["tie_break"] = to_json(tie_break);
    j["predictor"] = r.predictor;
    j["protected"] = r.protected_attributes;
    j["depth_bound"] = r.depth_bound;
    j["pooled_before_removal"] = to_json(r.pooled_before_removal);
    j["pooled_diagram"] = to_json(r.pooled_diagram);
    j["predictor_inputs"] = r.predictor_inputs;
    j["removed_vertices"] = r.removed_vertices;
    j["expert_removed"] = r.expert_removed;
    json audit = json::array();
    for (const auto& rec : r.audit_trail) audit.push_back(to_json(rec));
    j["audit_trail"] = std::move(audit);
    json refs = json::array();
    for (const auto& d : r.fairness_certificate.reference_diagrams) refs.push_back(to_json(d));
    j["fairness_certificate"] = {{"holds", r.fairness_certificate.holds},
                                 {"offenders", r.fairness_certificate.offenders},
                                 {"reference_diagrams", refs}};
    j["empty"] = r.empty();
    if (r.predictor_inputs.empty())
        j["warning"] = "pooled predictor has no inputs; the fair predictor is constant";
    return j;
}

inline json to_json(const FairnessWitness& w, const ScmModel& m, const std::string& predictor) {
    auto labels = [&](const Assignment& a) {
        json out = json::object();
        for (const auto& [v, k] : a) out[v] = m.domain(v)[k];
        return out;
    };
    return {{"context", labels(w.context.values)},
            {"observed_protected", labels(w.observed_protected)},
            {"observed_features", labels(w.observed_features)},
            {"counterfactual_protected", labels(w.counterfactual_protected)},
            {"predictor_value", m.domain(predictor)[w.predictor_value]},
            {"probabilities", {w.factual_probability, w.counterfactual_probability}}};
}

}  // namespace fairpool
