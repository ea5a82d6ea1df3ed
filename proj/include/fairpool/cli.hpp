#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairpool/bench.hpp"
#include "fairpool/document.hpp"
#include "fairpool/dot.hpp"
#include "fairpool/fairness.hpp"
#include "fairpool/judgment.hpp"
#include "fairpool/opinion.hpp"
#include "fairpool/pooling.hpp"

namespace fairpool::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kUnfair = 2, kIoFailure = 3 };

struct RuleOptions {
    std::string rule = "strict-majority";
    double quota = 0.5;
    std::vector<double> weights;

    AggregationRule build(std::size_t experts) const {
        AggregationRule r;
        if (rule == "strict-majority") r = AggregationRule::strict_majority();
        else if (rule == "unanimity") r = AggregationRule::unanimity();
        else if (rule == "quota") r = AggregationRule::quota(quota);
        else if (rule == "weighted-majority") r = AggregationRule::weighted_majority(weights);
        else throw ValidationError("unknown rule '" + rule + "'");
        r.validate(experts);
        return r;
    }
};

inline void add_rule_options(CLI::App* cmd, RuleOptions& o) {
    cmd->add_option("--rule", o.rule, "Judgment aggregation rule")
        ->check(CLI::IsMember({"strict-majority", "quota", "unanimity", "weighted-majority"}));
    cmd->add_option("--quota", o.quota, "Quota threshold t in (0, 1]");
    cmd->add_option("--weights", o.weights, "Expert weights, comma separated")->delimiter(',');
}

namespace detail {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("cannot write '" + path + "'");
}

inline std::vector<ModelDocument> load_consistent(const std::vector<std::string>& files) {
    std::vector<ModelDocument> docs;
    std::vector<std::string> problems;
    for (const auto& f : files) {
        try {
            docs.push_back(load_model(f));
        } catch (const ValidationError& e) {
            problems.insert(problems.end(), e.violations().begin(), e.violations().end());
        }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].diagram.endogenous() != docs[0].diagram.endogenous())
            problems.push_back(files[i] + ": vertex-set mismatch with " + files[0]);
        if (docs[i].predictor != docs[0].predictor)
            problems.push_back(files[i] + ": predictor '" + docs[i].predictor + "' differs from '" +
                               docs[0].predictor + "' in " + files[0]);
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return docs;
}

inline VertexSet to_set(const std::vector<std::string>& v) { return VertexSet(v.begin(), v.end()); }

/// Pooled root distributions, kept only for roots feeding a surviving vertex.
inline json pooled_distributions(const std::vector<ModelDocument>& docs, const PoolingReport& report,
                                 const std::vector<double>& weights) {
    const auto roots = docs.front().diagram.exogenous();
    for (const auto& d : docs) {
        if (!d.exogenous_distributions)
            throw ValidationError("--with-distributions requires exogenous_distributions in every document");
        if (d.diagram.exogenous() != roots) throw ValidationError("exogenous variables differ between documents");
    }
    WeightVector w = weights.empty() ? WeightVector::uniform(docs.size()) : WeightVector(weights);
    json out = json::object();
    for (const auto& r : roots) {
        bool feeds_survivor = false;
        for (const auto& d : docs)
            for (const auto& child : d.diagram.children(r))
                feeds_survivor = feeds_survivor || report.pooled_diagram.has_vertex(child);
        if (!feeds_survivor) continue;
        std::vector<std::vector<double>> dists;
        for (const auto& d : docs) {
            if (d.domains.at(r) != docs.front().domains.at(r))
                throw ValidationError("domain of '" + r + "' differs between documents");
            dists.push_back(d.exogenous_distributions->at(r));
        }
        out[r] = linear_pool(dists, w);
    }
    return out;
}

}  // namespace detail

inline int cmd_validate(const std::vector<std::string>& files, std::ostream& out) {
    auto docs = detail::load_consistent(files);
    std::ostringstream report;
    for (std::size_t i = 0; i < files.size(); ++i)
        report << files[i] << ": ok (" << docs[i].diagram.vertices().size() << " variables, "
               << docs[i].diagram.edges().size() << " edges" << (docs[i].has_scm() ? ", with equations" : "")
               << ")\n";
    out << report.str();
    return kOk;
}

struct PoolOptions {
    std::vector<std::string> files;
    std::string algorithm = "pooling-removal";
    RuleOptions rule;
    std::string tie_break = "alphabetical";
    std::uint64_t seed = 0;
    std::vector<std::string> protected_attrs;
    std::string dot_path;
    bool with_distributions = false;
};

inline int cmd_pool(const PoolOptions& o, std::ostream& out) {
    auto docs = detail::load_consistent(o.files);
    std::vector<CausalDiagram> experts;
    for (const auto& d : docs) experts.push_back(d.diagram);
    const auto rule = o.rule.build(experts.size());
    const auto tie = o.tie_break == "random" ? TieBreak::random(o.seed) : TieBreak::alphabetical();
    const auto protected_set = detail::to_set(o.protected_attrs);
    const auto& predictor = docs.front().predictor;

    auto describe = [&](const PoolingReport& r) {
        json j = to_json(r, rule, tie);
        if (o.with_distributions) j["pooled_distributions"] = detail::pooled_distributions(docs, r, o.rule.weights);
        return j;
    };

    json result;
    const PoolingReport* for_dot = nullptr;
    std::vector<PoolingReport> reports;
    if (o.algorithm == "compare") {
        auto cmp = compare_algorithms(experts, predictor, protected_set, rule, tie);
        result["removal-pooling"] = describe(cmp.removal_pooling);
        result["pooling-removal"] = describe(cmp.pooling_removal);
        result["summary"] = {
            {"removal-pooling", {{"predictor_inputs", cmp.removal_pooling.predictor_inputs},
                                 {"removed_vertices", cmp.removal_pooling.removed_vertices},
                                 {"empty", cmp.removal_pooling.empty()}}},
            {"pooling-removal", {{"predictor_inputs", cmp.pooling_removal.predictor_inputs},
                                 {"removed_vertices", cmp.pooling_removal.removed_vertices},
                                 {"empty", cmp.pooling_removal.empty()}}}};
        reports.push_back(std::move(cmp.pooling_removal));
    } else {
        auto algorithm = o.algorithm == "removal-pooling" ? Algorithm::removal_pooling : Algorithm::pooling_removal;
        reports.push_back(run_pooling(algorithm, experts, predictor, protected_set, rule, tie));
        result = describe(reports.back());
    }
    for_dot = &reports.back();

    const std::string text = serialize(result);
    if (!o.dot_path.empty()) {
        DotAnnotations notes{predictor, protected_set, for_dot->removed_vertices};
        detail::write_file(o.dot_path, to_dot(for_dot->pooled_before_removal, notes, "pooled"));
    }
    out << text;
    return kOk;
}

struct CheckOptions {
    std::string file;
    std::vector<std::string> protected_attrs;
    bool brute_force = false;
};

inline int cmd_check_fair(const CheckOptions& o, std::ostream& out) {
    const json j = read_json(o.file);
    json result;
    bool fair = true;

    if (j.is_object() && j.contains("algorithm") && j.contains("pooled_diagram")) {
        if (o.brute_force)
            throw ValidationError(o.file + ": brute-force checking needs structural equations; a pooling report has none");
        VertexSet protected_set;
        try {
            protected_set = o.protected_attrs.empty() ? j.at("protected").get<VertexSet>()
                                                      : detail::to_set(o.protected_attrs);
            const auto predictor = j.at("predictor").get<std::string>();
            std::vector<CausalDiagram> diagrams{diagram_from_json(j.at("pooled_diagram"))};
            for (const auto& ref : j.at("fairness_certificate").at("reference_diagrams"))
                diagrams.push_back(diagram_from_json(ref));
            VertexSet offenders;
            for (const auto& d : diagrams) {
                VertexSet present;
                for (const auto& a : protected_set)
                    if (d.has_vertex(a)) present.insert(a);
                if (present.empty()) continue;
                auto p = FairnessPartition::over(d.endogenous(), predictor, present);
                auto verdict = check_fair_structural(d, p);
                offenders.insert(verdict.offenders.begin(), verdict.offenders.end());
            }
            fair = offenders.empty();
            result = {{"mode", "structural"}, {"source", "pooling-report"}, {"fair", fair}, {"offenders", offenders},
                      {"diagrams_checked", diagrams.size()}};
        } catch (const json::exception& e) {
            throw ValidationError(o.file + ": malformed pooling report: " + e.what());
        }
    } else {
        const auto doc = parse_model(j, o.file);
        if (o.protected_attrs.empty()) throw ValidationError("--protected is required for model documents");
        const auto partition =
            FairnessPartition::over(doc.diagram.endogenous(), doc.predictor, detail::to_set(o.protected_attrs));
        const auto structural = check_fair_structural(doc.diagram, partition);
        json structural_json{{"fair", structural.fair}, {"offenders", structural.offenders}};
        if (o.brute_force) {
            if (!doc.has_scm())
                throw ValidationError(o.file + ": --brute-force requires structural equations in the document");
            const auto model = doc.to_scm();
            const auto verdict = check_fair_bruteforce(model, partition);
            json witnesses = json::array();
            for (const auto& w : verdict.witnesses) witnesses.push_back(to_json(w, model, doc.predictor));
            fair = verdict.fair;
            result = {{"mode", "brute-force"}, {"fair", fair}, {"witnesses", witnesses},
                      {"structural", structural_json}};
        } else {
            fair = structural.fair;
            result = {{"mode", "structural"}, {"fair", fair}, {"offenders", structural.offenders}};
        }
    }
    out << serialize(result);
    return fair ? kOk : kUnfair;
}

struct BenchOptions {
    EnsembleParams params;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    RuleOptions rule;
};

inline int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
    o.params.validate();
    const auto result = run_bench(o.params, o.trials, o.seed, o.rule.build(o.params.experts));
    out << bench_csv(result);
    if (o.trials > 0) {
        std::ostringstream summary;
        summary << std::fixed << std::setprecision(6);
        for (auto a : {Algorithm::removal_pooling, Algorithm::pooling_removal})
            summary << "empty-rate," << to_string(a) << ',' << result.empty_rate(a) << '\n';
        err << summary.str();
    }
    return kOk;
}

struct ExportOptions {
    std::string file;
    std::string format = "dot";
    std::vector<std::string> protected_attrs;
};

inline int cmd_export(const ExportOptions& o, std::ostream& out) {
    const json j = read_json(o.file);
    std::string text;
    if (j.is_object() && j.contains("algorithm") && j.contains("pooled_diagram")) {
        try {
            const auto predictor = j.at("predictor").get<std::string>();
            const auto protected_set = j.at("protected").get<VertexSet>();
            if (o.format == "dot") {
                DotAnnotations notes{predictor, protected_set, j.at("removed_vertices").get<VertexSet>()};
                text = to_dot(diagram_from_json(j.at("pooled_before_removal")), notes, "pooled");
            } else {
                ModelDocument doc;
                doc.diagram = diagram_from_json(j.at("pooled_diagram"));
                doc.predictor = predictor;
                for (const auto& v : doc.diagram.vertex_names()) doc.domains[v] = {"0", "1"};
                text = serialize(doc);
            }
        } catch (const json::exception& e) {
            throw ValidationError(o.file + ": malformed pooling report: " + e.what());
        }
    } else {
        const auto doc = parse_model(j, o.file);
        if (o.format == "dot") {
            DotAnnotations notes{doc.predictor, detail::to_set(o.protected_attrs), {}};
            text = to_dot(doc.diagram, notes, "model");
        } else {
            text = serialize(doc);
        }
    }
    out << text;
    return kOk;
}

/// Entry point shared by the executable and the tests. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fair pooling of expert causal models", "fairpool"};
    app.require_subcommand(1);

    std::vector<std::string> validate_files;
    auto* validate = app.add_subcommand("validate", "Validate model documents and their mutual consistency");
    validate->add_option("files", validate_files, "Model documents")->required();

    PoolOptions pool;
    auto* pool_cmd = app.add_subcommand("pool", "Pool expert diagrams under counterfactual fairness");
    pool_cmd->add_option("files", pool.files, "Expert model documents")->required();
    pool_cmd->add_option("--algorithm", pool.algorithm, "removal-pooling | pooling-removal | compare")
        ->check(CLI::IsMember({"removal-pooling", "pooling-removal", "compare"}));
    add_rule_options(pool_cmd, pool.rule);
    pool_cmd->add_option("--tie-break", pool.tie_break, "alphabetical | random")
        ->check(CLI::IsMember({"alphabetical", "random"}));
    pool_cmd->add_option("--seed", pool.seed, "Seed for the random tie-break");
    pool_cmd->add_option("--protected", pool.protected_attrs, "Protected attributes")->required()->delimiter(',');
    pool_cmd->add_option("--dot", pool.dot_path, "Also write the pooled diagram as DOT to this file");
    pool_cmd->add_flag("--with-distributions", pool.with_distributions, "Linearly pool exogenous root distributions");

    CheckOptions check;
    auto* check_cmd = app.add_subcommand("check-fair", "Check counterfactual fairness of a model or pooling report");
    check_cmd->add_option("file", check.file, "Model document or pooling report")->required();
    check_cmd->add_option("--protected", check.protected_attrs, "Protected attributes")->delimiter(',');
    check_cmd->add_flag("--brute-force", check.brute_force, "Exact check by enumerating every context");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo comparison of the two algorithms (CSV)");
    bench_cmd->add_option("--experts", bench.params.experts, "Experts per ensemble");
    bench_cmd->add_option("--vars", bench.params.variables, "Variables per model, predictor included");
    bench_cmd->add_option("--edge-prob", bench.params.edge_prob, "Probability of each forward edge");
    bench_cmd->add_option("--trials", bench.trials, "Number of ensembles");
    bench_cmd->add_option("--seed", bench.seed, "Master seed");
    add_rule_options(bench_cmd, bench.rule);

    ExportOptions exp;
    auto* export_cmd = app.add_subcommand("export", "Export a model document or pooling report");
    export_cmd->add_option("file", exp.file, "Model document or pooling report")->required();
    export_cmd->add_option("--format", exp.format, "dot | json")->check(CLI::IsMember({"dot", "json"}));
    export_cmd->add_option("--protected", exp.protected_attrs, "Protected attributes to highlight")->delimiter(',');

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    }

    try {
        if (*validate) return cmd_validate(validate_files, out);
        if (*pool_cmd) return cmd_pool(pool, out);
        if (*check_cmd) return cmd_check_fair(check, out);
        if (*bench_cmd) return cmd_bench(bench, out, err);
        if (*export_cmd) return cmd_export(exp, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoFailure;
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) err << "error: " << v << "\n";
        return kInvalid;
    }
    return kInvalid;
}

}  // namespace fairpool::cli
