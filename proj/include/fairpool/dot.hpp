#pragma once

#include <sstream>
#include <string>

#include "fairpool/diagram.hpp"

namespace fairpool {

/// Vertex roles highlighted in DOT output.
struct DotAnnotations {
    std::string predictor;
    VertexSet protected_attributes;
    VertexSet removed;
};

inline std::string dot_quote(const std::string& id) {
    std::string out = "\"";
    for (char c : id) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

/// Emits a digraph with vertices and edges in lexicographic order. Removed
/// vertices and the edges touching them are drawn dashed and grey.
inline std::string to_dot(const CausalDiagram& d, const DotAnnotations& notes, const std::string& name = "causal") {
    std::ostringstream out;
    out << "digraph " << dot_quote(name) << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=ellipse];\n";
    for (const auto& [v, kind] : d.vertices()) {
        std::string attrs;
        auto add = [&](const std::string& a) { attrs += (attrs.empty() ? "" : ", ") + a; };
        const std::string quoted = dot_quote(v);
        std::string label = quoted.substr(1, quoted.size() - 2);
        bool relabel = false;
        if (v == notes.predictor) add("shape=doublecircle");
        if (kind == VariableKind::exogenous) add("shape=box");
        if (notes.protected_attributes.count(v)) {
            add("style=filled");
            add("fillcolor=\"#f4cccc\"");
            label += "\\n(protected)";
            relabel = true;
        }
        if (notes.removed.count(v)) {
            add(notes.protected_attributes.count(v) ? "color=gray" : "style=dashed, color=gray");
            label += "\\n(removed)";
            relabel = true;
        }
        if (relabel) add("label=\"" + label + "\"");
        out << "  " << quoted;
        if (!attrs.empty()) out << " [" << attrs << "]";
        out << ";\n";
    }
    for (const auto& e : d.edges()) {
        out << "  " << dot_quote(e.source) << " -> " << dot_quote(e.target);
        if (notes.removed.count(e.source) || notes.removed.count(e.target)) out << " [style=dashed, color=gray]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace fairpool
