#include "diffmod/dot.hpp"

#include <algorithm>
#include <sstream>

#include "diffmod/csv.hpp"

namespace diffmod::dot {

namespace {

using csv::format_number;

std::string quoted(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string node_name(int id) { return "n" + std::to_string(id); }

const char* edge_color(ark::ModuleLabel label) {
    switch (label) {
        case ark::ModuleLabel::summer:
            return "red";
        case ark::ModuleLabel::winter:
            return "blue";
        case ark::ModuleLabel::common:
            return "green";
        case ark::ModuleLabel::none:
            break;
    }
    return "gray50";
}

}  // namespace

std::string to_dot(const neuro::Genome& genome, const ark::CoreFunctionalNetwork* cfn,
                   const std::vector<std::pair<std::string, std::string>>& attributes) {
    std::ostringstream out;
    out << "digraph network {\n";
    out << "  graph [mode=" << quoted(std::string(neuro::to_string(genome.mode))) << ", splines=true";
    for (const auto& [key, value] : attributes) out << ", " << key << "=" << quoted(value);
    out << "];\n";
    out << "  node [shape=circle, fixedsize=true, width=0.4, fontsize=10];\n";

    constexpr double scale = 1.5;
    for (const neuro::NodeGene& node : genome.nodes) {
        out << "  " << node_name(node.id) << " [label=" << quoted(std::to_string(node.id))
            << ", pos=" << quoted(format_number(node.position.x * scale) + "," + format_number(node.position.y * scale) + "!");
        if (neuro::is_modulatory(genome, node.id)) out << ", penwidth=3";
        out << "];\n";
    }
    for (std::size_t k = 0; k < genome.point_sources.size(); ++k) {
        const neuro::PointSource& ps = genome.point_sources[k];
        out << "  ps" << k << " [shape=point, width=0.2, color=purple, label=\"\", pos="
            << quoted(format_number(ps.position.x * scale) + "," + format_number(ps.position.y * scale) + "!") << "];\n";
    }

    for (std::size_t c = 0; c < genome.connections.size(); ++c) {
        const neuro::ConnectionGene& gene = genome.connections[c];
        const ark::ModuleLabel label = cfn != nullptr && c < cfn->labels.size() ? cfn->labels[c] : ark::ModuleLabel::none;
        if (cfn != nullptr && label == ark::ModuleLabel::none) continue;
        const bool thin = cfn != nullptr &&
                          std::find(cfn->bias_nodes.begin(), cfn->bias_nodes.end(), gene.source) != cfn->bias_nodes.end();
        out << "  " << node_name(gene.source) << " -> " << node_name(gene.target) << " [color=" << edge_color(label)
            << ", weight_value=" << quoted(format_number(gene.weight)) << ", penwidth=" << (thin ? "0.5" : "1.5")
            << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace diffmod::dot
