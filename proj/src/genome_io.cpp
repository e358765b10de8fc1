#include "diffmod/genome_io.hpp"

#include "diffmod/errors.hpp"

namespace diffmod::neuro {

using nlohmann::json;

json genome_to_json(const Genome& genome) {
    json nodes = json::array();
    for (const NodeGene& n : genome.nodes) {
        nodes.push_back({n.id, n.layer, n.position.x, n.position.y, n.bias, n.modul});
    }
    json connections = json::array();
    for (const ConnectionGene& c : genome.connections) connections.push_back({c.source, c.target, c.weight});
    json sources = json::array();
    for (const PointSource& s : genome.point_sources) {
        sources.push_back({s.position.x, s.position.y, s.radius, s.sigma});
    }
    return json{{"mode", to_string(genome.mode)},
                {"nodes", std::move(nodes)},
                {"connections", std::move(connections)},
                {"point_sources", std::move(sources)}};
}

Genome genome_from_json(const json& doc) {
    try {
        Genome genome;
        genome.mode = parse_learning_mode(doc.at("mode").get<std::string>());
        for (const json& n : doc.at("nodes")) {
            genome.nodes.push_back(NodeGene{n.at(0).get<int>(), n.at(1).get<int>(),
                                            Point{n.at(2).get<double>(), n.at(3).get<double>()},
                                            n.at(4).get<double>(), n.at(5).get<double>()});
        }
        for (const json& c : doc.at("connections")) {
            genome.connections.push_back(ConnectionGene{c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<double>()});
        }
        for (const json& s : doc.at("point_sources")) {
            PointSource source;
            source.position = Point{s.at(0).get<double>(), s.at(1).get<double>()};
            source.radius = s.at(2).get<double>();
            source.sigma = s.at(3).get<double>();
            genome.point_sources.push_back(source);
        }
        return genome;
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed genome document: ") + e.what());
    }
}

std::string serialize_genome(const Genome& genome) { return genome_to_json(genome).dump(); }

Genome parse_genome(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("genome is not valid JSON: ") + e.what());
    }
    return genome_from_json(doc);
}

}  // namespace diffmod::neuro
