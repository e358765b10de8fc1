#pragma once

#include <map>
#include <string>
#include <vector>

#include "diffmod/ark.hpp"
#include "diffmod/neuro.hpp"
#include "diffmod/rng.hpp"

namespace support {

using diffmod::neuro::Genome;

/// Diffusion network with one learning node per season: the food bits feed
/// node 25 (inside the summer source's radius) and node 30 (inside the winter
/// source's radius), which drive the summer and winter outputs. The branching
/// variant routes every food bit through a relay node shared by both paths.
Genome two_path_network(bool branching);

/// In-tree rooted at `output`: every non-root node has exactly one outgoing
/// connection, inputs are leaves.
Genome random_tree_network(diffmod::Rng& rng, int connections, int output);

/// Random layer-respecting edges among random nodes.
Genome random_small_network(diffmod::Rng& rng, int connections, diffmod::neuro::LearningMode mode);

/// Output activations over the record's input columns with only `keep`
/// connections, recomputed from scratch.
std::vector<double> repropagate(const Genome& genome, const diffmod::ark::ActivationRecord& record,
                                const std::vector<int>& keep, int output);

struct MinimalSets {
    int size = -1;
    std::vector<std::vector<int>> sets;  // every qualifying subset of that size
};

/// Exhaustive search over all connection subsets for the smallest ones whose
/// recomputed `output` trace stays within `threshold` SER of the record.
MinimalSets exhaustive_minimal(const Genome& genome, const diffmod::ark::ActivationRecord& record, int output,
                               double threshold);

struct DotEdge {
    std::string source;
    std::string target;
    std::map<std::string, std::string> attributes;
};

struct DotGraph {
    bool directed = false;
    std::string name;
    std::map<std::string, std::string> attributes;
    std::map<std::string, std::map<std::string, std::string>> nodes;
    std::vector<DotEdge> edges;
};

/// Parser for the DOT subset the exporter emits plus the usual lexical
/// rules (quoted strings with escapes, comments, optional separators).
/// Throws std::runtime_error on malformed input.
DotGraph parse_dot(const std::string& text);

}  // namespace support
