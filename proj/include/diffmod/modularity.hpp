#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace diffmod::modularity {

/// Unweighted directed graph over the endpoints of its edges. Node ids are
/// kept sorted; edges refer to positions in `nodes`.
class DirectedGraph {
public:
    DirectedGraph() = default;
    /// Edges given as (source id, target id). Self-loops and repeated edges
    /// raise StructuralError.
    explicit DirectedGraph(std::span<const std::pair<int, int>> edges);

    const std::vector<int>& nodes() const { return nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int in_degree(int index) const { return in_[static_cast<std::size_t>(index)]; }
    int out_degree(int index) const { return out_[static_cast<std::size_t>(index)]; }

private:
    std::vector<int> nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> in_;
    std::vector<int> out_;
};

/// Community of each node position, ids contiguous from 0.
using Partition = std::vector<int>;

/// Relabels communities by order of first appearance.
Partition canonical(std::span<const int> partition);

/// Directed modularity. Throws StructuralError for a graph without edges or a
/// partition of the wrong length.
double q_score(const DirectedGraph& graph, std::span<const int> partition);

struct PartitionResult {
    Partition partition;
    double q = 0.0;
};

inline constexpr int kExhaustiveLimit = 12;

/// Exact optimum over every partition; ties resolve to the lexicographically
/// smallest canonical partition. Throws CapacityError above 12 nodes.
PartitionResult exhaustive_partition(const DirectedGraph& graph);

/// Greedy agglomeration then single-node moves, plus `restarts` runs from
/// random partitions; best of all runs, ties to the smallest canonical
/// partition.
PartitionResult heuristic_partition(const DirectedGraph& graph, std::uint64_t seed, int restarts = 16);

/// Exhaustive up to 12 nodes, heuristic above.
PartitionResult best_partition(const DirectedGraph& graph, std::uint64_t seed, int restarts = 16);

}  // namespace diffmod::modularity
