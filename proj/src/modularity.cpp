#include "diffmod/modularity.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "diffmod/errors.hpp"
#include "diffmod/rng.hpp"

namespace diffmod::modularity {

DirectedGraph::DirectedGraph(std::span<const std::pair<int, int>> edges) {
    std::set<std::pair<int, int>> seen;
    for (const auto& [s, t] : edges) {
        if (s == t) throw StructuralError("self-loop on node " + std::to_string(s));
        if (!seen.emplace(s, t).second) throw StructuralError("repeated edge");
        nodes_.push_back(s);
        nodes_.push_back(t);
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    auto position = [&](int id) {
        return static_cast<int>(std::lower_bound(nodes_.begin(), nodes_.end(), id) - nodes_.begin());
    };
    in_.assign(nodes_.size(), 0);
    out_.assign(nodes_.size(), 0);
    for (const auto& [s, t] : edges) {
        const int a = position(s);
        const int b = position(t);
        edges_.emplace_back(a, b);
        ++out_[static_cast<std::size_t>(a)];
        ++in_[static_cast<std::size_t>(b)];
    }
}

Partition canonical(std::span<const int> partition) {
    Partition out(partition.size());
    std::vector<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < partition.size(); ++i) {
        auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == partition[i]; });
        if (it == seen.end()) {
            seen.emplace_back(partition[i], static_cast<int>(seen.size()));
            out[i] = seen.back().second;
        } else {
            out[i] = it->second;
        }
    }
    return out;
}

namespace {

// m^2 * Q as an exact integer: sum over communities of m*e_c - in_c*out_c.
std::int64_t scaled_q(const DirectedGraph& graph, std::span<const int> partition) {
    const std::size_t n = static_cast<std::size_t>(graph.node_count());
    const int k = n == 0 ? 0 : *std::max_element(partition.begin(), partition.end()) + 1;
    std::vector<std::int64_t> e(static_cast<std::size_t>(k), 0);
    std::vector<std::int64_t> in(static_cast<std::size_t>(k), 0);
    std::vector<std::int64_t> out(static_cast<std::size_t>(k), 0);
    for (const auto& [a, b] : graph.edges()) {
        if (partition[static_cast<std::size_t>(a)] == partition[static_cast<std::size_t>(b)]) {
            ++e[static_cast<std::size_t>(partition[static_cast<std::size_t>(a)])];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(partition[i]);
        in[c] += graph.in_degree(static_cast<int>(i));
        out[c] += graph.out_degree(static_cast<int>(i));
    }
    const std::int64_t m = graph.edge_count();
    std::int64_t total = 0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) total += m * e[c] - in[c] * out[c];
    return total;
}

double to_q(const DirectedGraph& graph, std::int64_t scaled) {
    const auto m = static_cast<double>(graph.edge_count());
    return static_cast<double>(scaled) / (m * m);
}

void require_edges(const DirectedGraph& graph) {
    if (graph.edge_count() == 0) throw StructuralError("modularity is undefined for a graph without edges");
}

// Symmetric link counts between node positions.
std::vector<std::vector<int>> link_matrix(const DirectedGraph& graph) {
    const auto n = static_cast<std::size_t>(graph.node_count());
    std::vector<std::vector<int>> links(n, std::vector<int>(n, 0));
    for (const auto& [a, b] : graph.edges()) {
        ++links[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        ++links[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
    }
    return links;
}

// Mutable partition with per-community sums for O(n) move evaluation.
class Clustering {
public:
    Clustering(const DirectedGraph& graph, const std::vector<std::vector<int>>& links, Partition start)
        : graph_(graph), links_(links), label_(std::move(start)) {
        const std::size_t n = label_.size();
        in_.assign(n, 0);
        out_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            in_[static_cast<std::size_t>(label_[i])] += graph.in_degree(static_cast<int>(i));
            out_[static_cast<std::size_t>(label_[i])] += graph.out_degree(static_cast<int>(i));
        }
    }

    const Partition& labels() const { return label_; }

    // Change in m^2 * Q when node v moves to community c.
    std::int64_t move_gain(std::size_t v, int c) const {
        const int from = label_[v];
        if (from == c) return 0;
        const std::int64_t m = graph_.edge_count();
        const std::int64_t kin = graph_.in_degree(static_cast<int>(v));
        const std::int64_t kout = graph_.out_degree(static_cast<int>(v));
        std::int64_t to_from = 0;
        std::int64_t to_c = 0;
        for (std::size_t u = 0; u < label_.size(); ++u) {
            if (u == v) continue;
            if (label_[u] == from) to_from += links_[v][u];
            if (label_[u] == c) to_c += links_[v][u];
        }
        const auto f = static_cast<std::size_t>(from);
        const auto t = static_cast<std::size_t>(c);
        const std::int64_t before = -in_[f] * out_[f] - in_[t] * out_[t];
        const std::int64_t after = -(in_[f] - kin) * (out_[f] - kout) - (in_[t] + kin) * (out_[t] + kout);
        return m * (to_c - to_from) + after - before;
    }

    void move(std::size_t v, int c) {
        const auto f = static_cast<std::size_t>(label_[v]);
        in_[f] -= graph_.in_degree(static_cast<int>(v));
        out_[f] -= graph_.out_degree(static_cast<int>(v));
        label_[v] = c;
        in_[static_cast<std::size_t>(c)] += graph_.in_degree(static_cast<int>(v));
        out_[static_cast<std::size_t>(c)] += graph_.out_degree(static_cast<int>(v));
    }

    // Change in m^2 * Q when communities a and b merge.
    std::int64_t merge_gain(int a, int b) const {
        std::int64_t between = 0;
        for (std::size_t u = 0; u < label_.size(); ++u) {
            if (label_[u] != a) continue;
            for (std::size_t w = 0; w < label_.size(); ++w) {
                if (label_[w] == b) between += links_[u][w];
            }
        }
        const auto x = static_cast<std::size_t>(a);
        const auto y = static_cast<std::size_t>(b);
        return graph_.edge_count() * between - in_[x] * out_[y] - in_[y] * out_[x];
    }

    void merge(int a, int b) {
        for (std::size_t u = 0; u < label_.size(); ++u) {
            if (label_[u] == b) move(u, a);
        }
    }

    int empty_community() const {
        std::vector<char> used(label_.size(), 0);
        for (int c : label_) used[static_cast<std::size_t>(c)] = 1;
        return static_cast<int>(std::find(used.begin(), used.end(), 0) - used.begin());
    }

    std::vector<int> communities() const {
        std::vector<int> ids(label_.begin(), label_.end());
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        return ids;
    }

private:
    const DirectedGraph& graph_;
    const std::vector<std::vector<int>>& links_;
    Partition label_;
    std::vector<std::int64_t> in_;
    std::vector<std::int64_t> out_;
};

void agglomerate(Clustering& clustering) {
    while (true) {
        const auto ids = clustering.communities();
        std::int64_t best = 0;
        std::pair<int, int> pick{-1, -1};
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                const std::int64_t gain = clustering.merge_gain(ids[i], ids[j]);
                if (gain > best) {
                    best = gain;
                    pick = {ids[i], ids[j]};
                }
            }
        }
        if (pick.first < 0) return;
        clustering.merge(pick.first, pick.second);
    }
}

// Single-node moves and pairwise merges until neither improves.
void refine(Clustering& clustering, Rng& rng) {
    const std::size_t n = clustering.labels().size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    bool improved = true;
    while (improved) {
        improved = false;
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t v : order) {
            auto candidates = clustering.communities();
            const int fresh = clustering.empty_community();
            if (fresh < static_cast<int>(n)) candidates.push_back(fresh);
            std::int64_t best = 0;
            int target = -1;
            for (int c : candidates) {
                const std::int64_t gain = clustering.move_gain(v, c);
                if (gain > best) {
                    best = gain;
                    target = c;
                }
            }
            if (target >= 0) {
                clustering.move(v, target);
                improved = true;
            }
        }
        const auto ids = clustering.communities();
        for (std::size_t i = 0; i < ids.size() && !improved; ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                if (clustering.merge_gain(ids[i], ids[j]) > 0) {
                    clustering.merge(ids[i], ids[j]);
                    improved = true;
                    break;
                }
            }
        }
    }
}

}  // namespace

double q_score(const DirectedGraph& graph, std::span<const int> partition) {
    require_edges(graph);
    if (partition.size() != static_cast<std::size_t>(graph.node_count())) {
        throw StructuralError("partition length does not match the node count");
    }
    return to_q(graph, scaled_q(graph, canonical(partition)));
}

PartitionResult exhaustive_partition(const DirectedGraph& graph) {
    require_edges(graph);
    const int n = graph.node_count();
    if (n > kExhaustiveLimit) throw CapacityError(-1, n);
    const auto links = link_matrix(graph);
    const std::int64_t m = graph.edge_count();

    // Restricted-growth strings in lexicographic order with running sums.
    Partition label(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> in(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
    std::int64_t best = 0;
    bool found = false;
    Partition best_label;

    auto visit = [&](auto&& self, int v, int communities, std::int64_t total) -> void {
        if (v == n) {
            if (!found || total > best) {
                best = total;
                best_label = label;
                found = true;
            }
            return;
        }
        const auto vi = static_cast<std::size_t>(v);
        const std::int64_t kin = graph.in_degree(v);
        const std::int64_t kout = graph.out_degree(v);
        for (int c = 0; c <= communities && c < n; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            std::int64_t internal = 0;
            for (std::size_t u = 0; u < vi; ++u) {
                if (label[u] == c) internal += links[vi][u];
            }
            const std::int64_t delta = m * internal - (in[ci] + kin) * (out[ci] + kout) + in[ci] * out[ci];
            label[vi] = c;
            in[ci] += kin;
            out[ci] += kout;
            self(self, v + 1, std::max(communities, c + 1), total + delta);
            in[ci] -= kin;
            out[ci] -= kout;
        }
    };
    visit(visit, 0, 0, 0);
    return {best_label, to_q(graph, best)};
}

PartitionResult heuristic_partition(const DirectedGraph& graph, std::uint64_t seed, int restarts) {
    require_edges(graph);
    const auto links = link_matrix(graph);
    const auto n = static_cast<std::size_t>(graph.node_count());
    std::int64_t best = 0;
    Partition best_label;
    bool found = false;
    auto consider = [&](const Partition& labels) {
        Partition c = canonical(labels);
        const std::int64_t value = scaled_q(graph, c);
        if (!found || value > best || (value == best && c < best_label)) {
            best = value;
            best_label = std::move(c);
            found = true;
        }
    };

    for (int r = 0; r <= restarts; ++r) {
        Rng rng(derive_seed(seed, "partition-restart", static_cast<std::uint64_t>(r)));
        Partition start(n);
        if (r == 0) {
            std::iota(start.begin(), start.end(), 0);
        } else {
            const auto k = rng.below(n) + 1;
            for (int& c : start) c = static_cast<int>(rng.below(k));
        }
        Clustering clustering(graph, links, std::move(start));
        if (r == 0) agglomerate(clustering);
        refine(clustering, rng);
        consider(clustering.labels());
    }
    return {best_label, to_q(graph, best)};
}

PartitionResult best_partition(const DirectedGraph& graph, std::uint64_t seed, int restarts) {
    if (graph.node_count() <= kExhaustiveLimit) return exhaustive_partition(graph);
    return heuristic_partition(graph, seed, restarts);
}

}  // namespace diffmod::modularity
