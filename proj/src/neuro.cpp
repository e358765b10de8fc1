#include "diffmod/neuro.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <string>
#include <utility>

#include "diffmod/errors.hpp"

namespace diffmod::neuro {

std::string_view to_string(LearningMode mode) {
    return mode == LearningMode::standard ? "standard" : "diffusion";
}

LearningMode parse_learning_mode(std::string_view text) {
    if (text == "standard") return LearningMode::standard;
    if (text == "diffusion") return LearningMode::diffusion;
    throw StructuralError("unknown learning mode '" + std::string(text) + "'");
}

int layer_of(int node_id) {
    int first = 0;
    for (int layer = 0; layer < kLayerCount; ++layer) {
        first += kLayerSizes[static_cast<std::size_t>(layer)];
        if (node_id < first) return layer;
    }
    throw StructuralError("node id " + std::to_string(node_id) + " outside the fixed topology");
}

bool is_input(int node_id) { return node_id >= 0 && node_id < kInputCount; }

bool is_output(int node_id) { return node_id == kSummerOutput || node_id == kWinterOutput; }

std::vector<Point> default_layout() {
    std::vector<Point> layout;
    layout.reserve(kNodeCount);
    for (int layer = 0; layer < kLayerCount; ++layer) {
        const int size = kLayerSizes[static_cast<std::size_t>(layer)];
        for (int k = 0; k < size; ++k) {
            const double x = size == 1 ? 0.0 : -3.0 + 6.0 * k / (size - 1);
            layout.push_back({x, static_cast<double>(layer)});
        }
    }
    return layout;
}

std::vector<PointSource> default_point_sources() {
    return {PointSource{{-3.0, 2.0}}, PointSource{{3.0, 2.0}}};
}

Genome make_empty_genome(LearningMode mode, std::span<const Point> layout) {
    std::vector<Point> fallback;
    if (layout.empty()) {
        fallback = default_layout();
        layout = fallback;
    }
    if (layout.size() != kNodeCount) {
        throw StructuralError("layout needs " + std::to_string(kNodeCount) + " positions, got " +
                              std::to_string(layout.size()));
    }
    Genome genome;
    genome.mode = mode;
    for (int id = 0; id < kNodeCount; ++id) {
        genome.nodes.push_back(NodeGene{id, layer_of(id), layout[static_cast<std::size_t>(id)], 0.0, 1.0});
    }
    if (mode == LearningMode::diffusion) genome.point_sources = default_point_sources();
    return genome;
}

namespace {

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

}  // namespace

void validate(const Genome& genome, double weight_limit) {
    if (genome.nodes.size() != kNodeCount) {
        throw StructuralError("genome has " + std::to_string(genome.nodes.size()) + " nodes, expected " +
                              std::to_string(kNodeCount));
    }
    for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
        const NodeGene& n = genome.nodes[i];
        if (n.id != static_cast<int>(i)) throw StructuralError("node ids must equal their index");
        if (n.layer != layer_of(n.id)) {
            throw StructuralError("node " + std::to_string(n.id) + " sits in layer " + std::to_string(n.layer) +
                                  ", expected " + std::to_string(layer_of(n.id)));
        }
        if (!in_range(n.bias, -1.0, 1.0)) throw StructuralError("bias of node " + std::to_string(n.id) + " out of [-1,1]");
        if (!in_range(n.modul, 0.0, 1.0)) throw StructuralError("modul of node " + std::to_string(n.id) + " out of [0,1]");
        if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
            throw StructuralError("node " + std::to_string(n.id) + " has a non-finite position");
        }
    }
    std::array<std::array<bool, kNodeCount>, kNodeCount> seen{};
    for (const ConnectionGene& c : genome.connections) {
        if (c.source < 0 || c.source >= kNodeCount || c.target < 0 || c.target >= kNodeCount) {
            throw StructuralError("connection endpoint outside the node range");
        }
        if (layer_of(c.source) >= layer_of(c.target)) {
            throw StructuralError("connection " + std::to_string(c.source) + "->" + std::to_string(c.target) +
                                  " is not feed-forward");
        }
        bool& present = seen[static_cast<std::size_t>(c.source)][static_cast<std::size_t>(c.target)];
        if (present) {
            throw StructuralError("duplicate connection " + std::to_string(c.source) + "->" +
                                  std::to_string(c.target));
        }
        present = true;
        if (!in_range(c.weight, -weight_limit, weight_limit)) {
            throw StructuralError("weight of " + std::to_string(c.source) + "->" + std::to_string(c.target) +
                                  " outside the clamp range");
        }
    }
    const std::size_t expected_sources = genome.mode == LearningMode::diffusion ? 2 : 0;
    if (genome.point_sources.size() != expected_sources) {
        throw StructuralError(std::string(to_string(genome.mode)) + " mode needs " +
                              std::to_string(expected_sources) + " point sources");
    }
}

bool is_modulatory(const Genome& genome, int node_id) {
    if (genome.mode != LearningMode::standard) return false;
    if (is_input(node_id) || is_output(node_id)) return false;
    return genome.nodes[static_cast<std::size_t>(node_id)].modul < kModulatoryThreshold;
}

double gaussian_falloff(double distance, double sigma, double radius) {
    if (distance > radius) return 0.0;
    const double two_var = 2.0 * sigma * sigma;
    return std::exp(-2.0) / std::sqrt(two_var * std::numbers::pi) * std::exp(-distance * distance / two_var);
}

Network::Network(const Genome& genome, double weight_limit)
    : mode_(genome.mode),
      weight_limit_(weight_limit),
      nodes_(genome.nodes),
      connections_(genome.connections),
      sources_(genome.point_sources) {
    validate(genome, weight_limit);

    const std::size_t n = nodes_.size();
    weights_.reserve(connections_.size());
    for (const ConnectionGene& c : connections_) weights_.push_back(c.weight);

    modulatory_.assign(n, 0);
    for (int id = 0; id < node_count(); ++id) modulatory_[static_cast<std::size_t>(id)] = is_modulatory(genome, id) ? 1 : 0;

    for (int id = kInputCount; id < node_count(); ++id) order_.push_back(id);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return nodes_[static_cast<std::size_t>(a)].layer < nodes_[static_cast<std::size_t>(b)].layer; });

    std::vector<std::vector<InEdge>> regular(n);
    std::vector<std::vector<InEdge>> modulating(n);
    for (int ci = 0; ci < connection_count(); ++ci) {
        const ConnectionGene& c = connections_[static_cast<std::size_t>(ci)];
        auto& bucket = modulatory(c.source) ? modulating : regular;
        bucket[static_cast<std::size_t>(c.target)].push_back({ci, c.source});
    }
    auto flatten = [n](const std::vector<std::vector<InEdge>>& lists, std::vector<int>& offset, std::vector<InEdge>& flat) {
        offset.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            offset[i + 1] = offset[i] + static_cast<int>(lists[i].size());
            flat.insert(flat.end(), lists[i].begin(), lists[i].end());
        }
    };
    flatten(regular, regular_offset_, regular_in_);
    flatten(modulating, modulatory_offset_, modulatory_in_);
    regular_position_.assign(connections_.size(), -1);
    for (std::size_t e = 0; e < regular_in_.size(); ++e) {
        regular_position_[static_cast<std::size_t>(regular_in_[e].connection)] = static_cast<int>(e);
        regular_weight_.push_back(weights_[static_cast<std::size_t>(regular_in_[e].connection)]);
    }

    for (const PointSource& source : sources_) {
        std::vector<double> g(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) g[i] = gaussian_falloff(distance(nodes_[i].position, source.position), source.sigma, source.radius);
        falloff_.push_back(std::move(g));
        source_activation_.push_back(source.activation);
    }

    for (int k = 0; k < 2; ++k) {
        const int output = k == 0 ? kSummerOutput : kWinterOutput;
        std::vector<char> needed(n, 0);
        needed.at(static_cast<std::size_t>(output)) = 1;
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            if (!needed[static_cast<std::size_t>(*it)]) continue;
            for (int e = regular_offset_[static_cast<std::size_t>(*it)]; e < regular_offset_[static_cast<std::size_t>(*it) + 1]; ++e) {
                needed[static_cast<std::size_t>(regular_in_[static_cast<std::size_t>(e)].source)] = 1;
            }
        }
        for (int id : order_) {
            if (needed[static_cast<std::size_t>(id)]) output_cone_[static_cast<std::size_t>(k)].push_back(id);
        }
    }

    state_.activation.assign(n, 0.0);
    state_.mod_signal.assign(n, 0.0);
    deltas_.assign(connections_.size(), 0.0);
}

void Network::set_weight(int index, double weight) {
    const double w = std::clamp(weight, -weight_limit_, weight_limit_);
    weights_.at(static_cast<std::size_t>(index)) = w;
    const int e = regular_position_[static_cast<std::size_t>(index)];
    if (e >= 0) regular_weight_[static_cast<std::size_t>(e)] = w;
}

double Network::node_input(int node_id) const {
    const auto i = static_cast<std::size_t>(node_id);
    const double* a = state_.activation.data();
    double sum = 0.0;
    for (auto e = static_cast<std::size_t>(regular_offset_[i]); e < static_cast<std::size_t>(regular_offset_[i + 1]); ++e) {
        sum += regular_weight_[e] * a[regular_in_[e].source];
    }
    return sum + nodes_[i].bias;
}

const ActivationState& Network::activate(std::span<const double> inputs) {
    if (inputs.size() != kInputCount) throw StructuralError("network expects exactly 5 inputs");
    std::copy(inputs.begin(), inputs.end(), state_.activation.begin());
    for (int id : order_) state_.activation[static_cast<std::size_t>(id)] = squash(node_input(id));
    return state_;
}

double Network::activate_output(int output_node, std::span<const double> inputs) {
    if (inputs.size() != kInputCount) throw StructuralError("network expects exactly 5 inputs");
    if (!is_output(output_node)) throw StructuralError("activate_output needs an output node");
    std::copy(inputs.begin(), inputs.end(), state_.activation.begin());
    for (int id : output_cone_[output_node == kSummerOutput ? 0 : 1]) {
        state_.activation[static_cast<std::size_t>(id)] = squash(node_input(id));
    }
    return state_.activation[static_cast<std::size_t>(output_node)];
}

void Network::set_point_source_activations(std::span<const double> activations) {
    if (activations.size() != sources_.size()) {
        throw StructuralError("expected " + std::to_string(sources_.size()) + " point-source activations");
    }
    std::copy(activations.begin(), activations.end(), source_activation_.begin());
}

const ActivationState& Network::compute_modulation() {
    const std::size_t n = nodes_.size();
    if (mode_ == LearningMode::diffusion) {
        for (std::size_t i = 0; i < n; ++i) {
            double x = 0.0;
            for (std::size_t k = 0; k < falloff_.size(); ++k) x += source_activation_[k] * falloff_[k][i];
            state_.mod_signal[i] = x == 0.0 ? 0.0 : squash(x);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int e = modulatory_offset_[i]; e < modulatory_offset_[i + 1]; ++e) {
                const InEdge& edge = modulatory_in_[static_cast<std::size_t>(e)];
                sum += weights_[static_cast<std::size_t>(edge.connection)] * state_.activation[static_cast<std::size_t>(edge.source)];
            }
            state_.mod_signal[i] = squash(sum);
        }
    }
    return state_;
}

std::span<const double> Network::apply_plasticity(double learning_rate) {
    std::fill(deltas_.begin(), deltas_.end(), 0.0);
    auto update = [&](const InEdge& edge, double factor) {
        const auto c = static_cast<std::size_t>(edge.connection);
        const double delta = factor * state_.activation[static_cast<std::size_t>(edge.source)];
        deltas_[c] = delta;
        weights_[c] = std::clamp(weights_[c] + delta, -weight_limit_, weight_limit_);
        const int e = regular_position_[c];
        if (e >= 0) regular_weight_[static_cast<std::size_t>(e)] = weights_[c];
    };
    for (int id : order_) {
        const auto i = static_cast<std::size_t>(id);
        if (modulatory_[i]) continue;
        const double factor = learning_rate * state_.mod_signal[i] * state_.activation[i];
        if (factor == 0.0) continue;
        for (int e = regular_offset_[i]; e < regular_offset_[i + 1]; ++e) update(regular_in_[static_cast<std::size_t>(e)], factor);
        for (int e = modulatory_offset_[i]; e < modulatory_offset_[i + 1]; ++e) update(modulatory_in_[static_cast<std::size_t>(e)], factor);
    }
    return deltas_;
}

Genome Network::to_genome() const {
    Genome genome;
    genome.mode = mode_;
    genome.nodes = nodes_;
    genome.connections = connections_;
    for (std::size_t c = 0; c < connections_.size(); ++c) genome.connections[c].weight = weights_[c];
    genome.point_sources = sources_;
    return genome;
}

double modulatory_signal(const Network& network, int node_id, const ActivationState& state,
                         std::span<const PointSource> point_sources) {
    const NodeGene& node = network.node(node_id);
    if (network.mode() == LearningMode::diffusion) {
        double x = 0.0;
        for (const PointSource& s : point_sources) {
            x += s.activation * gaussian_falloff(distance(node.position, s.position), s.sigma, s.radius);
        }
        return squash(x);
    }
    double sum = 0.0;
    for (int c = 0; c < network.connection_count(); ++c) {
        const ConnectionGene& gene = network.connection(c);
        if (gene.target != node_id || !network.modulatory(gene.source)) continue;
        sum += network.weights()[static_cast<std::size_t>(c)] * state.activation[static_cast<std::size_t>(gene.source)];
    }
    return squash(sum);
}

}  // namespace diffmod::neuro
