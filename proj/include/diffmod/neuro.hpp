#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace diffmod::neuro {

// Fixed topology: 5 inputs (3 food bits, summer feedback, winter feedback),
// hidden layers of 12, 8 and 6 nodes, then the summer and winter outputs.
inline constexpr std::array<int, 5> kLayerSizes{5, 12, 8, 6, 2};
inline constexpr int kLayerCount = static_cast<int>(kLayerSizes.size());
inline constexpr int kNodeCount = 33;
inline constexpr int kInputCount = 5;
inline constexpr int kFoodInputCount = 3;
inline constexpr int kSummerFeedbackInput = 3;
inline constexpr int kWinterFeedbackInput = 4;
inline constexpr int kSummerOutput = 31;
inline constexpr int kWinterOutput = 32;

inline constexpr double kModulatoryThreshold = 0.4;
inline constexpr double kSteepness = 32.0;
inline constexpr double kSourceRadius = 1.5;
inline constexpr double kSourceSigma = 0.5;
inline constexpr double kDefaultWeightLimit = 1.0;
inline constexpr double kDefaultLearningRate = 0.002;

enum class LearningMode { standard, diffusion };

std::string_view to_string(LearningMode mode);
LearningMode parse_learning_mode(std::string_view text);

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct NodeGene {
    int id = 0;
    int layer = 0;
    Point position;
    double bias = 0.0;   // [-1, 1]
    double modul = 1.0;  // [0, 1]; < 0.4 marks a hidden node modulatory in standard mode
    bool operator==(const NodeGene&) const = default;
};

struct ConnectionGene {
    int source = 0;
    int target = 0;
    double weight = 0.0;
    bool operator==(const ConnectionGene&) const = default;
};

struct PointSource {
    Point position;
    double activation = 0.0;
    double radius = kSourceRadius;
    double sigma = kSourceSigma;
    bool operator==(const PointSource&) const = default;
};

/// The evolved individual. Node ids equal their index in `nodes`.
struct Genome {
    LearningMode mode = LearningMode::diffusion;
    std::vector<NodeGene> nodes;
    std::vector<ConnectionGene> connections;
    std::vector<PointSource> point_sources;  // empty in standard mode
    bool operator==(const Genome&) const = default;
};

/// Layer index of a node id under the fixed layer sizes.
int layer_of(int node_id);
bool is_input(int node_id);
bool is_output(int node_id);

/// Layer l at y = l; nodes of a layer evenly spaced over x in [-3, 3].
std::vector<Point> default_layout();

/// Summer source at (-3, 2), winter source at (3, 2).
std::vector<PointSource> default_point_sources();

/// All 33 nodes placed by `layout` (default when empty), zero bias, modul 1
/// and no connections.
Genome make_empty_genome(LearningMode mode, std::span<const Point> layout = {});

/// Throws StructuralError when node layers, ids, ranges, edge direction or
/// edge uniqueness are violated. `weight_limit` bounds |weight|.
void validate(const Genome& genome, double weight_limit = kDefaultWeightLimit);

/// Hidden node with modul below the threshold, in standard mode only.
bool is_modulatory(const Genome& genome, int node_id);

/// 2 / (1 + e^(-32x)) - 1. Saturates to exactly +-1 once the exponential can
/// no longer change the rounded result.
inline double squash(double x) {
    const double z = kSteepness * x;
    if (z > 40.0) return 1.0;
    if (z < -40.0) return -1.0;
    return 2.0 / (1.0 + std::exp(-z)) - 1.0;
}

/// Truncated Gaussian concentration of a point source at `distance`.
double gaussian_falloff(double distance, double sigma = kSourceSigma, double radius = kSourceRadius);

struct ActivationState {
    std::vector<double> activation;  // raw inputs for input nodes
    std::vector<double> mod_signal;  // m_i
};

/// Runtime phenotype of a Genome: feed-forward activation, modulation and
/// Hebbian plasticity. Mutated in place during a lifetime; not thread-safe.
///
/// A step is: activate(inputs), set the point-source activations,
/// compute_modulation(), then apply_plasticity() which updates every weight
/// simultaneously from the pre-update values.
class Network {
public:
    explicit Network(const Genome& genome, double weight_limit = kDefaultWeightLimit);

    LearningMode mode() const { return mode_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int connection_count() const { return static_cast<int>(connections_.size()); }
    double weight_limit() const { return weight_limit_; }

    bool modulatory(int node_id) const { return modulatory_[static_cast<std::size_t>(node_id)] != 0; }
    const NodeGene& node(int node_id) const { return nodes_[static_cast<std::size_t>(node_id)]; }
    const ConnectionGene& connection(int index) const { return connections_[static_cast<std::size_t>(index)]; }
    std::span<const double> weights() const { return weights_; }
    void set_weight(int index, double weight);

    /// Inputs must have exactly five entries.
    const ActivationState& activate(std::span<const double> inputs);

    /// Activation of one output node, computing only its ancestors. Other
    /// entries of the state keep stale values.
    double activate_output(int output_node, std::span<const double> inputs);

    /// Diffusion mode: one value per point source (summer, winter).
    void set_point_source_activations(std::span<const double> activations);
    std::span<const double> point_source_activations() const { return source_activation_; }

    const ActivationState& compute_modulation();

    /// dw_ij = eta * m_i * a_i * a_j for every connection into a non-input,
    /// non-modulatory node, then clamped. Returns the raw deltas indexed by
    /// connection.
    std::span<const double> apply_plasticity(double learning_rate);

    const ActivationState& state() const { return state_; }

    /// Genome with the current (possibly learned) weights.
    Genome to_genome() const;

private:
    struct InEdge {
        int connection;
        int source;
    };

    LearningMode mode_;
    double weight_limit_;
    std::vector<NodeGene> nodes_;
    std::vector<ConnectionGene> connections_;
    std::vector<PointSource> sources_;
    std::vector<double> weights_;
    std::vector<char> modulatory_;
    std::vector<int> order_;  // non-input nodes in layer order

    // Per-node incoming edges, split by whether the source is modulatory.
    std::vector<int> regular_offset_;
    std::vector<InEdge> regular_in_;
    std::vector<double> regular_weight_;  // weights in regular_in_ order
    std::vector<int> regular_position_;   // connection -> index into regular_in_, or -1
    std::vector<int> modulatory_offset_;
    std::vector<InEdge> modulatory_in_;

    std::vector<std::vector<double>> falloff_;  // [source][node]
    std::vector<double> source_activation_;
    std::array<std::vector<int>, 2> output_cone_;  // order_ restricted to ancestors of each output

    ActivationState state_;
    std::vector<double> deltas_;

    double node_input(int node_id) const;
};

/// Modulatory signal of one node. Standard mode squashes the input arriving
/// over connections from modulatory nodes; diffusion mode squashes the
/// falloff-weighted point-source activations.
double modulatory_signal(const Network& network, int node_id, const ActivationState& state,
                         std::span<const PointSource> point_sources);

}  // namespace diffmod::neuro
