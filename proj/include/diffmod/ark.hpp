#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "diffmod/foraging.hpp"
#include "diffmod/neuro.hpp"
#include "diffmod/rng.hpp"

namespace diffmod::ark {

inline constexpr int kKnockoutCap = 20;
inline constexpr double kNoiseMargin = 1e-12;
inline constexpr double kThresholdStep = 0.01;
inline constexpr double kFitnessTolerance = 1e-9;
inline constexpr double kBiasVariance = 1e-9;

/// Node activations at every decision step of a learning-off replay.
class ActivationRecord {
public:
    ActivationRecord() = default;
    ActivationRecord(int steps, int nodes) : steps_(steps), nodes_(nodes), values_(static_cast<std::size_t>(steps) * static_cast<std::size_t>(nodes), 0.0) {}

    int steps() const { return steps_; }
    int nodes() const { return nodes_; }
    double at(int step, int node) const { return values_[index(step, node)]; }
    double& at(int step, int node) { return values_[index(step, node)]; }
    std::vector<double> column(int node) const;
    bool operator==(const ActivationRecord&) const = default;

private:
    std::size_t index(int step, int node) const {
        return static_cast<std::size_t>(step) * static_cast<std::size_t>(nodes_) + static_cast<std::size_t>(node);
    }
    int steps_ = 0;
    int nodes_ = 0;
    std::vector<double> values_;
};

/// One row per presentation: the decision-step inputs (item bits, zero
/// feedback) and the full forward pass under frozen weights.
ActivationRecord record_activations(const neuro::Genome& genome, const foraging::Environment& env,
                                    double weight_limit = neuro::kDefaultWeightLimit);

/// sqrt(sum (y - yhat)^2 / n). Throws StructuralError on length mismatch or
/// empty input.
double ser(std::span<const double> y, std::span<const double> y_hat);

struct KnockoutRow {
    std::uint32_t mask = 0;  // bit k set: connections[k] retained
    int size = 0;
    double ser = 0.0;
};

struct ArkTable {
    int node = 0;
    std::vector<int> connections;  // activation-carrying in-connections, by index
    std::vector<KnockoutRow> rows;  // SER ascending, larger size first, then mask
    double full_retention_ser() const;
};

/// In-connections of `node` whose source carries activation (modulatory
/// sources excluded), in connection-index order.
std::vector<int> activation_inputs(const neuro::Genome& genome, int node);

/// Every retained subset recomputed from the recorded source activations.
/// Throws CapacityError when the in-degree exceeds `cap`.
ArkTable knockout_table(const ActivationRecord& record, const neuro::Genome& genome, int node,
                        int cap = kKnockoutCap);

/// Smallest qualifying size, then smallest SER, then lowest mask. Throws
/// SelectionError when no row has SER <= threshold.
const KnockoutRow& select_combination(const ArkTable& table, double threshold);

/// Tables are independent of the threshold; cached per node.
class TableCache {
public:
    TableCache(const ActivationRecord& record, const neuro::Genome& genome, int cap = kKnockoutCap)
        : record_(record), genome_(genome), cap_(cap) {}
    const ArkTable& table(int node);

private:
    const ActivationRecord& record_;
    const neuro::Genome& genome_;
    int cap_;
    std::map<int, ArkTable> tables_;
};

struct FunctionalSubnetwork {
    int start = 0;
    std::vector<int> nodes;        // sorted ids
    std::vector<int> connections;  // sorted connection indices
    std::map<int, std::uint32_t> masks;  // chosen mask per analyzed node
};

/// Breadth-first from `start_output`; each node is analyzed once.
FunctionalSubnetwork trace_subnetwork(TableCache& tables, const neuro::Genome& genome, int start_output,
                                      double threshold);
FunctionalSubnetwork trace_subnetwork(const neuro::Genome& genome, const ActivationRecord& record,
                                      int start_output, double threshold);

enum class ModuleLabel { none, summer, winter, common };
std::string_view to_string(ModuleLabel label);

struct CoreFunctionalNetwork {
    double threshold = 0.0;
    double original_fitness = 0.0;
    double fitness = 0.0;
    std::vector<ModuleLabel> labels;  // per connection of the trained network
    std::vector<int> bias_nodes;
    FunctionalSubnetwork summer;
    FunctionalSubnetwork winter;
    std::optional<double> original_q;
    std::optional<double> q;  // unset when the CFN has no connections
    int thresholds_tried = 0;

    std::vector<int> connections_with(ModuleLabel label) const;
    std::vector<int> retained_connections() const;
};

/// Trained genome with only the listed connections kept.
neuro::Genome prune(const neuro::Genome& genome, std::span<const int> keep);

/// Learning-off replay fitness of a genome in an environment.
foraging::LifetimeResult testing_phase(const neuro::Genome& genome, const foraging::Environment& env,
                                       double weight_limit = neuro::kDefaultWeightLimit);

/// Non-input nodes whose recorded activation variance is below 1e-9.
std::vector<int> bias_nodes(const ActivationRecord& record);

struct CfnOptions {
    double weight_limit = neuro::kDefaultWeightLimit;
    int cap = kKnockoutCap;
    std::uint64_t partition_seed = 0;
    bool score_modularity = true;
};

/// Threshold search from the noise floor in steps of 0.01, keeping the last
/// threshold whose CFN matches the original testing fitness.
CoreFunctionalNetwork build_cfn(const neuro::Genome& trained, const foraging::Environment& env,
                                const ActivationRecord& record, const CfnOptions& options = {});

/// Assembles labels for a pair of subnetworks.
std::vector<ModuleLabel> label_connections(int connection_count, const FunctionalSubnetwork& summer,
                                           const FunctionalSubnetwork& winter);

enum class KnockoutClass { none, random, common, winter, summer };
std::string_view to_string(KnockoutClass c);

struct KnockoutResult {
    KnockoutClass knockout = KnockoutClass::none;
    bool available = true;    // false when the class had no connections
    int connection = -1;      // removed connection index
    double summer_fitness = 0.0;
    double winter_fitness = 0.0;
};

/// One uniformly chosen connection of each class removed from the trained
/// network, then the testing phase replayed. `random` draws from all
/// connections of the trained network.
std::vector<KnockoutResult> one_connection_knockout(const CoreFunctionalNetwork& cfn, const neuro::Genome& trained,
                                                    const foraging::Environment& env, Rng& rng,
                                                    double weight_limit = neuro::kDefaultWeightLimit);

}  // namespace diffmod::ark
