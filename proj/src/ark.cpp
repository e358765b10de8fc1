#include "diffmod/ark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diffmod/errors.hpp"
#include "diffmod/modularity.hpp"

namespace diffmod::ark {

using neuro::Genome;

std::vector<double> ActivationRecord::column(int node) const {
    std::vector<double> out(static_cast<std::size_t>(steps_));
    for (int t = 0; t < steps_; ++t) out[static_cast<std::size_t>(t)] = at(t, node);
    return out;
}

ActivationRecord record_activations(const Genome& genome, const foraging::Environment& env, double weight_limit) {
    neuro::Network network(genome, weight_limit);
    ActivationRecord record(foraging::kPresentations, network.node_count());
    for (int t = 0; t < foraging::kPresentations; ++t) {
        const auto& state = network.activate(foraging::make_inputs(env.item_at(t), 0.0, 0.0));
        for (int i = 0; i < network.node_count(); ++i) record.at(t, i) = state.activation[static_cast<std::size_t>(i)];
    }
    return record;
}

double ser(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw StructuralError("SER needs equal-length vectors");
    if (y.empty()) throw StructuralError("SER of an empty record");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(y.size()));
}

double ArkTable::full_retention_ser() const {
    const std::uint32_t full = connections.empty() ? 0U : (std::uint32_t{1} << connections.size()) - 1U;
    for (const KnockoutRow& row : rows) {
        if (row.mask == full) return row.ser;
    }
    return 0.0;
}

std::vector<int> activation_inputs(const Genome& genome, int node) {
    std::vector<int> out;
    for (std::size_t c = 0; c < genome.connections.size(); ++c) {
        const neuro::ConnectionGene& gene = genome.connections[c];
        if (gene.target == node && !neuro::is_modulatory(genome, gene.source)) out.push_back(static_cast<int>(c));
    }
    return out;
}

ArkTable knockout_table(const ActivationRecord& record, const Genome& genome, int node, int cap) {
    if (neuro::is_input(node)) throw StructuralError("input nodes have no knockout table");
    ArkTable table;
    table.node = node;
    table.connections = activation_inputs(genome, node);
    const int p = static_cast<int>(table.connections.size());
    if (p > cap || p > 31) throw CapacityError(node, p);

    const int n = record.steps();
    const auto steps = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> contribution;
    for (int c : table.connections) {
        const neuro::ConnectionGene& gene = genome.connections[static_cast<std::size_t>(c)];
        std::vector<double> column(steps);
        for (int t = 0; t < n; ++t) column[static_cast<std::size_t>(t)] = gene.weight * record.at(t, gene.source);
        contribution.push_back(std::move(column));
    }
    const std::vector<double> y = record.column(node);
    const double bias = genome.nodes[static_cast<std::size_t>(node)].bias;

    const std::uint32_t combinations = std::uint32_t{1} << p;
    table.rows.reserve(combinations);
    std::vector<double> y_hat(steps);
    std::vector<int> members;
    for (std::uint32_t mask = 0; mask < combinations; ++mask) {
        members.clear();
        for (int k = 0; k < p; ++k) {
            if (mask & (std::uint32_t{1} << k)) members.push_back(k);
        }
        for (std::size_t t = 0; t < steps; ++t) {
            double sum = 0.0;
            for (int k : members) sum += contribution[static_cast<std::size_t>(k)][t];
            y_hat[t] = neuro::squash(sum + bias);
        }
        table.rows.push_back(KnockoutRow{mask, static_cast<int>(members.size()), ser(y, y_hat)});
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const KnockoutRow& a, const KnockoutRow& b) {
        if (a.ser != b.ser) return a.ser < b.ser;
        if (a.size != b.size) return a.size > b.size;
        return a.mask < b.mask;
    });
    return table;
}

const KnockoutRow& select_combination(const ArkTable& table, double threshold) {
    const KnockoutRow* best = nullptr;
    for (const KnockoutRow& row : table.rows) {
        if (row.ser > threshold) continue;
        if (best == nullptr || row.size < best->size || (row.size == best->size && row.ser < best->ser) ||
            (row.size == best->size && row.ser == best->ser && row.mask < best->mask)) {
            best = &row;
        }
    }
    if (best == nullptr) throw SelectionError(table.node, threshold);
    return *best;
}

const ArkTable& TableCache::table(int node) {
    auto it = tables_.find(node);
    if (it == tables_.end()) it = tables_.emplace(node, knockout_table(record_, genome_, node, cap_)).first;
    return it->second;
}

FunctionalSubnetwork trace_subnetwork(TableCache& tables, const Genome& genome, int start_output, double threshold) {
    if (!neuro::is_output(start_output)) throw StructuralError("tracing starts at an output node");
    FunctionalSubnetwork sub;
    sub.start = start_output;
    std::vector<char> visited(genome.nodes.size(), 0);
    std::vector<int> queue{start_output};
    visited[static_cast<std::size_t>(start_output)] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        if (neuro::is_input(v)) continue;
        const ArkTable& table = tables.table(v);
        const KnockoutRow& row = select_combination(table, threshold);
        sub.masks[v] = row.mask;
        for (std::size_t k = 0; k < table.connections.size(); ++k) {
            if (!(row.mask & (std::uint32_t{1} << k))) continue;
            const int c = table.connections[k];
            sub.connections.push_back(c);
            const int source = genome.connections[static_cast<std::size_t>(c)].source;
            if (!visited[static_cast<std::size_t>(source)]) {
                visited[static_cast<std::size_t>(source)] = 1;
                queue.push_back(source);
            }
        }
    }
    sub.nodes = queue;
    std::sort(sub.nodes.begin(), sub.nodes.end());
    std::sort(sub.connections.begin(), sub.connections.end());
    return sub;
}

FunctionalSubnetwork trace_subnetwork(const Genome& genome, const ActivationRecord& record, int start_output,
                                      double threshold) {
    TableCache tables(record, genome);
    return trace_subnetwork(tables, genome, start_output, threshold);
}

std::string_view to_string(ModuleLabel label) {
    switch (label) {
        case ModuleLabel::none:
            return "none";
        case ModuleLabel::summer:
            return "summer";
        case ModuleLabel::winter:
            return "winter";
        case ModuleLabel::common:
            return "common";
    }
    return "?";
}

std::vector<int> CoreFunctionalNetwork::connections_with(ModuleLabel label) const {
    std::vector<int> out;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        if (labels[c] == label) out.push_back(static_cast<int>(c));
    }
    return out;
}

std::vector<int> CoreFunctionalNetwork::retained_connections() const {
    std::vector<int> out;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        if (labels[c] != ModuleLabel::none) out.push_back(static_cast<int>(c));
    }
    return out;
}

std::vector<ModuleLabel> label_connections(int connection_count, const FunctionalSubnetwork& summer,
                                           const FunctionalSubnetwork& winter) {
    std::vector<ModuleLabel> labels(static_cast<std::size_t>(connection_count), ModuleLabel::none);
    for (int c : summer.connections) labels[static_cast<std::size_t>(c)] = ModuleLabel::summer;
    for (int c : winter.connections) {
        ModuleLabel& l = labels[static_cast<std::size_t>(c)];
        l = l == ModuleLabel::summer ? ModuleLabel::common : ModuleLabel::winter;
    }
    return labels;
}

Genome prune(const Genome& genome, std::span<const int> keep) {
    Genome out = genome;
    out.connections.clear();
    std::vector<char> kept(genome.connections.size(), 0);
    for (int c : keep) kept.at(static_cast<std::size_t>(c)) = 1;
    for (std::size_t c = 0; c < genome.connections.size(); ++c) {
        if (kept[c]) out.connections.push_back(genome.connections[c]);
    }
    return out;
}

foraging::LifetimeResult testing_phase(const Genome& genome, const foraging::Environment& env, double weight_limit) {
    foraging::NetworkAgent agent(genome, neuro::kDefaultLearningRate, weight_limit);
    return foraging::run_lifetime(agent, env, false);
}

std::vector<int> bias_nodes(const ActivationRecord& record) {
    std::vector<int> out;
    for (int node = neuro::kInputCount; node < record.nodes(); ++node) {
        const std::vector<double> column = record.column(node);
        double mean = 0.0;
        for (double v : column) mean += v;
        mean /= static_cast<double>(column.size());
        double variance = 0.0;
        for (double v : column) variance += (v - mean) * (v - mean);
        variance /= static_cast<double>(column.size());
        if (variance < kBiasVariance) out.push_back(node);
    }
    return out;
}

namespace {

std::optional<double> modularity_of(const Genome& genome, std::span<const int> connections, std::uint64_t seed) {
    if (connections.empty()) return std::nullopt;
    std::vector<std::pair<int, int>> edges;
    for (int c : connections) {
        const neuro::ConnectionGene& gene = genome.connections[static_cast<std::size_t>(c)];
        edges.emplace_back(gene.source, gene.target);
    }
    const modularity::DirectedGraph graph(edges);
    return modularity::best_partition(graph, seed).q;
}

double full_retention_ser(const ActivationRecord& record, const Genome& genome, int node) {
    const std::vector<int> inputs = activation_inputs(genome, node);
    std::vector<double> y_hat(static_cast<std::size_t>(record.steps()));
    for (int t = 0; t < record.steps(); ++t) {
        double sum = 0.0;
        for (int c : inputs) {
            const neuro::ConnectionGene& gene = genome.connections[static_cast<std::size_t>(c)];
            sum += gene.weight * record.at(t, gene.source);
        }
        y_hat[static_cast<std::size_t>(t)] = neuro::squash(sum + genome.nodes[static_cast<std::size_t>(node)].bias);
    }
    return ser(record.column(node), y_hat);
}

}  // namespace

CoreFunctionalNetwork build_cfn(const Genome& trained, const foraging::Environment& env,
                                const ActivationRecord& record, const CfnOptions& options) {
    CoreFunctionalNetwork cfn;
    cfn.original_fitness = testing_phase(trained, env, options.weight_limit).fitness;
    cfn.bias_nodes = bias_nodes(record);

    double floor = 0.0;
    for (int node = neuro::kInputCount; node < static_cast<int>(trained.nodes.size()); ++node) {
        floor = std::max(floor, full_retention_ser(record, trained, node));
    }
    floor += kNoiseMargin;

    TableCache tables(record, trained, options.cap);
    const auto count = static_cast<int>(trained.connections.size());
    bool have = false;
    for (int k = 0;; ++k) {
        const double threshold = floor + kThresholdStep * k;
        if (k > 0 && threshold > 2.0 + kThresholdStep) break;
        FunctionalSubnetwork summer = trace_subnetwork(tables, trained, neuro::kSummerOutput, threshold);
        FunctionalSubnetwork winter = trace_subnetwork(tables, trained, neuro::kWinterOutput, threshold);
        std::vector<ModuleLabel> labels = label_connections(count, summer, winter);
        std::vector<int> keep;
        for (int c = 0; c < count; ++c) {
            if (labels[static_cast<std::size_t>(c)] != ModuleLabel::none) keep.push_back(c);
        }
        const double fitness = testing_phase(prune(trained, keep), env, options.weight_limit).fitness;
        cfn.thresholds_tried = k + 1;
        if (have && fitness < cfn.original_fitness - kFitnessTolerance) break;
        cfn.threshold = threshold;
        cfn.fitness = fitness;
        cfn.labels = std::move(labels);
        cfn.summer = std::move(summer);
        cfn.winter = std::move(winter);
        have = true;
        if (fitness < cfn.original_fitness - kFitnessTolerance || keep.empty()) break;
    }

    if (options.score_modularity) {
        std::vector<int> all(trained.connections.size());
        for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<int>(c);
        cfn.original_q = modularity_of(trained, all, options.partition_seed);
        cfn.q = modularity_of(trained, cfn.retained_connections(), options.partition_seed);
    }
    return cfn;
}

std::string_view to_string(KnockoutClass c) {
    switch (c) {
        case KnockoutClass::none:
            return "none";
        case KnockoutClass::random:
            return "random";
        case KnockoutClass::common:
            return "common";
        case KnockoutClass::winter:
            return "winter";
        case KnockoutClass::summer:
            return "summer";
    }
    return "?";
}

std::vector<KnockoutResult> one_connection_knockout(const CoreFunctionalNetwork& cfn, const Genome& trained,
                                                    const foraging::Environment& env, Rng& rng, double weight_limit) {
    std::vector<KnockoutResult> results;
    for (KnockoutClass kind : {KnockoutClass::none, KnockoutClass::random, KnockoutClass::common,
                               KnockoutClass::winter, KnockoutClass::summer}) {
        KnockoutResult result;
        result.knockout = kind;
        std::vector<int> candidates;
        switch (kind) {
            case KnockoutClass::none:
                break;
            case KnockoutClass::random:
                for (std::size_t c = 0; c < trained.connections.size(); ++c) candidates.push_back(static_cast<int>(c));
                break;
            case KnockoutClass::common:
                candidates = cfn.connections_with(ModuleLabel::common);
                break;
            case KnockoutClass::winter:
                candidates = cfn.connections_with(ModuleLabel::winter);
                break;
            case KnockoutClass::summer:
                candidates = cfn.connections_with(ModuleLabel::summer);
                break;
        }
        Genome genome = trained;
        if (kind != KnockoutClass::none) {
            if (candidates.empty()) {
                result.available = false;
                results.push_back(result);
                continue;
            }
            result.connection = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
            genome.connections.erase(genome.connections.begin() + result.connection);
        }
        const foraging::LifetimeResult replay = testing_phase(genome, env, weight_limit);
        result.summer_fitness = foraging::season_type_fitness(replay.log, foraging::Season::summer);
        result.winter_fitness = foraging::season_type_fitness(replay.log, foraging::Season::winter);
        results.push_back(result);
    }
    return results;
}

}  // namespace diffmod::ark
