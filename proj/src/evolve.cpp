#include "diffmod/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "diffmod/errors.hpp"
#include "diffmod/parallel.hpp"
#include "diffmod/stats.hpp"

namespace diffmod::evolve {

using neuro::ConnectionGene;
using neuro::Genome;

std::string_view to_string(Treatment treatment) {
    switch (treatment) {
        case Treatment::PA:
            return "PA";
        case Treatment::PCC:
            return "PCC";
        case Treatment::PA_D:
            return "PA_D";
        case Treatment::PCC_D:
            return "PCC_D";
    }
    return "?";
}

Treatment parse_treatment(std::string_view name) {
    for (Treatment t : {Treatment::PA, Treatment::PCC, Treatment::PA_D, Treatment::PCC_D}) {
        if (to_string(t) == name) return t;
    }
    throw ConfigError("unknown treatment '" + std::string(name) + "' (expected PA, PCC, PA_D or PCC_D)");
}

neuro::LearningMode learning_mode(Treatment treatment) {
    return treatment == Treatment::PA_D || treatment == Treatment::PCC_D ? neuro::LearningMode::diffusion
                                                                         : neuro::LearningMode::standard;
}

bool uses_connection_cost(Treatment treatment) { return treatment == Treatment::PCC || treatment == Treatment::PCC_D; }

void EvolutionConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    auto rate = [&](double v, const char* name) { require(v >= 0.0 && v <= 1.0, std::string(name) + " must be in [0,1]"); };
    require(population_size >= 2 && population_size % 2 == 0, "population size must be even and at least 2");
    require(generations >= 1, "generations must be at least 1");
    require(environments_per_evaluation >= 1, "environments per evaluation must be at least 1");
    require(threads >= 1, "threads must be at least 1");
    rate(mutation.add_connection, "add-connection rate");
    rate(mutation.remove_connection, "remove-connection rate");
    rate(mutation.rewire, "rewire rate");
    rate(mutation.bias, "bias mutation rate");
    rate(mutation.modul, "modul mutation rate");
    require(mutation.weight_numerator >= 0.0, "weight mutation numerator must be non-negative");
    require(mutation.distribution_index >= 0.0, "distribution index must be non-negative");
    require(performance_probability == 1.0, "performance objective must always be included");
    require(diversity_probability > 0.0 && diversity_probability <= 1.0, "diversity probability must be in (0,1]");
    require(cost_probability > 0.0 && cost_probability <= 1.0, "cost probability must be in (0,1]");
    require(weight_limit > 0.0, "weight limit must be positive");
    require(learning_rate >= 0.0, "learning rate must be non-negative");
    require(layout.empty() || layout.size() == neuro::kNodeCount, "layout must list 33 positions");
}

double polynomial_mutation(double value, double lo, double hi, double distribution_index, double u) {
    const double span = hi - lo;
    if (span <= 0.0) return value;
    const double delta1 = (value - lo) / span;
    const double delta2 = (hi - value) / span;
    const double exponent = 1.0 / (distribution_index + 1.0);
    double deltaq;
    if (u < 0.5) {
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - delta1, distribution_index + 1.0);
        deltaq = std::pow(val, exponent) - 1.0;
    } else {
        const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - delta2, distribution_index + 1.0);
        deltaq = 1.0 - std::pow(val, exponent);
    }
    return std::clamp(value + deltaq * span, lo, hi);
}

Genome random_genome(neuro::LearningMode mode, std::span<const neuro::Point> layout, double weight_limit, Rng& rng) {
    Genome genome = neuro::make_empty_genome(mode, layout);
    for (neuro::NodeGene& node : genome.nodes) {
        if (!neuro::is_input(node.id)) node.bias = rng.uniform(-1.0, 1.0);
        node.modul = rng.uniform(0.0, 1.0);
    }
    const double w = std::min(1.0, weight_limit);
    int first = 0;
    for (int layer = 0; layer + 1 < neuro::kLayerCount; ++layer) {
        const int size = neuro::kLayerSizes[static_cast<std::size_t>(layer)];
        const int next_size = neuro::kLayerSizes[static_cast<std::size_t>(layer) + 1];
        for (int s = first; s < first + size; ++s) {
            for (int t = first + size; t < first + size + next_size; ++t) {
                genome.connections.push_back(ConnectionGene{s, t, rng.uniform(-w, w)});
            }
        }
        first += size;
    }
    return genome;
}

std::vector<Genome> initialize_population(const EvolutionConfig& config, Rng& rng) {
    std::vector<Genome> population;
    population.reserve(static_cast<std::size_t>(config.population_size));
    for (int i = 0; i < config.population_size; ++i) {
        population.push_back(random_genome(learning_mode(config.treatment), config.layout, config.weight_limit, rng));
    }
    return population;
}

namespace {

using Adjacency = std::array<std::array<bool, neuro::kNodeCount>, neuro::kNodeCount>;

Adjacency adjacency_of(const Genome& genome) {
    Adjacency adj{};
    for (const ConnectionGene& c : genome.connections) adj[static_cast<std::size_t>(c.source)][static_cast<std::size_t>(c.target)] = true;
    return adj;
}

}  // namespace

void mutate(Genome& genome, const MutationRates& rates, double weight_limit, Rng& rng) {
    using neuro::layer_of;
    Adjacency adj = adjacency_of(genome);
    auto& conns = genome.connections;

    if (rng.bernoulli(rates.add_connection)) {
        std::vector<std::pair<int, int>> candidates;
        for (int s = 0; s < neuro::kNodeCount; ++s) {
            for (int t = 0; t < neuro::kNodeCount; ++t) {
                if (layer_of(s) < layer_of(t) && !adj[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)]) candidates.emplace_back(s, t);
            }
        }
        if (!candidates.empty()) {
            const auto [s, t] = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
            const double w = std::min(1.0, weight_limit);
            conns.push_back(ConnectionGene{s, t, rng.uniform(-w, w)});
            adj[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] = true;
        }
    }

    if (rng.bernoulli(rates.remove_connection) && !conns.empty()) {
        const auto victim = static_cast<std::ptrdiff_t>(rng.below(conns.size()));
        adj[static_cast<std::size_t>(conns[static_cast<std::size_t>(victim)].source)]
           [static_cast<std::size_t>(conns[static_cast<std::size_t>(victim)].target)] = false;
        conns.erase(conns.begin() + victim);
    }

    for (ConnectionGene& c : conns) {
        if (!rng.bernoulli(rates.rewire)) continue;
        const bool move_source = rng.bernoulli(0.5);
        std::vector<int> candidates;
        for (int v = 0; v < neuro::kNodeCount; ++v) {
            if (move_source) {
                if (v != c.source && layer_of(v) < layer_of(c.target) && !adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(c.target)]) candidates.push_back(v);
            } else {
                if (v != c.target && layer_of(v) > layer_of(c.source) && !adj[static_cast<std::size_t>(c.source)][static_cast<std::size_t>(v)]) candidates.push_back(v);
            }
        }
        if (candidates.empty()) continue;
        const int v = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
        adj[static_cast<std::size_t>(c.source)][static_cast<std::size_t>(c.target)] = false;
        (move_source ? c.source : c.target) = v;
        adj[static_cast<std::size_t>(c.source)][static_cast<std::size_t>(c.target)] = true;
    }

    const double eta = rates.distribution_index;
    if (!conns.empty()) {
        const double p = rates.weight_numerator / static_cast<double>(conns.size());
        for (ConnectionGene& c : conns) {
            if (rng.bernoulli(p)) c.weight = polynomial_mutation(c.weight, -weight_limit, weight_limit, eta, rng.uniform());
        }
    }
    for (neuro::NodeGene& node : genome.nodes) {
        if (neuro::is_input(node.id)) continue;
        if (rng.bernoulli(rates.bias)) node.bias = polynomial_mutation(node.bias, -1.0, 1.0, eta, rng.uniform());
        if (!neuro::is_output(node.id) && rng.bernoulli(rates.modul)) {
            node.modul = polynomial_mutation(node.modul, 0.0, 1.0, eta, rng.uniform());
        }
    }
}

double connection_cost(const Genome& genome, CostMeasure measure) {
    if (measure == CostMeasure::connection_count) return static_cast<double>(genome.connections.size());
    double total = 0.0;
    for (const ConnectionGene& c : genome.connections) {
        const double d = neuro::distance(genome.nodes[static_cast<std::size_t>(c.source)].position,
                                         genome.nodes[static_cast<std::size_t>(c.target)].position);
        total += d * d;
    }
    return total;
}

Evaluation evaluate(const Genome& genome, std::span<const foraging::Environment> environments,
                    const EvolutionConfig& config) {
    Evaluation result;
    std::vector<foraging::LifetimeLog> logs;
    logs.reserve(environments.size());
    double total = 0.0;
    const foraging::NetworkAgent newborn(genome, config.learning_rate, config.weight_limit);
    for (const foraging::Environment& env : environments) {
        foraging::NetworkAgent agent = newborn;
        foraging::LifetimeResult lifetime = foraging::run_lifetime(agent, env, true);
        total += lifetime.fitness;
        logs.push_back(std::move(lifetime.log));
    }
    result.fitness = total / static_cast<double>(environments.size());
    result.behavior = foraging::behavior_vector(logs);
    result.cost = connection_cost(genome, config.cost_measure);
    return result;
}

std::vector<double> behavioral_diversity(std::span<const foraging::BehaviorVector> behaviors) {
    const std::size_t n = behaviors.size();
    std::vector<double> totals(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto d = static_cast<double>(hamming(behaviors[i], behaviors[j]));
            totals[i] += d;
            totals[j] += d;
        }
    }
    if (n > 1) {
        for (double& t : totals) t /= static_cast<double>(n - 1);
    }
    return totals;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] < b[k]) return false;
        if (a[k] > b[k]) strictly = true;
    }
    return strictly;
}

std::vector<int> nondominated_ranks(std::span<const std::vector<double>> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated[i].push_back(static_cast<int>(j));
                ++domination_count[j];
            } else if (dominates(points[j], points[i])) {
                dominated[j].push_back(static_cast<int>(i));
                ++domination_count[i];
            }
        }
    }
    std::vector<int> rank(n, 0);
    std::vector<int> front;
    for (std::size_t i = 0; i < n; ++i) {
        if (domination_count[i] == 0) front.push_back(static_cast<int>(i));
    }
    int level = 0;
    while (!front.empty()) {
        std::vector<int> next;
        for (int i : front) {
            rank[static_cast<std::size_t>(i)] = level;
            for (int j : dominated[static_cast<std::size_t>(i)]) {
                if (--domination_count[static_cast<std::size_t>(j)] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        front = std::move(next);
        ++level;
    }
    return rank;
}

std::vector<double> crowding_distances(std::span<const std::vector<double>> points, std::span<const int> ranks) {
    const std::size_t n = points.size();
    std::vector<double> crowding(n, 0.0);
    if (n == 0) return crowding;
    const std::size_t objectives = points[0].size();
    const int max_rank = *std::max_element(ranks.begin(), ranks.end());
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<int> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (ranks[i] == r) members.push_back(static_cast<int>(i));
        }
        for (std::size_t k = 0; k < objectives; ++k) {
            std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
                return points[static_cast<std::size_t>(a)][k] < points[static_cast<std::size_t>(b)][k];
            });
            const double lo = points[static_cast<std::size_t>(members.front())][k];
            const double hi = points[static_cast<std::size_t>(members.back())][k];
            crowding[static_cast<std::size_t>(members.front())] = inf;
            crowding[static_cast<std::size_t>(members.back())] = inf;
            if (hi == lo) continue;
            for (std::size_t m = 1; m + 1 < members.size(); ++m) {
                const auto i = static_cast<std::size_t>(members[m]);
                if (std::isinf(crowding[i])) continue;
                crowding[i] += (points[static_cast<std::size_t>(members[m + 1])][k] -
                                points[static_cast<std::size_t>(members[m - 1])][k]) / (hi - lo);
            }
        }
    }
    return crowding;
}

ObjectiveMask sample_objectives(const EvolutionConfig& config, Rng& rng) {
    ObjectiveMask mask{};
    mask[kPerformance] = true;
    mask[kDiversity] = rng.uniform() < config.diversity_probability;
    const bool cost_drawn = rng.uniform() < config.cost_probability;
    mask[kCost] = uses_connection_cost(config.treatment) && cost_drawn;
    return mask;
}

std::vector<std::vector<double>> objective_vectors(std::span<const Individual> individuals, const ObjectiveMask& mask) {
    std::vector<std::vector<double>> points;
    points.reserve(individuals.size());
    for (const Individual& ind : individuals) {
        std::vector<double> p;
        if (mask[kPerformance]) p.push_back(ind.evaluation.fitness);
        if (mask[kDiversity]) p.push_back(ind.diversity);
        if (mask[kCost]) p.push_back(-ind.evaluation.cost);
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<int> select_survivors(std::span<Individual> individuals, const ObjectiveMask& mask, int count) {
    const auto points = objective_vectors(individuals, mask);
    const auto ranks = nondominated_ranks(points);
    const auto crowding = crowding_distances(points, ranks);
    std::vector<int> order(individuals.size());
    for (std::size_t i = 0; i < individuals.size(); ++i) {
        individuals[i].rank = ranks[i];
        individuals[i].crowding = crowding[i];
        order[i] = static_cast<int>(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const Individual& x = individuals[static_cast<std::size_t>(a)];
        const Individual& y = individuals[static_cast<std::size_t>(b)];
        if (x.rank != y.rank) return x.rank < y.rank;
        return x.crowding > y.crowding;
    });
    order.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(order.size()))));
    return order;
}

int tournament(std::span<const Individual> population, Rng& rng) {
    const int a = static_cast<int>(rng.below(population.size()));
    const int b = static_cast<int>(rng.below(population.size()));
    const Individual& x = population[static_cast<std::size_t>(a)];
    const Individual& y = population[static_cast<std::size_t>(b)];
    if (y.rank < x.rank || (y.rank == x.rank && y.crowding > x.crowding)) return b;
    return a;
}

Evolution::Evolution(EvolutionConfig config, std::uint64_t run_seed) : config_(std::move(config)), run_seed_(run_seed) {
    config_.validate();
}

std::vector<foraging::Environment> Evolution::environments_for(int generation) const {
    const int g = config_.resample_environments ? generation : 0;
    std::vector<foraging::Environment> envs;
    for (int k = 0; k < config_.environments_per_evaluation; ++k) {
        const auto index = static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(config_.environments_per_evaluation) +
                           static_cast<std::uint64_t>(k);
        envs.push_back(foraging::generate_environment(derive_seed(run_seed_, "environment", index)));
    }
    return envs;
}

GenerationStats Evolution::step() {
    const std::uint64_t checkpoint = derive_seed(run_seed_, "generation", static_cast<std::uint64_t>(generation_));
    Rng rng(checkpoint);

    std::vector<Individual> pool;
    if (generation_ == 0) {
        Rng init_rng(derive_seed(run_seed_, "initial-population", 0));
        for (Genome& g : initialize_population(config_, init_rng)) pool.push_back(Individual{std::move(g), {}, 0.0, 0, 0.0});
    } else {
        pool = population_;
        for (int i = 0; i < config_.population_size; ++i) {
            Genome child = population_[static_cast<std::size_t>(tournament(population_, rng))].genome;
            mutate(child, config_.mutation, config_.weight_limit, rng);
            pool.push_back(Individual{std::move(child), {}, 0.0, 0, 0.0});
        }
    }

    const auto envs = environments_for(generation_);
    const std::size_t first = generation_ == 0 || config_.reevaluate_parents ? 0 : population_.size();
    parallel_for(static_cast<int>(pool.size() - first), config_.threads, [&](int i) {
        Individual& ind = pool[first + static_cast<std::size_t>(i)];
        ind.evaluation = evaluate(ind.genome, envs, config_);
    });

    std::vector<foraging::BehaviorVector> behaviors;
    behaviors.reserve(pool.size());
    for (const Individual& ind : pool) behaviors.push_back(ind.evaluation.behavior);
    const auto diversity = behavioral_diversity(behaviors);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i].diversity = diversity[i];

    const ObjectiveMask mask = sample_objectives(config_, rng);
    const auto survivors = select_survivors(pool, mask, config_.population_size);
    std::vector<Individual> next;
    next.reserve(survivors.size());
    for (int i : survivors) next.push_back(std::move(pool[static_cast<std::size_t>(i)]));
    population_ = std::move(next);

    GenerationStats stats;
    stats.generation = generation_;
    stats.objectives = mask;
    stats.checkpoint = checkpoint;
    std::vector<double> fitness;
    std::vector<double> cost;
    for (const Individual& ind : population_) {
        fitness.push_back(ind.evaluation.fitness);
        cost.push_back(ind.evaluation.cost);
    }
    stats.best_fitness = *std::max_element(fitness.begin(), fitness.end());
    stats.median_fitness = stats::median(fitness);
    stats.median_cost = stats::median(cost);
    ++generation_;
    return stats;
}

}  // namespace diffmod::evolve
