#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "diffmod/foraging.hpp"
#include "diffmod/neuro.hpp"
#include "diffmod/rng.hpp"

namespace diffmod::evolve {

enum class Treatment { PA, PCC, PA_D, PCC_D };

std::string_view to_string(Treatment treatment);
/// Throws ConfigError for names other than PA, PCC, PA_D, PCC_D.
Treatment parse_treatment(std::string_view name);
neuro::LearningMode learning_mode(Treatment treatment);
bool uses_connection_cost(Treatment treatment);

enum class CostMeasure { connection_count, squared_length };

struct MutationRates {
    double add_connection = 0.20;
    double remove_connection = 0.20;
    double rewire = 0.15;            // per connection
    double weight_numerator = 2.0;   // per-connection probability is this / connection count
    double bias = 0.10;              // per node
    double modul = 0.10;             // per node
    double distribution_index = 15.0;
};

struct EvolutionConfig {
    Treatment treatment = Treatment::PA_D;
    int population_size = 400;
    int generations = 20000;
    int environments_per_evaluation = 4;
    MutationRates mutation;
    std::uint64_t seed = 1;
    double weight_limit = neuro::kDefaultWeightLimit;
    double learning_rate = neuro::kDefaultLearningRate;
    double performance_probability = 1.0;
    double diversity_probability = 1.0;
    double cost_probability = 0.75;
    CostMeasure cost_measure = CostMeasure::connection_count;
    // When false every generation reuses the generation-0 environments.
    bool resample_environments = true;
    // When true parents are re-evaluated on every generation's environments
    // instead of keeping the evaluation from the generation they were born in.
    bool reevaluate_parents = false;
    int threads = 1;  // scheduling only
    std::vector<neuro::Point> layout;  // empty: default layout

    /// Throws ConfigError.
    void validate() const;
};

/// Objective order: performance, behavioral diversity, connection cost.
using ObjectiveMask = std::array<bool, 3>;
inline constexpr int kPerformance = 0;
inline constexpr int kDiversity = 1;
inline constexpr int kCost = 2;

/// Bounded polynomial mutation of `value` in [lo, hi] for a uniform draw `u`.
double polynomial_mutation(double value, double lo, double hi, double distribution_index, double u);

/// Adjacent layers fully connected; weights and biases uniform in [-1, 1],
/// modul uniform in [0, 1].
neuro::Genome random_genome(neuro::LearningMode mode, std::span<const neuro::Point> layout, double weight_limit,
                            Rng& rng);

std::vector<neuro::Genome> initialize_population(const EvolutionConfig& config, Rng& rng);

/// Structural operators (add, remove, rewire) first, then parametric ones
/// whose per-connection probability uses the post-structural count.
void mutate(neuro::Genome& genome, const MutationRates& rates, double weight_limit, Rng& rng);

double connection_cost(const neuro::Genome& genome, CostMeasure measure);

struct Evaluation {
    double fitness = 0.0;
    foraging::BehaviorVector behavior;
    double cost = 0.0;
};

/// Mean training-phase fitness over the environments, concatenated behavior
/// and connection cost.
Evaluation evaluate(const neuro::Genome& genome, std::span<const foraging::Environment> environments,
                    const EvolutionConfig& config);

/// Mean Hamming distance of each vector to every other vector.
std::vector<double> behavioral_diversity(std::span<const foraging::BehaviorVector> behaviors);

/// True when `a` is at least as good on every objective and better on one.
/// All objectives are maximized.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Front index (0 = non-dominated) of each point.
std::vector<int> nondominated_ranks(std::span<const std::vector<double>> points);

/// Crowding distance within each front; boundary points get infinity.
std::vector<double> crowding_distances(std::span<const std::vector<double>> points, std::span<const int> ranks);

struct Individual {
    neuro::Genome genome;
    Evaluation evaluation;
    double diversity = 0.0;
    int rank = 0;
    double crowding = 0.0;
};

ObjectiveMask sample_objectives(const EvolutionConfig& config, Rng& rng);

/// Objective vectors restricted to the retained objectives; cost is negated so
/// that every objective is maximized.
std::vector<std::vector<double>> objective_vectors(std::span<const Individual> individuals, const ObjectiveMask& mask);

/// Ranks and crowding over the retained objectives, written into
/// `individuals`, then the indices of the `count` best by (rank, crowding).
std::vector<int> select_survivors(std::span<Individual> individuals, const ObjectiveMask& mask, int count);

/// Binary tournament on (rank, crowding).
int tournament(std::span<const Individual> population, Rng& rng);

struct GenerationStats {
    int generation = 0;
    double best_fitness = 0.0;
    double median_fitness = 0.0;
    double median_cost = 0.0;
    ObjectiveMask objectives{};
    std::uint64_t checkpoint = 0;  // seed of this generation's random stream
};

/// One PNSGA run. Each call to step() advances one generation: offspring by
/// mutation only, evaluated on that generation's environments (parents keep
/// their earlier evaluation), objectives sampled, elitist survivor selection
/// over parents and offspring.
class Evolution {
public:
    Evolution(EvolutionConfig config, std::uint64_t run_seed);

    GenerationStats step();
    int generation() const { return generation_; }
    const std::vector<Individual>& population() const { return population_; }
    const EvolutionConfig& config() const { return config_; }
    std::vector<foraging::Environment> environments_for(int generation) const;

private:
    EvolutionConfig config_;
    std::uint64_t run_seed_;
    int generation_ = 0;
    std::vector<Individual> population_;
};

}  // namespace diffmod::evolve
