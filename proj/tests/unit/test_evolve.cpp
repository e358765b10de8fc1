#include <algorithm>
#include <cmath>
#include <limits>

#include "diffmod/errors.hpp"
#include "diffmod/evolve.hpp"
#include "doctest.h"

using namespace diffmod;
using namespace diffmod::evolve;
using neuro::Genome;

namespace {

std::vector<int> brute_ranks(const std::vector<std::vector<double>>& points) {
    std::vector<int> rank(points.size(), -1);
    int front = 0;
    std::size_t assigned = 0;
    while (assigned < points.size()) {
        std::vector<std::size_t> current;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (rank[i] >= 0) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
                dominated = j != i && rank[j] < 0 && dominates(points[j], points[i]);
            }
            if (!dominated) current.push_back(i);
        }
        for (std::size_t i : current) rank[i] = front;
        assigned += current.size();
        ++front;
    }
    return rank;
}

EvolutionConfig small_config(Treatment t) {
    EvolutionConfig c;
    c.treatment = t;
    c.population_size = 12;
    c.generations = 6;
    c.environments_per_evaluation = 2;
    return c;
}

}  // namespace

TEST_CASE("treatment names and properties") {
    for (Treatment t : {Treatment::PA, Treatment::PCC, Treatment::PA_D, Treatment::PCC_D}) {
        CHECK(parse_treatment(to_string(t)) == t);
    }
    CHECK_THROWS_AS(parse_treatment("XYZ"), ConfigError);
    CHECK(learning_mode(Treatment::PCC_D) == neuro::LearningMode::diffusion);
    CHECK(learning_mode(Treatment::PA) == neuro::LearningMode::standard);
    CHECK(uses_connection_cost(Treatment::PCC));
    CHECK_FALSE(uses_connection_cost(Treatment::PA_D));
}

TEST_CASE("config validation") {
    EvolutionConfig c;
    CHECK_NOTHROW(c.validate());
    c.population_size = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = EvolutionConfig{};
    c.mutation.rewire = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = EvolutionConfig{};
    c.layout = {{0.0, 0.0}};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("polynomial mutation stays in bounds and is centered on the parent") {
    Rng rng(1);
    double below = 0;
    double above = 0;
    for (int i = 0; i < 20000; ++i) {
        const double v = rng.uniform(-1.0, 1.0);
        const double u = rng.uniform();
        const double m = polynomial_mutation(v, -1.0, 1.0, 15.0, u);
        CHECK(m >= -1.0);
        CHECK(m <= 1.0);
        if (u < 0.5) CHECK(m <= v);
        if (u > 0.5) CHECK(m >= v);
        (m < v ? below : above) += 1;
    }
    CHECK(polynomial_mutation(0.3, -1.0, 1.0, 15.0, 0.5) == doctest::Approx(0.3));
    CHECK(polynomial_mutation(-1.0, -1.0, 1.0, 15.0, 0.0) == -1.0);
    CHECK(polynomial_mutation(1.0, -1.0, 1.0, 15.0, 0.999999) <= 1.0);
}

TEST_CASE("random genomes are fully connected between adjacent layers") {
    Rng rng(2);
    const Genome g = random_genome(neuro::LearningMode::diffusion, {}, 1.0, rng);
    CHECK(g.connections.size() == 5 * 12 + 12 * 8 + 8 * 6 + 6 * 2);
    CHECK_NOTHROW(neuro::validate(g));
    for (const auto& c : g.connections) CHECK(neuro::layer_of(c.target) == neuro::layer_of(c.source) + 1);
    for (const auto& n : g.nodes) {
        if (neuro::is_input(n.id)) CHECK(n.bias == 0.0);
    }
}

TEST_CASE("mutation preserves structural validity") {
    Rng rng(3);
    MutationRates rates;
    rates.add_connection = 0.5;
    rates.remove_connection = 0.5;
    rates.rewire = 0.3;
    for (auto mode : {neuro::LearningMode::standard, neuro::LearningMode::diffusion}) {
        Genome g = random_genome(mode, {}, 1.0, rng);
        for (int i = 0; i < 400; ++i) {
            mutate(g, rates, 1.0, rng);
            REQUIRE_NOTHROW(neuro::validate(g));
        }
    }
}

TEST_CASE("mutation is reproducible from the seed") {
    Rng a(4);
    Rng b(4);
    Genome g1 = random_genome(neuro::LearningMode::standard, {}, 1.0, a);
    Genome g2 = random_genome(neuro::LearningMode::standard, {}, 1.0, b);
    for (int i = 0; i < 50; ++i) {
        mutate(g1, MutationRates{}, 1.0, a);
        mutate(g2, MutationRates{}, 1.0, b);
    }
    CHECK(g1 == g2);
}

TEST_CASE("connection cost measures") {
    Genome g = neuro::make_empty_genome(neuro::LearningMode::diffusion);
    g.connections = {{0, 5, 0.1}, {4, 16, 0.1}};
    CHECK(connection_cost(g, CostMeasure::connection_count) == 2.0);
    CHECK(connection_cost(g, CostMeasure::squared_length) == doctest::Approx(2.0));
}

TEST_CASE("non-dominated sorting agrees with brute force") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(30));
        const int k = 1 + static_cast<int>(rng.below(3));
        std::vector<std::vector<double>> pts(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
        for (auto& p : pts) {
            for (double& v : p) v = static_cast<double>(rng.below(5));  // many ties
        }
        CHECK(nondominated_ranks(pts) == brute_ranks(pts));
    }
}

TEST_CASE("crowding distance") {
    const std::vector<std::vector<double>> pts{{0.0, 4.0}, {1.0, 3.0}, {2.0, 1.0}, {4.0, 0.0}, {0.0, 0.0}};
    const auto ranks = nondominated_ranks(pts);
    CHECK(ranks == std::vector<int>{0, 0, 0, 0, 1});
    const auto d = crowding_distances(pts, ranks);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(d[0] == inf);
    CHECK(d[3] == inf);
    CHECK(d[1] == doctest::Approx(2.0 / 4.0 + 3.0 / 4.0));
    CHECK(d[2] == doctest::Approx(3.0 / 4.0 + 3.0 / 4.0));
    CHECK(d[4] == inf);
}

TEST_CASE("behavioral diversity is the mean distance to the others") {
    foraging::BehaviorVector a(4);
    foraging::BehaviorVector b(4);
    foraging::BehaviorVector c(4);
    b.set(0, true);
    c.set(0, true);
    c.set(1, true);
    const std::vector<foraging::BehaviorVector> v{a, b, c};
    const auto d = behavioral_diversity(v);
    CHECK(d[0] == doctest::Approx(1.5));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(1.5));
}

TEST_CASE("objective sampling honours the probabilities") {
    EvolutionConfig c;
    c.treatment = Treatment::PCC;
    Rng rng(6);
    int cost = 0;
    for (int i = 0; i < 20000; ++i) {
        const ObjectiveMask m = sample_objectives(c, rng);
        CHECK(m[kPerformance]);
        CHECK(m[kDiversity]);
        cost += m[kCost];
    }
    CHECK(cost / 20000.0 == doctest::Approx(0.75).epsilon(0.02));
    c.treatment = Treatment::PA;
    for (int i = 0; i < 100; ++i) CHECK_FALSE(sample_objectives(c, rng)[kCost]);
}

TEST_CASE("objective vectors negate cost") {
    std::vector<Individual> inds(1);
    inds[0].evaluation.fitness = 0.7;
    inds[0].evaluation.cost = 12.0;
    inds[0].diversity = 3.0;
    const auto v = objective_vectors(inds, ObjectiveMask{true, true, true});
    CHECK(v[0] == std::vector<double>{0.7, 3.0, -12.0});
    CHECK(objective_vectors(inds, ObjectiveMask{true, false, false})[0] == std::vector<double>{0.7});
}

TEST_CASE("survivor selection prefers lower rank then higher crowding") {
    std::vector<Individual> inds(6);
    const double fit[6] = {0.9, 0.5, 0.8, 0.6, 0.55, 0.7};
    for (std::size_t i = 0; i < 6; ++i) inds[i].evaluation.fitness = fit[i];
    const auto keep = select_survivors(inds, ObjectiveMask{true, false, false}, 3);
    CHECK(keep == std::vector<int>{0, 2, 5});
}

TEST_CASE("evolution is deterministic and thread-count independent") {
    EvolutionConfig c = small_config(Treatment::PCC_D);
    Evolution a(c, 77);
    c.threads = 3;
    Evolution b(c, 77);
    for (int g = 0; g < c.generations; ++g) {
        const GenerationStats sa = a.step();
        const GenerationStats sb = b.step();
        CHECK(sa.best_fitness == sb.best_fitness);
        CHECK(sa.checkpoint == sb.checkpoint);
        CHECK(sa.objectives == sb.objectives);
    }
    for (std::size_t i = 0; i < a.population().size(); ++i) CHECK(a.population()[i].genome == b.population()[i].genome);
}

TEST_CASE("generations share environments and resample them") {
    EvolutionConfig c = small_config(Treatment::PA_D);
    Evolution e(c, 5);
    CHECK(e.environments_for(3) == e.environments_for(3));
    CHECK_FALSE(e.environments_for(3) == e.environments_for(4));
    c.resample_environments = false;
    Evolution fixed(c, 5);
    CHECK(fixed.environments_for(3) == fixed.environments_for(4));
}

TEST_CASE("elitism keeps the best evaluated fitness when parents are not re-evaluated") {
    EvolutionConfig c = small_config(Treatment::PA);
    c.generations = 15;
    Evolution e(c, 9);
    double best = -1.0;
    for (int g = 0; g < c.generations; ++g) {
        const GenerationStats s = e.step();
        CHECK(s.best_fitness >= best);
        best = s.best_fitness;
        CHECK(static_cast<int>(e.population().size()) == c.population_size);
        for (const Individual& ind : e.population()) CHECK_NOTHROW(neuro::validate(ind.genome));
    }
}
