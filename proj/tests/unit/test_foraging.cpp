#include <set>

#include "diffmod/foraging.hpp"
#include "diffmod/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diffmod;
using namespace diffmod::foraging;

TEST_CASE("classification follows the decision bit") {
    const SeasonSpec spec{1, -1};
    int nutritious = 0;
    for (int i = 0; i < kFoodItemCount; ++i) {
        const FoodItem item{i};
        CHECK(is_nutritious(item, spec) == (item.bit(1) == -1));
        nutritious += is_nutritious(item, spec);
    }
    CHECK(nutritious == 4);
}

TEST_CASE("environments are deterministic permutations") {
    const Environment a = generate_environment(42);
    CHECK(a == generate_environment(42));
    CHECK_FALSE(a == generate_environment(43));
    for (const auto& season : a.schedule) {
        for (const auto& day : season) CHECK(std::set<int>(day.begin(), day.end()).size() == kFoodItemCount);
    }
    CHECK(environment_from_json(environment_to_json(a)) == a);
    CHECK(a.item_at(0).index == a.schedule[0][0][0]);
    CHECK(a.item_at(kPresentations - 1).index == a.schedule[5][4][7]);
}

TEST_CASE("spec draws are uniform over the six rules") {
    std::array<int, 6> counts{};
    const int n = 30000;
    for (int i = 0; i < n; ++i) {
        const Environment env = generate_environment(derive_seed(1, "spec-uniform", static_cast<std::uint64_t>(i)));
        counts[static_cast<std::size_t>(env.summer.decision_bit * 2 + (env.summer.nutritious_sign > 0))] += 1;
    }
    for (int c : counts) CHECK(std::abs(c - n / 6) < 400);
}

TEST_CASE("scripted agents hit the fitness identities") {
    for (int i = 0; i < 20; ++i) {
        const Environment env = generate_environment(derive_seed(2, "identity", static_cast<std::uint64_t>(i)));
        ScriptedAgent never = ScriptedAgent::never_eat();
        ScriptedAgent always = ScriptedAgent::always_eat();
        ScriptedAgent oracle = ScriptedAgent::oracle(env);
        CHECK(run_lifetime(never, env, true).fitness == 0.5);
        CHECK(run_lifetime(always, env, true).fitness == 0.5);
        const LifetimeResult best = run_lifetime(oracle, env, true);
        CHECK(best.fitness == 1.0);
        for (int s = 0; s < kSeasonCount; ++s) CHECK(season_fitness(best.log, s) == 1.0);
        CHECK(season_type_fitness(best.log, Season::winter) == 1.0);
        CHECK(probe_known(oracle, env.summer, Season::summer));
        CHECK_FALSE(probe_known(always, env.winter, Season::winter));
    }
}

TEST_CASE("lifetime log bookkeeping") {
    const Environment env = generate_environment(9);
    NetworkAgent agent(support::two_path_network(false));
    const LifetimeResult r = run_lifetime(agent, env, true);
    REQUIRE(r.log.steps.size() == kPresentations);
    REQUIRE(r.log.tally.size() == kPresentations);
    CHECK(r.log.season_end_weights.size() == kSeasonCount);
    CHECK(r.fitness == fitness_from_counts(r.log.nutritious_eaten(), r.log.poisonous_eaten(), kPresentations));
    for (const StepRecord& s : r.log.steps) {
        CHECK(s.feedback == (s.eaten ? (s.nutritious ? 1 : -1) : 0));
    }
    // diffusion: connections into the winter learner never change in summer
    for (std::size_t c = 0; c < 3; ++c) CHECK(r.log.accumulated_change[0][c + 3] == 0.0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(r.log.accumulated_change[1][c] == 0.0);
}

TEST_CASE("testing phase leaves weights untouched") {
    const Environment env = generate_environment(10);
    NetworkAgent agent(support::two_path_network(false));
    run_lifetime(agent, env, true);
    const auto trained = agent.weights();
    const LifetimeResult test = run_lifetime(agent, env, false);
    CHECK(agent.weights() == trained);
    CHECK(test.fitness == 1.0);
    for (const auto& acc : test.log.accumulated_change) {
        for (double v : acc) CHECK(v == 0.0);
    }
}

TEST_CASE("behavior vectors and hamming distance") {
    BehaviorVector a(130);
    BehaviorVector b(130);
    a.set(0, true);
    a.set(64, true);
    a.set(129, true);
    b.set(129, true);
    CHECK(a.count() == 3);
    CHECK(hamming(a, b) == 2);
    CHECK(hamming(a, a) == 0);
    const Environment env = generate_environment(3);
    ScriptedAgent oracle = ScriptedAgent::oracle(env);
    std::vector<LifetimeLog> logs{run_lifetime(oracle, env, true).log, run_lifetime(oracle, env, true).log};
    const BehaviorVector v = behavior_vector(logs);
    CHECK(v.size() == 2 * kPresentations);
    CHECK(v.count() == kPresentations);
}
