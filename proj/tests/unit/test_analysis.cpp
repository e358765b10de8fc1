#include "diffmod/analysis.hpp"
#include "diffmod/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace diffmod;
using namespace diffmod::analysis;
using foraging::Environment;

namespace {

ProbeSeries series_from(std::initializer_list<std::pair<bool, bool>> known) {
    ProbeSeries s{};
    std::size_t i = 0;
    for (auto [summer, winter] : known) {
        s[i].known_summer = summer;
        s[i].known_winter = winter;
        ++i;
    }
    bookkeep(s);
    return s;
}

// Knows only the rule of the season it last got feedback in; eats everything
// in the other season until the first feedback arrives.
class CurrentSeasonAgent final : public foraging::Agent {
public:
    explicit CurrentSeasonAgent(Environment env) : env_(env) {}
    bool decide(foraging::FoodItem item, foraging::Season season) override {
        return season != current_ || foraging::is_nutritious(item, env_.spec(season));
    }
    std::span<const double> reinforce(foraging::FoodItem, foraging::Season season, int) override {
        current_ = season;
        return {};
    }
    std::unique_ptr<Agent> clone() const override { return std::make_unique<CurrentSeasonAgent>(*this); }

private:
    Environment env_;
    foraging::Season current_ = foraging::Season::summer;
};

}  // namespace

TEST_CASE("seasonal association bookkeeping") {
    const ProbeSeries s = series_from({{true, false}, {true, true}, {false, true}, {true, true}, {true, false}, {true, true}});
    CHECK_FALSE(s[0].perfect);
    CHECK(s[1].perfect);
    CHECK(s[0].retained == 0);
    CHECK(s[1].retained == 1);
    CHECK(s[2].retained == 1);
    CHECK(s[2].forgotten == 1);
    CHECK(s[4].forgotten == 1);
    CHECK(known_before(s, 0) == 0);
    CHECK(known_before(s, 2) == 2);
    const std::vector<ProbeSeries> all{s};
    // retained 1+1+1+1+1 = 5 over known 1+2+1+2+1 = 7
    CHECK(retained_percent(all) == doctest::Approx(500.0 / 7.0));
    const std::vector<ProbeSeries> none{series_from({})};
    CHECK(retained_percent(none) == 0.0);
}

TEST_CASE("oracle agent is perfect everywhere") {
    std::vector<Environment> envs;
    for (int i = 0; i < 10; ++i) envs.push_back(foraging::generate_environment(derive_seed(1, "an", static_cast<std::uint64_t>(i))));
    // the oracle needs its environment, so analyze one at a time
    int perfect = 0;
    for (const Environment& env : envs) {
        const EnvironmentReport r = analyze_environment(foraging::ScriptedAgent::oracle(env), env);
        CHECK(r.training_fitness == 1.0);
        CHECK(r.testing_fitness == 1.0);
        perfect += r.perfect;
        for (double c : r.curve) CHECK(c == 1.0);
    }
    CHECK(perfect == 50);
}

TEST_CASE("forgetting agent retains nothing across distinct seasons") {
    for (int i = 0; i < 30; ++i) {
        const Environment env = foraging::generate_environment(derive_seed(2, "forget", static_cast<std::uint64_t>(i)));
        if (env.summer == env.winter) continue;
        const EnvironmentReport r = analyze_environment(CurrentSeasonAgent(env), env);
        const std::vector<ProbeSeries> one{r.probes};
        CHECK(retained_percent(one) == 0.0);
        CHECK(r.perfect == 0);
    }
}

TEST_CASE("post-evolution analysis aggregates and is thread independent") {
    std::vector<Environment> envs;
    for (int i = 0; i < 12; ++i) envs.push_back(foraging::generate_environment(derive_seed(3, "post", static_cast<std::uint64_t>(i))));
    const foraging::NetworkAgent agent(support::two_path_network(false));
    const PostEvolutionReport a = post_evolution_analysis(agent, envs, 1);
    const PostEvolutionReport b = post_evolution_analysis(agent, envs, 4);
    CHECK(a.testing_fitness == 1.0);
    CHECK(a.perfect_ceiling == 60);
    CHECK(a.perfect == b.perfect);
    CHECK(a.retained_percent == b.retained_percent);
    for (std::size_t i = 0; i < envs.size(); ++i) {
        CHECK(a.environments[i].probes == b.environments[i].probes);
        CHECK(a.environments[i].trained_weights == b.environments[i].trained_weights);
    }
    CHECK(a.retained_percent == 100.0);
}

TEST_CASE("weight change by module") {
    const Environment env = foraging::generate_environment(5);
    const neuro::Genome g = support::two_path_network(false);
    foraging::NetworkAgent agent(g);
    const foraging::LifetimeResult life = foraging::run_lifetime(agent, env, true);
    const neuro::Genome trained = agent.network().to_genome();
    const ark::CoreFunctionalNetwork cfn = ark::build_cfn(trained, env, ark::record_activations(trained, env));
    const std::vector<const foraging::LifetimeLog*> logs{&life.log, &life.log};
    const std::vector<const ark::CoreFunctionalNetwork*> cfns{&cfn, nullptr};
    const WeightChangeTable t = weight_change_by_module(logs, cfns);
    CHECK(t.environments_used == 1);
    CHECK(t.environments_excluded == 1);
    REQUIRE(t.median[0][0].has_value());
    CHECK(*t.median[0][0] > 0.0);     // summer module changes in summer
    CHECK(*t.median[1][0] == 0.0);    // and not in winter
    CHECK(*t.median[1][1] > 0.0);
    CHECK(*t.median[0][1] == 0.0);
    CHECK_FALSE(t.median[0][2].has_value());
    const std::vector<const ark::CoreFunctionalNetwork*> short_list{&cfn};
    CHECK_THROWS_AS(weight_change_by_module(logs, short_list), StructuralError);
}
