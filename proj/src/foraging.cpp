#include "diffmod/foraging.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "diffmod/errors.hpp"
#include "diffmod/rng.hpp"

namespace diffmod::foraging {

FoodClass classify(FoodItem item, const SeasonSpec& spec) {
    return item.bit(spec.decision_bit) == spec.nutritious_sign ? FoodClass::nutritious : FoodClass::poisonous;
}

FoodItem Environment::item_at(int step) const {
    const int season = step / kPresentationsPerSeason;
    const int within = step % kPresentationsPerSeason;
    return FoodItem{schedule[static_cast<std::size_t>(season)][static_cast<std::size_t>(within / kFoodItemCount)]
                            [static_cast<std::size_t>(within % kFoodItemCount)]};
}

Environment generate_environment(std::uint64_t seed) {
    Rng rng(seed);
    Environment env;
    env.seed = seed;
    for (SeasonSpec* spec : {&env.summer, &env.winter}) {
        spec->decision_bit = static_cast<int>(rng.below(3));
        spec->nutritious_sign = rng.bernoulli(0.5) ? 1 : -1;
    }
    for (auto& season : env.schedule) {
        for (auto& day : season) {
            std::iota(day.begin(), day.end(), std::uint8_t{0});
            rng.shuffle(std::span<std::uint8_t>(day));
        }
    }
    return env;
}

using nlohmann::json;

json environment_to_json(const Environment& env) {
    json schedule = json::array();
    for (const auto& season : env.schedule) {
        json days = json::array();
        for (const auto& day : season) days.push_back(json(std::vector<int>(day.begin(), day.end())));
        schedule.push_back(std::move(days));
    }
    return json{{"seed", env.seed},
                {"summer", {env.summer.decision_bit, env.summer.nutritious_sign}},
                {"winter", {env.winter.decision_bit, env.winter.nutritious_sign}},
                {"schedule", std::move(schedule)}};
}

Environment environment_from_json(const json& doc) {
    try {
        Environment env;
        env.seed = doc.at("seed").get<std::uint64_t>();
        env.summer = SeasonSpec{doc.at("summer").at(0).get<int>(), doc.at("summer").at(1).get<int>()};
        env.winter = SeasonSpec{doc.at("winter").at(0).get<int>(), doc.at("winter").at(1).get<int>()};
        const json& schedule = doc.at("schedule");
        if (schedule.size() != kSeasonCount) throw StructuralError("schedule needs 6 seasons");
        for (std::size_t s = 0; s < kSeasonCount; ++s) {
            if (schedule[s].size() != kDaysPerSeason) throw StructuralError("schedule needs 5 days per season");
            for (std::size_t d = 0; d < kDaysPerSeason; ++d) {
                std::array<bool, kFoodItemCount> seen{};
                const json& day = schedule[s][d];
                if (day.size() != kFoodItemCount) throw StructuralError("each day presents 8 items");
                for (std::size_t k = 0; k < kFoodItemCount; ++k) {
                    const int item = day[k].get<int>();
                    if (item < 0 || item >= kFoodItemCount || seen[static_cast<std::size_t>(item)]) {
                        throw StructuralError("a day's ordering must be a permutation of the 8 items");
                    }
                    seen[static_cast<std::size_t>(item)] = true;
                    env.schedule[s][d][k] = static_cast<std::uint8_t>(item);
                }
            }
        }
        for (const SeasonSpec& spec : {env.summer, env.winter}) {
            if (spec.decision_bit < 0 || spec.decision_bit > 2 || std::abs(spec.nutritious_sign) != 1) {
                throw StructuralError("invalid season spec");
            }
        }
        return env;
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed environment document: ") + e.what());
    }
}

std::array<double, neuro::kInputCount> make_inputs(FoodItem item, double summer_feedback, double winter_feedback) {
    return {static_cast<double>(item.bit(0)), static_cast<double>(item.bit(1)), static_cast<double>(item.bit(2)),
            summer_feedback, winter_feedback};
}

NetworkAgent::NetworkAgent(const neuro::Genome& genome, double learning_rate, double weight_limit)
    : network_(genome, weight_limit), learning_rate_(learning_rate) {
    decisions_.fill(-1);
}

bool NetworkAgent::decide(FoodItem item, Season season) {
    std::int8_t& cached = decisions_[static_cast<std::size_t>(season) * kFoodItemCount + static_cast<std::size_t>(item.index)];
    if (cached < 0) {
        const auto inputs = make_inputs(item, 0.0, 0.0);
        cached = network_.activate_output(output_node(season), inputs) > 0.0 ? 1 : 0;
    }
    return cached == 1;
}

std::span<const double> NetworkAgent::reinforce(FoodItem item, Season season, int feedback) {
    const double summer = season == Season::summer ? feedback : 0.0;
    const double winter = season == Season::winter ? feedback : 0.0;
    network_.activate(make_inputs(item, summer, winter));
    if (network_.mode() == neuro::LearningMode::diffusion) {
        const std::array<double, 2> sources{summer, winter};
        network_.set_point_source_activations(sources);
    }
    network_.compute_modulation();
    const auto deltas = network_.apply_plasticity(learning_rate_);
    if (std::any_of(deltas.begin(), deltas.end(), [](double d) { return d != 0.0; })) decisions_.fill(-1);
    return deltas;
}

std::vector<double> NetworkAgent::weights() const {
    const auto w = network_.weights();
    return {w.begin(), w.end()};
}

std::unique_ptr<Agent> NetworkAgent::clone() const { return std::make_unique<NetworkAgent>(*this); }

bool ScriptedAgent::decide(FoodItem item, Season season) {
    switch (policy_) {
        case Policy::never_eat:
            return false;
        case Policy::always_eat:
            return true;
        case Policy::oracle:
            return is_nutritious(item, env_.spec(season));
    }
    return false;
}

int LifetimeLog::nutritious_eaten() const {
    int n = 0;
    for (const StepRecord& r : steps) n += r.eaten && r.nutritious ? 1 : 0;
    return n;
}

int LifetimeLog::poisonous_eaten() const {
    int n = 0;
    for (const StepRecord& r : steps) n += r.eaten && !r.nutritious ? 1 : 0;
    return n;
}

LifetimeResult run_lifetime(Agent& agent, const Environment& env, bool learning, const LifetimeHooks& hooks) {
    LifetimeResult result;
    LifetimeLog& log = result.log;
    log.steps.reserve(kPresentations);
    log.tally.reserve(kPresentations);
    const std::size_t weight_count = agent.weights().size();
    for (auto& acc : log.accumulated_change) acc.assign(weight_count, 0.0);

    int nutritious = 0;
    int poisonous = 0;
    for (int s = 0; s < kSeasonCount; ++s) {
        const Season season = season_of(s);
        const SeasonSpec& spec = env.spec(season);
        auto& accumulated = log.accumulated_change[static_cast<std::size_t>(season)];
        for (int d = 0; d < kDaysPerSeason; ++d) {
            for (int k = 0; k < kFoodItemCount; ++k) {
                const FoodItem item{env.schedule[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)]
                                                [static_cast<std::size_t>(k)]};
                const bool eaten = agent.decide(item, season);
                const bool good = is_nutritious(item, spec);
                const int feedback = eaten ? (good ? 1 : -1) : 0;
                if (eaten) (good ? nutritious : poisonous) += 1;
                log.steps.push_back(StepRecord{s, d, item.index, eaten, good, feedback});
                log.tally.push_back(nutritious - poisonous);
                if (learning && feedback != 0) {
                    const auto deltas = agent.reinforce(item, season, feedback);
                    for (std::size_t c = 0; c < deltas.size(); ++c) accumulated[c] += std::abs(deltas[c]);
                }
            }
        }
        log.season_end_weights.push_back(agent.weights());
        if (hooks.at_season_end) hooks.at_season_end(s, agent);
    }
    result.fitness = fitness_from_counts(nutritious, poisonous, kPresentations);
    return result;
}

namespace {

double fitness_over(const LifetimeLog& log, auto&& include) {
    int nutritious = 0;
    int poisonous = 0;
    int total = 0;
    for (const StepRecord& r : log.steps) {
        if (!include(r)) continue;
        ++total;
        if (r.eaten) (r.nutritious ? nutritious : poisonous) += 1;
    }
    if (total == 0) throw StructuralError("no presentations selected");
    return fitness_from_counts(nutritious, poisonous, total);
}

}  // namespace

double season_fitness(const LifetimeLog& log, int season_index) {
    return fitness_over(log, [season_index](const StepRecord& r) { return r.season_index == season_index; });
}

double season_type_fitness(const LifetimeLog& log, Season season) {
    return fitness_over(log, [season](const StepRecord& r) { return season_of(r.season_index) == season; });
}

bool probe_known(Agent& agent, const SeasonSpec& spec, Season season) {
    for (int i = 0; i < kFoodItemCount; ++i) {
        const FoodItem item{i};
        if (agent.decide(item, season) != is_nutritious(item, spec)) return false;
    }
    return true;
}

void BehaviorVector::set(std::size_t i, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (value) {
        words_[i / 64] |= mask;
    } else {
        words_[i / 64] &= ~mask;
    }
}

std::size_t BehaviorVector::count() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::size_t hamming(const BehaviorVector& a, const BehaviorVector& b) {
    if (a.size_ != b.size_) throw StructuralError("behavior vectors differ in length");
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(a.words_[i] ^ b.words_[i]));
    return n;
}

BehaviorVector behavior_vector(std::span<const LifetimeLog> logs) {
    for (const LifetimeLog& log : logs) {
        if (log.steps.size() != kPresentations) throw StructuralError("training log is not a complete lifetime");
    }
    BehaviorVector bits(logs.size() * kPresentations);
    std::size_t i = 0;
    for (const LifetimeLog& log : logs) {
        for (const StepRecord& r : log.steps) bits.set(i++, r.eaten);
    }
    return bits;
}

}  // namespace diffmod::foraging
