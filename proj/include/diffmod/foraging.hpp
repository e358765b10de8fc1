#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "diffmod/neuro.hpp"
#include "json.hpp"

namespace diffmod::foraging {

inline constexpr int kFoodItemCount = 8;
inline constexpr int kSeasonCount = 6;  // summer, winter, repeated for three years
inline constexpr int kDaysPerSeason = 5;
inline constexpr int kPresentationsPerSeason = kDaysPerSeason * kFoodItemCount;
inline constexpr int kPresentations = kSeasonCount * kPresentationsPerSeason;

enum class Season { summer = 0, winter = 1 };

inline Season season_of(int season_index) { return season_index % 2 == 0 ? Season::summer : Season::winter; }
inline int output_node(Season season) {
    return season == Season::summer ? neuro::kSummerOutput : neuro::kWinterOutput;
}

/// One of the eight 3-bit food vectors; bit b is +1 when bit b of `index` is set.
struct FoodItem {
    int index = 0;
    int bit(int b) const { return (index >> b) & 1 ? 1 : -1; }
    bool operator==(const FoodItem&) const = default;
};

struct SeasonSpec {
    int decision_bit = 0;     // 0, 1 or 2
    int nutritious_sign = 1;  // -1 or 1
    bool operator==(const SeasonSpec&) const = default;
};

enum class FoodClass { nutritious, poisonous };

FoodClass classify(FoodItem item, const SeasonSpec& spec);
inline bool is_nutritious(FoodItem item, const SeasonSpec& spec) {
    return classify(item, spec) == FoodClass::nutritious;
}

/// Seasonal rules plus the presentation schedule of one lifetime.
struct Environment {
    std::uint64_t seed = 0;
    SeasonSpec summer;
    SeasonSpec winter;
    // schedule[season][day] is a permutation of the eight item indices.
    std::array<std::array<std::array<std::uint8_t, kFoodItemCount>, kDaysPerSeason>, kSeasonCount> schedule{};

    const SeasonSpec& spec(Season season) const { return season == Season::summer ? summer : winter; }
    FoodItem item_at(int step) const;
    bool operator==(const Environment&) const = default;
};

/// Decision bits uniform over {0,1,2}, nutritious sign a fair coin, daily
/// orderings uniform permutations. Fully determined by `seed`.
Environment generate_environment(std::uint64_t seed);

nlohmann::json environment_to_json(const Environment& env);
Environment environment_from_json(const nlohmann::json& doc);

/// Network input vector: food bits followed by summer and winter feedback.
std::array<double, neuro::kInputCount> make_inputs(FoodItem item, double summer_feedback, double winter_feedback);

/// A foraging agent. `decide` never changes learned state; `reinforce` is the
/// feedback sub-step after an eaten item and is only called when learning is on.
class Agent {
public:
    virtual ~Agent() = default;
    virtual bool decide(FoodItem item, Season season) = 0;
    /// Returns the weight deltas applied (empty for agents without weights).
    virtual std::span<const double> reinforce(FoodItem item, Season season, int feedback) = 0;
    virtual std::vector<double> weights() const { return {}; }
    virtual std::unique_ptr<Agent> clone() const = 0;
};

/// Eats iff the in-season output node's activation is positive. The feedback
/// sub-step re-presents the eaten item with its feedback on the in-season
/// feedback input (and point source), then applies plasticity.
class NetworkAgent final : public Agent {
public:
    explicit NetworkAgent(const neuro::Genome& genome, double learning_rate = neuro::kDefaultLearningRate,
                          double weight_limit = neuro::kDefaultWeightLimit);

    bool decide(FoodItem item, Season season) override;
    std::span<const double> reinforce(FoodItem item, Season season, int feedback) override;
    std::vector<double> weights() const override;
    std::unique_ptr<Agent> clone() const override;

    /// Mutable access drops the cached decisions.
    neuro::Network& network() {
        decisions_.fill(-1);
        return network_;
    }
    const neuro::Network& network() const { return network_; }

private:
    neuro::Network network_;
    double learning_rate_;
    // Decisions only depend on the weights, so they are reused until a weight changes.
    std::array<std::int8_t, 2 * kFoodItemCount> decisions_;
};

/// Fixed-policy agents used as references.
class ScriptedAgent final : public Agent {
public:
    enum class Policy { never_eat, always_eat, oracle };

    static ScriptedAgent never_eat() { return ScriptedAgent(Policy::never_eat, {}); }
    static ScriptedAgent always_eat() { return ScriptedAgent(Policy::always_eat, {}); }
    /// Eats exactly the items the environment's seasonal rules call nutritious.
    static ScriptedAgent oracle(const Environment& env) { return ScriptedAgent(Policy::oracle, env); }

    bool decide(FoodItem item, Season season) override;
    std::span<const double> reinforce(FoodItem, Season, int) override { return {}; }
    std::unique_ptr<Agent> clone() const override { return std::make_unique<ScriptedAgent>(*this); }

private:
    ScriptedAgent(Policy policy, Environment env) : policy_(policy), env_(env) {}
    Policy policy_;
    Environment env_;
};

struct StepRecord {
    int season_index = 0;
    int day = 0;
    int item = 0;
    bool eaten = false;
    bool nutritious = false;
    int feedback = 0;  // delivered on the feedback sub-step: +1, -1, or 0 when not eaten
};

struct LifetimeLog {
    std::vector<StepRecord> steps;
    // Sum of |dw| per connection over summer steps [0] and winter steps [1].
    std::array<std::vector<double>, 2> accumulated_change;
    std::vector<std::vector<double>> season_end_weights;
    std::vector<int> tally;  // running (nutritious eaten - poisonous eaten) after each step

    int nutritious_eaten() const;
    int poisonous_eaten() const;
};

struct LifetimeResult {
    double fitness = 0.0;
    LifetimeLog log;
};

struct LifetimeHooks {
    /// Called after the last presentation of each season, learning state intact.
    std::function<void(int season_index, Agent& agent)> at_season_end;
};

inline double fitness_from_counts(int nutritious, int poisonous, int total_food) {
    return 0.5 + static_cast<double>(nutritious - poisonous) / total_food;
}

/// Steps through the full schedule. With `learning` off the agent's weights
/// are never touched (testing phase).
LifetimeResult run_lifetime(Agent& agent, const Environment& env, bool learning, const LifetimeHooks& hooks = {});

/// Fitness restricted to one season index (40 presentations).
double season_fitness(const LifetimeLog& log, int season_index);
/// Fitness restricted to all presentations of one season type (120).
double season_type_fitness(const LifetimeLog& log, Season season);

/// Presents all eight items with zero feedback; true iff the agent eats every
/// nutritious item and no poisonous one.
bool probe_known(Agent& agent, const SeasonSpec& spec, Season season);

/// Packed eat/not-eat bits.
class BehaviorVector {
public:
    BehaviorVector() = default;
    explicit BehaviorVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    std::size_t size() const { return size_; }
    bool bit(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
    void set(std::size_t i, bool value);
    std::size_t count() const;
    bool operator==(const BehaviorVector&) const = default;

    friend std::size_t hamming(const BehaviorVector& a, const BehaviorVector& b);

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Concatenated eat bits of several training logs, in presentation order.
BehaviorVector behavior_vector(std::span<const LifetimeLog> logs);

}  // namespace diffmod::foraging
