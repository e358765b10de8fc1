#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "diffmod/ark.hpp"
#include "diffmod/foraging.hpp"

namespace diffmod::analysis {

struct SeasonProbeRecord {
    bool known_summer = false;
    bool known_winter = false;
    bool perfect = false;
    int retained = 0;
    int forgotten = 0;
    bool operator==(const SeasonProbeRecord&) const = default;
};

using ProbeSeries = std::array<SeasonProbeRecord, foraging::kSeasonCount>;

/// Fills perfect, retained and forgotten from the known flags. Season 1 has
/// nothing to retain.
void bookkeep(ProbeSeries& series);

/// Number of associations known at the season-end before `season_index`.
int known_before(const ProbeSeries& series, int season_index);

struct EnvironmentReport {
    std::uint64_t environment_seed = 0;
    double training_fitness = 0.0;
    double testing_fitness = 0.0;
    ProbeSeries probes{};
    std::array<double, foraging::kSeasonCount> curve{};  // training fitness per season
    int perfect = 0;                                     // seasons 2-6
    foraging::LifetimeLog training_log;
    std::vector<double> trained_weights;  // empty for agents without weights
};

/// Training phase with end-of-season probes on a copy of the agent, then a
/// learning-off replay of the same schedule with the learned weights.
EnvironmentReport analyze_environment(const foraging::Agent& newborn, const foraging::Environment& env);

/// 100 * retained / known at the preceding season-end over seasons 2-6; 0
/// when nothing was known.
double retained_percent(std::span<const ProbeSeries> series);

struct PostEvolutionReport {
    std::vector<EnvironmentReport> environments;
    double training_fitness = 0.0;
    double testing_fitness = 0.0;
    int perfect = 0;
    int perfect_ceiling = 0;
    double retained_percent = 0.0;
};

PostEvolutionReport post_evolution_analysis(const foraging::Agent& newborn,
                                            std::span<const foraging::Environment> environments, int threads = 1);

struct WeightChangeTable {
    // [season type][summer, winter, common]; unset without samples.
    std::array<std::array<std::optional<double>, 3>, 2> median{};
    std::array<std::array<std::size_t, 3>, 2> samples{};
    int environments_used = 0;
    int environments_excluded = 0;
};

/// Median accumulated |dw| over labeled connections and environments, per
/// season type. Environments without a CFN are excluded and counted.
WeightChangeTable weight_change_by_module(std::span<const foraging::LifetimeLog* const> logs,
                                          std::span<const ark::CoreFunctionalNetwork* const> cfns);

}  // namespace diffmod::analysis
