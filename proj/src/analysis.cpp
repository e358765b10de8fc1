#include "diffmod/analysis.hpp"

#include "diffmod/errors.hpp"
#include "diffmod/parallel.hpp"
#include "diffmod/stats.hpp"

namespace diffmod::analysis {

using foraging::Season;

void bookkeep(ProbeSeries& series) {
    for (std::size_t s = 0; s < series.size(); ++s) {
        SeasonProbeRecord& r = series[s];
        r.perfect = r.known_summer && r.known_winter;
        r.retained = 0;
        r.forgotten = 0;
        if (s == 0) continue;
        const SeasonProbeRecord& prev = series[s - 1];
        for (auto [was, is] : {std::pair{prev.known_summer, r.known_summer}, std::pair{prev.known_winter, r.known_winter}}) {
            if (!was) continue;
            (is ? r.retained : r.forgotten) += 1;
        }
    }
}

int known_before(const ProbeSeries& series, int season_index) {
    if (season_index <= 0) return 0;
    const SeasonProbeRecord& prev = series[static_cast<std::size_t>(season_index) - 1];
    return (prev.known_summer ? 1 : 0) + (prev.known_winter ? 1 : 0);
}

EnvironmentReport analyze_environment(const foraging::Agent& newborn, const foraging::Environment& env) {
    EnvironmentReport report;
    report.environment_seed = env.seed;
    std::unique_ptr<foraging::Agent> agent = newborn.clone();

    foraging::LifetimeHooks hooks;
    hooks.at_season_end = [&](int season_index, foraging::Agent& live) {
        std::unique_ptr<foraging::Agent> probe = live.clone();
        SeasonProbeRecord& r = report.probes[static_cast<std::size_t>(season_index)];
        r.known_summer = foraging::probe_known(*probe, env.summer, Season::summer);
        r.known_winter = foraging::probe_known(*probe, env.winter, Season::winter);
    };
    foraging::LifetimeResult training = foraging::run_lifetime(*agent, env, true, hooks);
    bookkeep(report.probes);
    report.training_fitness = training.fitness;
    for (int s = 0; s < foraging::kSeasonCount; ++s) {
        report.curve[static_cast<std::size_t>(s)] = foraging::season_fitness(training.log, s);
        if (s > 0 && report.probes[static_cast<std::size_t>(s)].perfect) ++report.perfect;
    }
    report.trained_weights = agent->weights();
    report.training_log = std::move(training.log);

    report.testing_fitness = foraging::run_lifetime(*agent, env, false).fitness;
    return report;
}

double retained_percent(std::span<const ProbeSeries> series) {
    long retained = 0;
    long known = 0;
    for (const ProbeSeries& s : series) {
        for (int i = 1; i < foraging::kSeasonCount; ++i) {
            retained += s[static_cast<std::size_t>(i)].retained;
            known += known_before(s, i);
        }
    }
    return known == 0 ? 0.0 : 100.0 * static_cast<double>(retained) / static_cast<double>(known);
}

PostEvolutionReport post_evolution_analysis(const foraging::Agent& newborn,
                                            std::span<const foraging::Environment> environments, int threads) {
    PostEvolutionReport report;
    report.environments.resize(environments.size());
    parallel_for(static_cast<int>(environments.size()), threads, [&](int i) {
        report.environments[static_cast<std::size_t>(i)] = analyze_environment(newborn, environments[static_cast<std::size_t>(i)]);
    });
    std::vector<ProbeSeries> series;
    for (const EnvironmentReport& e : report.environments) {
        report.training_fitness += e.training_fitness;
        report.testing_fitness += e.testing_fitness;
        report.perfect += e.perfect;
        series.push_back(e.probes);
    }
    if (!environments.empty()) {
        report.training_fitness /= static_cast<double>(environments.size());
        report.testing_fitness /= static_cast<double>(environments.size());
    }
    report.perfect_ceiling = static_cast<int>(environments.size()) * (foraging::kSeasonCount - 1);
    report.retained_percent = retained_percent(series);
    return report;
}

WeightChangeTable weight_change_by_module(std::span<const foraging::LifetimeLog* const> logs,
                                          std::span<const ark::CoreFunctionalNetwork* const> cfns) {
    if (logs.size() != cfns.size()) throw StructuralError("one CFN slot per training log is required");
    WeightChangeTable table;
    std::array<std::array<std::vector<double>, 3>, 2> values;
    for (std::size_t e = 0; e < logs.size(); ++e) {
        if (cfns[e] == nullptr || logs[e] == nullptr) {
            ++table.environments_excluded;
            continue;
        }
        ++table.environments_used;
        const auto& labels = cfns[e]->labels;
        for (std::size_t season = 0; season < 2; ++season) {
            const std::vector<double>& change = logs[e]->accumulated_change[season];
            if (change.size() != labels.size()) throw StructuralError("CFN labels do not match the logged connections");
            for (std::size_t c = 0; c < labels.size(); ++c) {
                int slot = -1;
                switch (labels[c]) {
                    case ark::ModuleLabel::summer:
                        slot = 0;
                        break;
                    case ark::ModuleLabel::winter:
                        slot = 1;
                        break;
                    case ark::ModuleLabel::common:
                        slot = 2;
                        break;
                    case ark::ModuleLabel::none:
                        break;
                }
                if (slot >= 0) values[season][static_cast<std::size_t>(slot)].push_back(change[c]);
            }
        }
    }
    for (std::size_t season = 0; season < 2; ++season) {
        for (std::size_t slot = 0; slot < 3; ++slot) {
            const auto& v = values[season][slot];
            table.samples[season][slot] = v.size();
            if (!v.empty()) table.median[season][slot] = stats::median(v);
        }
    }
    return table;
}

}  // namespace diffmod::analysis
