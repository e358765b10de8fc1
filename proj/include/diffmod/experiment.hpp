#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "diffmod/evolve.hpp"
#include "json.hpp"

namespace diffmod::experiment {

namespace fs = std::filesystem;

struct ExperimentConfig {
    evolve::EvolutionConfig evolution;
    int runs = 1;
    int analysis_environments = 80;
    fs::path out = "out";

    /// Throws ConfigError.
    void validate() const;
};

/// Population 40, 300 generations, 3 runs.
void apply_smoke_preset(ExperimentConfig& config);

/// Everything that influences results. Output path and thread count are
/// left out so archives do not depend on them.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Overrides the fields present in `doc`; unknown keys raise ConfigError.
void apply_config_json(ExperimentConfig& config, const nlohmann::json& doc);
ExperimentConfig load_config(const fs::path& path);

std::uint64_t run_seed(std::uint64_t master_seed, int run);
std::uint64_t analysis_environment_seed(std::uint64_t master_seed, int index);
std::vector<foraging::Environment> analysis_environments(std::uint64_t master_seed, int count);

fs::path run_directory(const fs::path& archive, int run);

/// Highest fitness, lowest index on ties.
int select_best(std::span<const double> fitness);

struct Selected {
    int run = 0;
    int individual = 0;
    double fitness = 0.0;
    neuro::Genome genome;
};

/// Best final-generation individual of every run in the archive.
std::vector<Selected> load_selection(const fs::path& archive, const ExperimentConfig& config);

void cmd_evolve(const ExperimentConfig& config, std::ostream& log);

void cmd_analyze(const fs::path& archive, std::optional<int> environments, int threads, std::ostream& log);

void cmd_ark(const fs::path& archive, std::optional<int> environments, int threads, std::ostream& log);

/// Needs at least two analyzed archives with equal environment counts.
void cmd_report(std::span<const fs::path> archives, const fs::path& out, std::ostream& log);

/// CFN of one run and analysis environment, as DOT text.
std::string cmd_export_dot(const fs::path& archive, int run, int environment);

}  // namespace diffmod::experiment
