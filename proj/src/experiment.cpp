#include "diffmod/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "diffmod/analysis.hpp"
#include "diffmod/ark.hpp"
#include "diffmod/csv.hpp"
#include "diffmod/dot.hpp"
#include "diffmod/errors.hpp"
#include "diffmod/genome_io.hpp"
#include "diffmod/parallel.hpp"
#include "diffmod/stats.hpp"

namespace diffmod::experiment {

using nlohmann::json;
using csv::format_number;

void ExperimentConfig::validate() const {
    evolution.validate();
    if (runs < 1) throw ConfigError("run count must be at least 1");
    if (analysis_environments < 1) throw ConfigError("analysis environment count must be at least 1");
}

void apply_smoke_preset(ExperimentConfig& config) {
    config.evolution.population_size = 40;
    config.evolution.generations = 300;
    config.runs = 3;
}

namespace {

const char* cost_measure_name(evolve::CostMeasure m) {
    return m == evolve::CostMeasure::connection_count ? "connection_count" : "squared_length";
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream out;
    out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    if (!out) throw ConfigError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::ofstream open_csv(const fs::path& path, const std::vector<std::string>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    csv::write_row(out, header);
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create directory " + dir.string());
}

std::string padded(int value, int width = 3) {
    std::ostringstream out;
    out << std::setw(width) << std::setfill('0') << value;
    return out.str();
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

ExperimentConfig archive_config(const fs::path& archive) {
    if (!fs::exists(archive / "config.json")) throw ConfigError("no archive at " + archive.string());
    ExperimentConfig config;
    apply_config_json(config, read_json(archive / "config.json"));
    config.out = archive;
    return config;
}

int environment_count(const fs::path& archive, const ExperimentConfig& config, std::optional<int> requested) {
    if (requested) {
        if (*requested < 1) throw ConfigError("environment count must be at least 1");
        return *requested;
    }
    if (fs::exists(archive / "analysis" / "summary.json")) {
        return read_json(archive / "analysis" / "summary.json").at("environments").get<int>();
    }
    return config.analysis_environments;
}

neuro::Genome with_weights(neuro::Genome genome, const std::vector<double>& weights) {
    for (std::size_t c = 0; c < genome.connections.size(); ++c) genome.connections[c].weight = weights[c];
    return genome;
}

}  // namespace

json config_to_json(const ExperimentConfig& config) {
    const evolve::EvolutionConfig& e = config.evolution;
    json doc{
        {"treatment", std::string(evolve::to_string(e.treatment))},
        {"seed", e.seed},
        {"runs", config.runs},
        {"population", e.population_size},
        {"generations", e.generations},
        {"environments_per_evaluation", e.environments_per_evaluation},
        {"analysis_environments", config.analysis_environments},
        {"weight_limit", e.weight_limit},
        {"learning_rate", e.learning_rate},
        {"mutation",
         {{"add_connection", e.mutation.add_connection},
          {"remove_connection", e.mutation.remove_connection},
          {"rewire", e.mutation.rewire},
          {"weight_numerator", e.mutation.weight_numerator},
          {"bias", e.mutation.bias},
          {"modul", e.mutation.modul},
          {"distribution_index", e.mutation.distribution_index}}},
        {"objective_probabilities",
         {{"performance", e.performance_probability},
          {"diversity", e.diversity_probability},
          {"cost", e.cost_probability}}},
        {"cost_measure", cost_measure_name(e.cost_measure)},
        {"resample_environments", e.resample_environments},
        {"reevaluate_parents", e.reevaluate_parents},
    };
    if (!e.layout.empty()) {
        json layout = json::array();
        for (const neuro::Point& p : e.layout) layout.push_back({p.x, p.y});
        doc["layout"] = std::move(layout);
    }
    return doc;
}

void apply_config_json(ExperimentConfig& config, const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    evolve::EvolutionConfig& e = config.evolution;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "treatment") {
                e.treatment = evolve::parse_treatment(value.get<std::string>());
            } else if (key == "seed") {
                e.seed = value.get<std::uint64_t>();
            } else if (key == "runs") {
                config.runs = value.get<int>();
            } else if (key == "population") {
                e.population_size = value.get<int>();
            } else if (key == "generations") {
                e.generations = value.get<int>();
            } else if (key == "environments_per_evaluation") {
                e.environments_per_evaluation = value.get<int>();
            } else if (key == "analysis_environments") {
                config.analysis_environments = value.get<int>();
            } else if (key == "weight_limit") {
                e.weight_limit = value.get<double>();
            } else if (key == "learning_rate") {
                e.learning_rate = value.get<double>();
            } else if (key == "threads") {
                e.threads = value.get<int>();
            } else if (key == "out") {
                config.out = value.get<std::string>();
            } else if (key == "mutation") {
                for (const auto& [name, v] : value.items()) {
                    const double x = v.get<double>();
                    if (name == "add_connection") e.mutation.add_connection = x;
                    else if (name == "remove_connection") e.mutation.remove_connection = x;
                    else if (name == "rewire") e.mutation.rewire = x;
                    else if (name == "weight_numerator") e.mutation.weight_numerator = x;
                    else if (name == "bias") e.mutation.bias = x;
                    else if (name == "modul") e.mutation.modul = x;
                    else if (name == "distribution_index") e.mutation.distribution_index = x;
                    else throw ConfigError("unknown mutation key '" + name + "'");
                }
            } else if (key == "objective_probabilities") {
                for (const auto& [name, v] : value.items()) {
                    const double x = v.get<double>();
                    if (name == "performance") e.performance_probability = x;
                    else if (name == "diversity") e.diversity_probability = x;
                    else if (name == "cost") e.cost_probability = x;
                    else throw ConfigError("unknown objective '" + name + "'");
                }
            } else if (key == "cost_measure") {
                const std::string name = value.get<std::string>();
                if (name == "connection_count") e.cost_measure = evolve::CostMeasure::connection_count;
                else if (name == "squared_length") e.cost_measure = evolve::CostMeasure::squared_length;
                else throw ConfigError("unknown cost measure '" + name + "'");
            } else if (key == "resample_environments") {
                e.resample_environments = value.get<bool>();
            } else if (key == "reevaluate_parents") {
                e.reevaluate_parents = value.get<bool>();
            } else if (key == "layout") {
                e.layout.clear();
                for (const json& p : value) e.layout.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad config value: ") + ex.what());
    }
}

ExperimentConfig load_config(const fs::path& path) {
    ExperimentConfig config;
    apply_config_json(config, read_json(path));
    return config;
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) {
    return derive_seed(master_seed, "run", static_cast<std::uint64_t>(run));
}

std::uint64_t analysis_environment_seed(std::uint64_t master_seed, int index) {
    return derive_seed(master_seed, "analysis_env", static_cast<std::uint64_t>(index));
}

std::vector<foraging::Environment> analysis_environments(std::uint64_t master_seed, int count) {
    std::vector<foraging::Environment> envs;
    envs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) envs.push_back(foraging::generate_environment(analysis_environment_seed(master_seed, i)));
    return envs;
}

fs::path run_directory(const fs::path& archive, int run) { return archive / ("run_" + padded(run)); }

int select_best(std::span<const double> fitness) {
    if (fitness.empty()) throw ConfigError("cannot select from an empty population");
    int best = 0;
    for (std::size_t i = 1; i < fitness.size(); ++i) {
        if (fitness[i] > fitness[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

std::vector<Selected> load_selection(const fs::path& archive, const ExperimentConfig& config) {
    std::vector<Selected> selection;
    for (int run = 0; run < config.runs; ++run) {
        const fs::path file = run_directory(archive, run) / "population.json";
        if (!fs::exists(file)) throw ConfigError("archive has no final population for run " + std::to_string(run));
        const json doc = read_json(file);
        const json& individuals = doc.at("individuals");
        if (individuals.empty()) throw ConfigError("empty population in " + file.string());
        std::vector<double> fitness;
        for (const json& ind : individuals) fitness.push_back(ind.at("fitness").get<double>());
        const int best = select_best(fitness);
        Selected s;
        s.run = run;
        s.individual = best;
        s.fitness = fitness[static_cast<std::size_t>(best)];
        s.genome = neuro::genome_from_json(individuals[static_cast<std::size_t>(best)].at("genome"));
        selection.push_back(std::move(s));
    }
    return selection;
}

void cmd_evolve(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    ensure_directory(config.out);
    write_text(config.out / "config.json", config_to_json(config).dump(2) + "\n");
    json metadata{{"started", timestamp()}, {"threads", config.evolution.threads}};
    write_text(config.out / "metadata.json", metadata.dump(2) + "\n");

    const std::string treatment(evolve::to_string(config.evolution.treatment));
    for (int run = 0; run < config.runs; ++run) {
        const fs::path dir = run_directory(config.out, run);
        ensure_directory(dir);
        std::ofstream stream(dir / "generations.jsonl", std::ios::binary);
        if (!stream) throw ConfigError("cannot write " + (dir / "generations.jsonl").string());
        evolve::Evolution evolution(config.evolution, run_seed(config.evolution.seed, run));
        const int report_every = std::max(1, config.evolution.generations / 10);
        for (int g = 0; g < config.evolution.generations; ++g) {
            const evolve::GenerationStats stats = evolution.step();
            json line{{"generation", stats.generation},
                      {"best_fitness", stats.best_fitness},
                      {"median_fitness", stats.median_fitness},
                      {"median_cost", stats.median_cost},
                      {"objectives", {stats.objectives[0], stats.objectives[1], stats.objectives[2]}},
                      {"checkpoint", stats.checkpoint}};
            stream << line.dump() << '\n';
            if ((g + 1) % report_every == 0 || g + 1 == config.evolution.generations) {
                log << treatment << " run " << run << " generation " << g + 1 << "/" << config.evolution.generations
                    << " best " << format_number(stats.best_fitness) << " median "
                    << format_number(stats.median_fitness) << "\n";
            }
        }
        json individuals = json::array();
        for (std::size_t i = 0; i < evolution.population().size(); ++i) {
            const evolve::Individual& ind = evolution.population()[i];
            individuals.push_back({{"index", i},
                                   {"fitness", ind.evaluation.fitness},
                                   {"cost", ind.evaluation.cost},
                                   {"diversity", ind.diversity},
                                   {"genome", neuro::genome_to_json(ind.genome)}});
        }
        json population{{"run", run},
                        {"seed", run_seed(config.evolution.seed, run)},
                        {"generations", config.evolution.generations},
                        {"individuals", std::move(individuals)}};
        write_text(dir / "population.json", population.dump(1) + "\n");
    }
    metadata["finished"] = timestamp();
    write_text(config.out / "metadata.json", metadata.dump(2) + "\n");
}

void cmd_analyze(const fs::path& archive, std::optional<int> environments, int threads, std::ostream& log) {
    const ExperimentConfig config = archive_config(archive);
    const int count = environments.value_or(config.analysis_environments);
    if (count < 1) throw ConfigError("environment count must be at least 1");
    const std::vector<Selected> selection = load_selection(archive, config);
    const std::vector<foraging::Environment> envs = analysis_environments(config.evolution.seed, count);
    const fs::path dir = archive / "analysis";
    ensure_directory(dir);
    const std::string treatment(evolve::to_string(config.evolution.treatment));

    json env_doc = json::array();
    for (const foraging::Environment& env : envs) env_doc.push_back(foraging::environment_to_json(env));
    write_text(dir / "environments.json", env_doc.dump(1) + "\n");

    std::ofstream report = open_csv(dir / "report.csv",
                                    {"treatment", "run", "individual", "environment", "environment_seed",
                                     "training_fitness", "testing_fitness", "perfect", "retained", "forgotten",
                                     "known_previous", "retained_percent"});
    std::ofstream curves = open_csv(dir / "lifetime_curves.csv",
                                    {"treatment", "run", "individual", "environment", "season", "fitness"});
    std::ofstream probes = open_csv(dir / "probes.csv",
                                    {"treatment", "run", "environment", "season", "known_summer", "known_winter",
                                     "perfect", "retained", "forgotten"});
    json selected = json::array();
    json runs = json::array();

    for (const Selected& s : selection) {
        const foraging::NetworkAgent newborn(s.genome, config.evolution.learning_rate, config.evolution.weight_limit);
        const analysis::PostEvolutionReport result = analysis::post_evolution_analysis(newborn, envs, threads);
        const std::string run = std::to_string(s.run);
        const std::string individual = std::to_string(s.individual);
        int retained_total = 0;
        int forgotten_total = 0;
        int known_total = 0;
        for (std::size_t e = 0; e < result.environments.size(); ++e) {
            const analysis::EnvironmentReport& r = result.environments[e];
            int retained = 0;
            int forgotten = 0;
            int known = 0;
            for (int season = 0; season < foraging::kSeasonCount; ++season) {
                const analysis::SeasonProbeRecord& p = r.probes[static_cast<std::size_t>(season)];
                retained += p.retained;
                forgotten += p.forgotten;
                known += analysis::known_before(r.probes, season);
                csv::write_row(probes, {treatment, run, std::to_string(e), std::to_string(season + 1),
                                        std::to_string(p.known_summer), std::to_string(p.known_winter),
                                        std::to_string(p.perfect), std::to_string(p.retained),
                                        std::to_string(p.forgotten)});
                csv::write_row(curves, {treatment, run, individual, std::to_string(e), std::to_string(season + 1),
                                        format_number(r.curve[static_cast<std::size_t>(season)])});
            }
            retained_total += retained;
            forgotten_total += forgotten;
            known_total += known;
            const double percent = known == 0 ? 0.0 : 100.0 * retained / known;
            csv::write_row(report, {treatment, run, individual, std::to_string(e), std::to_string(r.environment_seed),
                                    format_number(r.training_fitness), format_number(r.testing_fitness),
                                    std::to_string(r.perfect), std::to_string(retained), std::to_string(forgotten),
                                    std::to_string(known), format_number(percent)});
        }
        csv::write_row(report, {treatment, run, individual, "all", "", format_number(result.training_fitness),
                                format_number(result.testing_fitness), std::to_string(result.perfect),
                                std::to_string(retained_total), std::to_string(forgotten_total),
                                std::to_string(known_total), format_number(result.retained_percent)});
        selected.push_back({{"run", s.run}, {"individual", s.individual}, {"fitness", s.fitness},
                            {"genome", neuro::genome_to_json(s.genome)}});
        runs.push_back({{"run", s.run},
                        {"training_fitness", result.training_fitness},
                        {"testing_fitness", result.testing_fitness},
                        {"perfect", result.perfect},
                        {"perfect_ceiling", result.perfect_ceiling},
                        {"retained_percent", result.retained_percent}});
        log << treatment << " run " << s.run << " analyzed: testing fitness " << format_number(result.testing_fitness)
            << ", perfect " << result.perfect << "/" << result.perfect_ceiling << ", retained "
            << format_number(result.retained_percent) << "%\n";
    }
    write_text(dir / "selected.json", selected.dump(1) + "\n");
    json summary{{"treatment", treatment}, {"environments", count}, {"runs", std::move(runs)}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
}

namespace {

struct EnvironmentArk {
    std::string status = "ok";
    ark::CoreFunctionalNetwork cfn;
    std::vector<ark::KnockoutResult> knockout;
    foraging::LifetimeLog log;
    std::string dot;
    bool has_cfn = false;
};

EnvironmentArk ark_environment(const ExperimentConfig& config, const Selected& s, const foraging::Environment& env,
                               int index, int environment_count) {
    EnvironmentArk out;
    foraging::NetworkAgent agent(s.genome, config.evolution.learning_rate, config.evolution.weight_limit);
    foraging::LifetimeResult training = foraging::run_lifetime(agent, env, true);
    out.log = std::move(training.log);
    const neuro::Genome trained = with_weights(s.genome, agent.weights());
    const std::uint64_t slot = static_cast<std::uint64_t>(s.run) * static_cast<std::uint64_t>(environment_count) +
                               static_cast<std::uint64_t>(index);
    try {
        const ark::ActivationRecord record = ark::record_activations(trained, env, config.evolution.weight_limit);
        ark::CfnOptions options;
        options.weight_limit = config.evolution.weight_limit;
        options.partition_seed = derive_seed(config.evolution.seed, "partition", slot);
        out.cfn = ark::build_cfn(trained, env, record, options);
        out.has_cfn = true;
        Rng rng(derive_seed(config.evolution.seed, "knockout", slot));
        out.knockout = ark::one_connection_knockout(out.cfn, trained, env, rng, config.evolution.weight_limit);
        out.dot = dot::to_dot(trained, &out.cfn,
                              {{"run", std::to_string(s.run)},
                               {"environment", std::to_string(index)},
                               {"threshold", format_number(out.cfn.threshold)},
                               {"original_fitness", format_number(out.cfn.original_fitness)},
                               {"cfn_fitness", format_number(out.cfn.fitness)},
                               {"origM", optional_number(out.cfn.original_q)},
                               {"cfnM", optional_number(out.cfn.q)}});
    } catch (const CapacityError& e) {
        out.status = "capacity_error:node_" + std::to_string(e.node());
    } catch (const SelectionError& e) {
        out.status = "selection_error:node_" + std::to_string(e.node());
    }
    return out;
}

}  // namespace

void cmd_ark(const fs::path& archive, std::optional<int> environments, int threads, std::ostream& log) {
    const ExperimentConfig config = archive_config(archive);
    const int count = environment_count(archive, config, environments);
    const std::vector<Selected> selection = load_selection(archive, config);
    const std::vector<foraging::Environment> envs = analysis_environments(config.evolution.seed, count);
    const fs::path dir = archive / "ark";
    ensure_directory(dir);
    const std::string treatment(evolve::to_string(config.evolution.treatment));

    std::ofstream modularity = open_csv(dir / "functional_modularity.csv",
                                        {"treatment", "run", "environment", "status", "threshold", "original_fitness",
                                         "cfn_fitness", "origM", "cfnM", "summer", "winter", "common", "bias_nodes"});
    std::ofstream knockout = open_csv(dir / "knockout.csv", {"treatment", "run", "environment", "knockout", "available",
                                                             "connection", "summer_fitness", "winter_fitness"});
    std::ofstream changes = open_csv(dir / "weight_change.csv",
                                     {"treatment", "run", "season", "module", "median", "samples",
                                      "environments_used", "environments_excluded"});
    json runs = json::array();

    for (const Selected& s : selection) {
        const fs::path run_dir = dir / ("run_" + padded(s.run));
        ensure_directory(run_dir);
        std::vector<EnvironmentArk> results(envs.size());
        parallel_for(count, threads, [&](int e) {
            results[static_cast<std::size_t>(e)] = ark_environment(config, s, envs[static_cast<std::size_t>(e)], e, count);
        });
        const std::string run = std::to_string(s.run);
        std::vector<const foraging::LifetimeLog*> logs;
        std::vector<const ark::CoreFunctionalNetwork*> cfns;
        std::vector<double> cfn_q;
        int failures = 0;
        for (std::size_t e = 0; e < results.size(); ++e) {
            const EnvironmentArk& r = results[e];
            logs.push_back(&r.log);
            cfns.push_back(r.has_cfn ? &r.cfn : nullptr);
            const std::string env = std::to_string(e);
            if (!r.has_cfn) {
                ++failures;
                csv::write_row(modularity, {treatment, run, env, r.status, "", "", "", "", "", "", "", "", ""});
                continue;
            }
            if (r.cfn.q) cfn_q.push_back(*r.cfn.q);
            csv::write_row(modularity,
                           {treatment, run, env, r.status, format_number(r.cfn.threshold),
                            format_number(r.cfn.original_fitness), format_number(r.cfn.fitness),
                            optional_number(r.cfn.original_q), optional_number(r.cfn.q),
                            std::to_string(r.cfn.connections_with(ark::ModuleLabel::summer).size()),
                            std::to_string(r.cfn.connections_with(ark::ModuleLabel::winter).size()),
                            std::to_string(r.cfn.connections_with(ark::ModuleLabel::common).size()),
                            std::to_string(r.cfn.bias_nodes.size())});
            for (const ark::KnockoutResult& k : r.knockout) {
                csv::write_row(knockout, {treatment, run, env, std::string(ark::to_string(k.knockout)),
                                          std::to_string(k.available), k.available ? std::to_string(k.connection) : "",
                                          k.available ? format_number(k.summer_fitness) : "",
                                          k.available ? format_number(k.winter_fitness) : ""});
            }
            write_text(run_dir / ("env_" + padded(static_cast<int>(e)) + ".dot"), r.dot);
        }
        const analysis::WeightChangeTable table = analysis::weight_change_by_module(logs, cfns);
        const char* seasons[] = {"summer", "winter"};
        const char* modules[] = {"summer", "winter", "common"};
        for (std::size_t season = 0; season < 2; ++season) {
            for (std::size_t m = 0; m < 3; ++m) {
                csv::write_row(changes, {treatment, run, seasons[season], modules[m],
                                         optional_number(table.median[season][m]),
                                         std::to_string(table.samples[season][m]),
                                         std::to_string(table.environments_used),
                                         std::to_string(table.environments_excluded)});
            }
        }
        json entry{{"run", s.run}, {"cfns", count - failures}, {"failures", failures}};
        entry["functional_modularity"] = cfn_q.empty() ? json(nullptr) : json(stats::median(cfn_q));
        runs.push_back(std::move(entry));
        log << treatment << " run " << s.run << ": " << count - failures << " CFNs";
        if (!cfn_q.empty()) log << ", median cfnM " << format_number(stats::median(cfn_q));
        log << "\n";
    }
    json summary{{"treatment", treatment}, {"environments", count}, {"runs", std::move(runs)}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
}

void cmd_report(std::span<const fs::path> archives, const fs::path& out, std::ostream& log) {
    if (archives.size() < 2) throw ConfigError("report needs at least two archives");
    struct Column {
        std::string label;
        std::string archive;
        std::map<std::string, std::vector<double>> metrics;
    };
    std::vector<Column> columns;
    std::optional<int> environments;
    std::map<std::string, int> label_uses;
    for (const fs::path& archive : archives) {
        const fs::path summary_path = archive / "analysis" / "summary.json";
        if (!fs::exists(summary_path)) throw ConfigError(archive.string() + " has not been analyzed");
        const json summary = read_json(summary_path);
        const int count = summary.at("environments").get<int>();
        if (environments && *environments != count) {
            throw ConfigError("archives were analyzed over different environment counts (" +
                              std::to_string(*environments) + " vs " + std::to_string(count) + ")");
        }
        environments = count;
        Column column;
        column.label = summary.at("treatment").get<std::string>();
        if (const int use = ++label_uses[column.label]; use > 1) column.label += "#" + std::to_string(use);
        // directory name only, so reports do not depend on where archives live
        const fs::path normal = archive.lexically_normal();
        column.archive = (normal.has_filename() ? normal : normal.parent_path()).filename().string();
        for (const json& run : summary.at("runs")) {
            for (const char* metric : {"training_fitness", "testing_fitness", "perfect", "retained_percent"}) {
                column.metrics[metric].push_back(run.at(metric).get<double>());
            }
        }
        const fs::path ark_path = archive / "ark" / "summary.json";
        if (fs::exists(ark_path)) {
            const json ark_summary = read_json(ark_path);
            for (const json& run : ark_summary.at("runs")) {
                if (!run.at("functional_modularity").is_null()) {
                    column.metrics["functional_modularity"].push_back(run.at("functional_modularity").get<double>());
                }
            }
        }
        columns.push_back(std::move(column));
    }

    ensure_directory(out);
    const std::vector<std::string> metrics{"training_fitness", "testing_fitness", "perfect", "retained_percent",
                                           "functional_modularity"};
    std::ofstream comparison = open_csv(out / "comparison.csv",
                                        {"treatment", "archive", "metric", "runs", "median", "q25", "q75"});
    for (const Column& c : columns) {
        for (const std::string& metric : metrics) {
            const auto it = c.metrics.find(metric);
            if (it == c.metrics.end() || it->second.empty()) continue;
            const auto& v = it->second;
            csv::write_row(comparison, {c.label, c.archive, metric, std::to_string(v.size()),
                                        format_number(stats::median(v)), format_number(stats::percentile(v, 25.0)),
                                        format_number(stats::percentile(v, 75.0))});
        }
    }
    std::ofstream pvalues = open_csv(out / "pvalues.csv", {"metric", "treatment_a", "treatment_b", "u", "z", "p_value"});
    for (std::size_t i = 0; i < columns.size(); ++i) {
        for (std::size_t j = i + 1; j < columns.size(); ++j) {
            for (const std::string& metric : metrics) {
                const auto a = columns[i].metrics.find(metric);
                const auto b = columns[j].metrics.find(metric);
                if (a == columns[i].metrics.end() || b == columns[j].metrics.end() || a->second.empty() ||
                    b->second.empty()) {
                    continue;
                }
                const stats::MannWhitneyResult mw = stats::mann_whitney_u(a->second, b->second);
                csv::write_row(pvalues, {metric, columns[i].label, columns[j].label, format_number(mw.u),
                                         format_number(mw.z), format_number(mw.p_value)});
                if (metric == "testing_fitness") {
                    log << columns[i].label << " vs " << columns[j].label << " testing fitness p = "
                        << format_number(mw.p_value) << "\n";
                }
            }
        }
    }
}

std::string cmd_export_dot(const fs::path& archive, int run, int environment) {
    const ExperimentConfig config = archive_config(archive);
    const int count = environment_count(archive, config, std::nullopt);
    if (run < 0 || run >= config.runs) throw ConfigError("run " + std::to_string(run) + " is not in the archive");
    if (environment < 0 || environment >= count) {
        throw ConfigError("environment " + std::to_string(environment) + " is outside [0, " + std::to_string(count) + ")");
    }
    const std::vector<Selected> selection = load_selection(archive, config);
    const foraging::Environment env =
        foraging::generate_environment(analysis_environment_seed(config.evolution.seed, environment));
    const EnvironmentArk result = ark_environment(config, selection[static_cast<std::size_t>(run)], env, environment, count);
    if (!result.has_cfn) {
        return dot::to_dot(selection[static_cast<std::size_t>(run)].genome, nullptr, {{"status", result.status}});
    }
    return result.dot;
}

}  // namespace diffmod::experiment
