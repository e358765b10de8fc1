#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "diffmod/errors.hpp"
#include "diffmod/experiment.hpp"

namespace ex = diffmod::experiment;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> generations;
    std::optional<int> population;
    std::optional<std::string> treatment;
    std::optional<int> envs;
    std::string out = "out";
    int threads = 1;
    bool smoke = false;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "master seed");
    app->add_option("--runs", f.runs, "independent runs");
    app->add_option("--generations", f.generations, "generations per run");
    app->add_option("--population", f.population, "population size");
    app->add_option("--treatment", f.treatment, "PA, PCC, PA_D or PCC_D")
        ->check(CLI::IsMember({"PA", "PCC", "PA_D", "PCC_D"}));
    app->add_option("--envs", f.envs, "analysis environments");
    app->add_option("--out", f.out, "archive directory");
    app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--smoke", f.smoke, "population 40, 300 generations, 3 runs");
}

ex::ExperimentConfig build_config(const Flags& f) {
    ex::ExperimentConfig config;
    if (!f.config.empty()) config = ex::load_config(f.config);
    if (f.smoke) ex::apply_smoke_preset(config);
    if (f.seed) config.evolution.seed = *f.seed;
    if (f.runs) config.runs = *f.runs;
    if (f.generations) config.evolution.generations = *f.generations;
    if (f.population) config.evolution.population_size = *f.population;
    if (f.treatment) config.evolution.treatment = diffmod::evolve::parse_treatment(*f.treatment);
    if (f.envs) config.analysis_environments = *f.envs;
    config.out = f.out;
    config.evolution.threads = f.threads;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolve, analyze and dissect neuromodulated foraging networks"};
    app.require_subcommand(1);

    Flags evolve_flags;
    CLI::App* evolve = app.add_subcommand("evolve", "run PNSGA and write an archive");
    add_common(evolve, evolve_flags);

    Flags analyze_flags;
    CLI::App* analyze = app.add_subcommand("analyze", "training/testing analysis of the best individual per run");
    add_common(analyze, analyze_flags);

    Flags ark_flags;
    CLI::App* ark = app.add_subcommand("ark", "core functional networks, knockouts and functional modularity");
    add_common(ark, ark_flags);

    Flags report_flags;
    std::vector<std::string> archives;
    CLI::App* report = app.add_subcommand("report", "compare analyzed archives");
    report->add_option("archives", archives, "analyzed archive directories")->required()->expected(2, -1);
    report->add_option("--out", report_flags.out, "report directory")->required();

    Flags dot_flags;
    int dot_run = 0;
    int dot_env = 0;
    std::string dot_file;
    CLI::App* export_dot = app.add_subcommand("export-dot", "write the CFN of one run and environment as DOT");
    add_common(export_dot, dot_flags);
    export_dot->add_option("--run", dot_run, "run index");
    export_dot->add_option("--env", dot_env, "analysis environment index");
    export_dot->add_option("--dot", dot_file, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evolve->parsed()) {
            ex::cmd_evolve(build_config(evolve_flags), std::cerr);
        } else if (analyze->parsed()) {
            ex::cmd_analyze(analyze_flags.out, analyze_flags.envs, analyze_flags.threads, std::cerr);
        } else if (ark->parsed()) {
            ex::cmd_ark(ark_flags.out, ark_flags.envs, ark_flags.threads, std::cerr);
        } else if (report->parsed()) {
            std::vector<ex::fs::path> paths(archives.begin(), archives.end());
            ex::cmd_report(paths, report_flags.out, std::cout);
        } else if (export_dot->parsed()) {
            const std::string text = ex::cmd_export_dot(dot_flags.out, dot_run, dot_env);
            if (dot_file.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(dot_file, std::ios::binary);
                if (!out) throw diffmod::ConfigError("cannot write " + dot_file);
                out << text;
            }
        }
    } catch (const diffmod::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
