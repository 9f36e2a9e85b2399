// Command-line front end: run experiments, evaluate bound reports, and dump
// the KL geometry of an instance.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cbandit/harness.hpp"

namespace {

// accepts either a full experiment config (with an "instance" object) or a
// bare instance document
cbandit::ExperimentConfig load_config(const std::string& path) {
    auto j = cbandit::load_json_file(path);
    if (j.contains("instance")) return cbandit::experiment_config_from_json(j);
    cbandit::ExperimentConfig c;
    c.env = cbandit::environment_spec_from_json(j);
    c.agents = {cbandit::AgentKind::thompson};
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thompson sampling simulator and bound calculator for complex bandits"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed_override = -1;
    std::int64_t reps_override = -1;
    std::int64_t horizon_override = -1;
    double epsilon_override = -1.0;
    bool bruteforce = false;

    auto* run = app.add_subcommand("run", "run replicated episodes and write traces");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "master seed override");
    run->add_option("--replications", reps_override, "replication count override");
    run->add_option("--horizon", horizon_override, "horizon override");

    auto* bounds = app.add_subcommand("bounds", "evaluate the bound report for an instance");
    bounds->add_option("--config", config_path, "experiment config or instance JSON")
        ->required();
    bounds->add_option("--epsilon", epsilon_override, "epsilon in (0,1)");
    bounds->add_option("--horizon", horizon_override, "horizon T");
    bounds->add_flag("--bruteforce", bruteforce, "enable the exhaustive C(log T) search");

    auto* geometry = app.add_subcommand("geometry", "dump the KL geometry report");
    geometry->add_option("--config", config_path, "experiment config or instance JSON")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cbandit::ExperimentConfig config = load_config(config_path);
        if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
        if (reps_override > 0) config.replications = static_cast<std::size_t>(reps_override);
        if (horizon_override > 0) config.horizon = static_cast<std::size_t>(horizon_override);
        if (epsilon_override > 0.0) config.epsilon = epsilon_override;
        if (bruteforce) config.enable_bruteforce = true;

        if (app.got_subcommand(run)) {
            auto summary = cbandit::run_experiment(config, out_dir);
            std::cout << cbandit::summary_report_to_json(summary).dump(2) << "\n";
        } else if (app.got_subcommand(bounds)) {
            auto built = cbandit::build_instance(config.env);
            auto report = cbandit::evaluate_bounds(built, config.epsilon,
                                                   static_cast<double>(config.horizon),
                                                   config.enable_bruteforce);
            std::cout << cbandit::bound_report_to_json(report).dump(2) << "\n";
        } else if (app.got_subcommand(geometry)) {
            auto built = cbandit::build_instance(config.env);
            auto dmatrix = cbandit::divergence_matrix(built.instance);
            auto regions = cbandit::decision_regions(built.instance, dmatrix);
            auto gaps = cbandit::gap_summary(regions, dmatrix);
            std::cout << cbandit::geometry_report_to_json(built, dmatrix, regions, gaps).dump(2)
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
