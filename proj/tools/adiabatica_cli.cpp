#include <CLI11.hpp>
#include <cstdio>

#include "adiabatica/models.hpp"
#include "adiabatica/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adiabatica: semiclassical band-dynamics experiments"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = 0;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment from a JSON config");
    run_cmd->add_option("config", config_path, "path to config.json (or a run manifest)")
        ->required();
    run_cmd->add_option("--threads", threads,
                        "worker thread cap (fallback: ADIABATICA_THREADS)");

    auto* list_cmd = app.add_subcommand("list-models", "print the model registry");

    std::string exp_name;
    auto* desc_cmd = app.add_subcommand("describe", "explain what an experiment measures");
    desc_cmd->add_option("experiment", exp_name, "experiment name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const auto& name : adiabatica::model_names()) {
                std::printf("%s\n  %s\n  defaults:", name.c_str(),
                            adiabatica::model_description(name).c_str());
                for (const auto& [k, v] : adiabatica::model_defaults(name))
                    std::printf(" %s=%g", k.c_str(), v);
                std::printf("\n");
            }
            return 0;
        }
        if (*desc_cmd) {
            std::printf("%s\n", adiabatica::describe_experiment(exp_name).c_str());
            return 0;
        }
        adiabatica::RunConfig cfg = adiabatica::parse_config_file(config_path);
        if (threads > 0) cfg.threads = threads;
        return adiabatica::run(cfg);
    } catch (const adiabatica::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const adiabatica::NumericalGuardError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    }
}
