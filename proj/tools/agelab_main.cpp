#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "agelab/commands.hpp"
#include "agelab/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"agelab: desk-scale age and gender estimation pipeline"};

    std::string command;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    std::string command_help = "one of: ";
    for (const std::string& name : agelab::command_names()) {
        if (command_help.size() > 8) command_help += "|";
        command_help += name;
    }
    app.add_option("command", command, command_help)->required();
    app.add_option("--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override the config seed");
    CLI::Option* out_opt = app.add_option("--out", out_dir, "override the output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        agelab::RunConfig cfg = agelab::load_run_config(config_path);
        if (*seed_opt) cfg.seed = seed;
        if (*out_opt) cfg.out = out_dir;
        agelab::run_command(command, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "agelab %s: %s\n", command.c_str(), e.what());
        return 1;
    }
    return 0;
}
