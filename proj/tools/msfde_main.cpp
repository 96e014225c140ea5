#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "msfde/errors.hpp"
#include "msfde/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"msfde: mean-square stability analysis for scalar linear "
                 "stochastic delay equations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_out = "out";
    CLI::App* run_cmd =
        app.add_subcommand("run", "run the analyses requested by a config");
    run_cmd->add_option("--config", config_path, "path to the config file")
        ->required();
    run_cmd->add_option("--out", run_out, "output directory");

    std::string demo_name;
    std::string demo_out = "out";
    CLI::App* demo_cmd =
        app.add_subcommand("demo", "write and run a built-in example config");
    demo_cmd->add_option("name", demo_name, "demo name")->required();
    demo_cmd->add_option("--out", demo_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed())
            msfde::run(config_path, run_out);
        else
            msfde::demo(demo_name, demo_out);
    } catch (const msfde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
