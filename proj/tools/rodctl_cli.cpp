#include <iostream>

#include <CLI11.hpp>

#include "rodctl/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Minimum-energy control of a segmented elastic rod"};
    app.require_subcommand(1);

    std::string config, out, artifacts;
    auto* solve = app.add_subcommand("solve", "solve one horizon and write field, controls and summary");
    solve->add_option("--config", config, "run configuration (JSON)")->required();
    solve->add_option("--out", out, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "tabulate F = T E over a list of horizons");
    sweep->add_option("--config", config, "run configuration (JSON)")->required();
    sweep->add_option("--out", out, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "recheck persisted solve artifacts");
    verify->add_option("--config", config, "run configuration (JSON)")->required();
    verify->add_option("--artifacts", artifacts, "directory written by solve")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : rodctl::exit_invalid;
    }

    rodctl::RunConfig cfg;
    try {
        cfg = rodctl::load_config(config);
    } catch (const rodctl::Error& e) {
        std::cerr << "error (" << rodctl::to_string(e.kind()) << "): " << e.what() << "\n";
        return rodctl::exit_code(e.kind());
    }
    if (*solve) return rodctl::run_solve(cfg, out, std::cerr);
    if (*sweep) return rodctl::run_sweep(cfg, out, std::cerr);
    return rodctl::run_verify(cfg, artifacts, std::cerr);
}
