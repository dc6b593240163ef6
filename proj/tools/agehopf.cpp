#include <CLI11.hpp>
#include <iostream>

#include "agehopf/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hopf bifurcation toolkit for the Gurtin-MacCamy age-structured model"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    int threads = 0;

    for (const char* name : {"certify", "simulate", "branch", "diagram", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the scenario)");
        sub->add_option("--threads", threads, "worker thread count (or AGEHOPF_THREADS)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const agehopf::Scenario scenario = agehopf::load_scenario(scenario_path);
        agehopf::RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        return agehopf::run(app.get_subcommands().front()->get_name(), scenario, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
