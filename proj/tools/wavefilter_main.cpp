// Experiment runner: one config file describes one run. See configs/ for
// ready-made reproductions of the paper-style experiments.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wavefilter/config.hpp"
#include "wavefilter/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"wavefilter: spectral Kalman filtering/smoothing experiments on the torus"};

    std::string config_path;
    wavefilter::experiments::RunOptions opt;
    app.add_option("--config", config_path, "path to the run configuration")->required();
    app.add_option("--out", opt.out_dir, "output directory (default: out)");
    app.add_flag("--check", opt.check, "enforce the config's check.* thresholds");
    app.add_option("--seeds", opt.seeds_override, "override run.seeds realization count");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = wavefilter::Config::from_file(config_path);
        return wavefilter::experiments::run(cfg, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
