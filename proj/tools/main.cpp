// Experiment runner: `pplab run <config>` executes the tasks declared in a
// config file over every mesh level, `pplab compare <A> <B>` reports the
// ratio table between two manifests of the same config.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "pplab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for p-Poisson problems with measure data"};
    app.require_subcommand(1);

    int threads = 1;
    bool deterministic = false;
    app.add_option("--threads", threads, "parallel workers across mesh levels");
    app.add_flag("--deterministic", deterministic,
                 "single-threaded execution with ordered reductions");

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "config file")->required();

    std::string manifest_a, manifest_b;
    auto* compare = app.add_subcommand("compare", "ratio table between two run manifests");
    compare->add_option("manifestA", manifest_a, "first manifest")->required();
    compare->add_option("manifestB", manifest_b, "second manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const pplab::ExperimentConfig cfg = pplab::ExperimentConfig::load(config_path);
            pplab::RunOptions opts;
            opts.threads = threads;
            opts.deterministic = deterministic;
            return pplab::run_experiment(cfg, opts, std::cout);
        }
        const pplab::CompareReport rep = pplab::compare_manifests(manifest_a, manifest_b);
        std::printf("key,a,b,ratio,flag\n");
        for (const pplab::CompareRow& row : rep.rows)
            std::printf("%s,%.17g,%.17g,%.17g,%s\n", row.key.c_str(), row.a, row.b, row.ratio,
                        row.flagged ? "out-of-band" : "");
        return 0;
    } catch (const pplab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.label() == "config-parse" ? 2 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
