#pragma once

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "ptgrad/experiment.hpp"

namespace ptgrad {

/// Entry point shared by the ptgrad binary and the test suite.
inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Adaptive parallel tempering with policy-gradient temperature selection"};
    app.require_subcommand(1);

    std::string config_path;
    CommandOverrides ov;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::string out;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out, "output directory (overrides config)");
        sub->add_option("--seed", seed, "base seed (overrides config)");
        sub->add_option("--trials", trials, "trial count (overrides config)");
        sub->add_option("--threads", threads, "sweep threads (overrides config)");
    };

    CLI::App* run = app.add_subcommand("run", "adaptive policy-gradient run");
    CLI::App* baseline = app.add_subcommand("baseline", "geometric or Vousden baseline run");
    CLI::App* correlate = app.add_subcommand("correlate", "swap mean-distance vs ACT study");
    add_common(run);
    add_common(baseline);
    add_common(correlate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    auto fill = [&](CLI::App* sub) {
        if (sub->count("--out")) ov.out = out;
        if (sub->count("--seed")) ov.seed = seed;
        if (sub->count("--trials")) ov.trials = trials;
        if (sub->count("--threads")) ov.threads = threads;
    };

    if (run->parsed()) {
        fill(run);
        return cmd_run(config_path, ov);
    }
    if (baseline->parsed()) {
        fill(baseline);
        return cmd_baseline(config_path, ov);
    }
    fill(correlate);
    return cmd_correlate(config_path, ov);
}

}  // namespace ptgrad
