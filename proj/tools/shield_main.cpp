// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "shield/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"segmented eDRAM refresh policy simulator"};
    app.require_subcommand(1);

    shield::CommandOptions opts;
    shield::SweepOptions sweep;

    app.add_option("--config", opts.config_path,
                   "JSON config file; built-in defaults apply when omitted");
    CLI::Option* seed_opt = app.add_option("--seed", opts.seed, "override the RNG seed");
    app.add_option("--out", opts.out_dir, "override the output directory");

    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "fit the retention curve and derive intervals and refresh energy");
    CLI::App* simulate =
        app.add_subcommand("simulate", "run workload traces and emit CSV/JSON artifacts");
    simulate->add_option("--scenario", opts.scenario, "scenario name or \"all\"");
    simulate->add_option("--model", opts.model,
                         "model name or \"all\"; defaults to the config's default_model");
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "sweep one parameter and emit a CSV of the response");
    sweep_cmd->add_option("--param", sweep.param, "t_rel | kv_ratio | ber_target")->required();
    sweep_cmd->add_option("--from", sweep.from, "range start")->required();
    sweep_cmd->add_option("--to", sweep.to, "range end")->required();
    sweep_cmd->add_option("--steps", sweep.steps, "row count, at least 2")->required();
    CLI::App* inject =
        app.add_subcommand("inject-demo", "run the attention block with stored-bit faults");

    for (CLI::App* sub : {calibrate, simulate, sweep_cmd, inject}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opts.seed_set = seed_opt->count() > 0;

    try {
        if (calibrate->parsed()) {
            shield::cmd_calibrate(opts);
        }
        if (simulate->parsed()) {
            shield::cmd_simulate(opts);
        }
        if (sweep_cmd->parsed()) {
            shield::cmd_sweep(opts, sweep);
        }
        if (inject->parsed()) {
            shield::cmd_inject_demo(opts);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 1;
    }
    return 0;
}
