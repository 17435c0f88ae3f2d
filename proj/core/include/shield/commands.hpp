// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the CLI front end. Each command loads the
// config, applies command-line overrides, runs, and writes artifacts under
// the output directory. Errors surface as exceptions: std::invalid_argument
// for bad configs or selections, std::runtime_error for failures past
// validation.

#pragma once

#include <cstdint>
#include <string>

#include "shield/config.hpp"

namespace shield {

struct CommandOptions {
    std::string config_path;  // empty lets the defaults stand
    std::string model;        // empty means the config's default model; "all" fans out
    std::string scenario = "all";
    std::string out_dir;      // empty keeps the config's out_dir
    bool seed_set = false;
    uint64_t seed = 0;
};

struct SweepOptions {
    std::string param;  // one of t_rel, kv_ratio, ber_target
    double from = 0.0;
    double to = 0.0;
    long long steps = 0;
};

SimConfig resolve_config(const CommandOptions& opts);

void cmd_calibrate(const CommandOptions& opts);
void cmd_simulate(const CommandOptions& opts);
void cmd_sweep(const CommandOptions& opts, const SweepOptions& sweep);
void cmd_inject_demo(const CommandOptions& opts);

}  // namespace shield
