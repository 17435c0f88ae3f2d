// SPDX-License-Identifier: Apache-2.0

#include "shield/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <future>
#include <stdexcept>
#include <vector>

#include "shield/attention.hpp"
#include "shield/report.hpp"

namespace shield {

namespace {

namespace fs = std::filesystem;

fs::path prepare_out_dir(const SimConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory: " + cfg.out_dir);
    }
    return dir;
}

std::vector<const ModelConfig*> select_models(const SimConfig& cfg, const std::string& sel) {
    std::vector<const ModelConfig*> models;
    if (sel == "all") {
        for (const ModelConfig& m : cfg.models) {
            models.push_back(&m);
        }
    } else {
        models.push_back(&find_model(cfg, sel.empty() ? cfg.default_model : sel));
    }
    return models;
}

std::vector<const Scenario*> select_scenarios(const SimConfig& cfg, const std::string& sel) {
    std::vector<const Scenario*> scenarios;
    if (sel.empty() || sel == "all") {
        for (const Scenario& s : cfg.scenarios) {
            scenarios.push_back(&s);
        }
    } else {
        scenarios.push_back(&find_scenario(cfg, sel));
    }
    return scenarios;
}

struct PairArtifacts {
    std::string base_name;
    std::string csv;
    std::string summary;
    ScenarioGainRow row;
};

PairArtifacts run_pair(const ModelConfig& model, const Scenario& scenario,
                       const DerivedParameters& derived, const std::string& cfg_hash) {
    const Trace trace =
        run_trace(model, scenario, derived.constants, derived.policies, derived.trace_options);
    PairArtifacts art;
    art.base_name = model.name + "_" + scenario.name;
    art.csv = trace_csv(trace, cfg_hash);
    art.summary = trace_summary_json(trace, derived, cfg_hash);
    art.row = {model.name,
               scenario.name,
               scenario.prefill_tokens,
               scenario.decode_tokens,
               trace.aggregate.gain_shield,
               trace.aggregate.gain_kelle,
               trace.aggregate.reduction_refresh_only,
               trace.aggregate.reduction_leakage_inclusive};
    return art;
}

}  // namespace

SimConfig resolve_config(const CommandOptions& opts) {
    SimConfig cfg = load_config(opts.config_path);
    if (opts.seed_set) {
        cfg.seed = opts.seed;
    }
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    }
    validate_config(cfg);
    return cfg;
}

void cmd_calibrate(const CommandOptions& opts) {
    const SimConfig cfg = resolve_config(opts);
    const DerivedParameters derived = derive_parameters(cfg);
    const std::string hash = config_hash(cfg);

    const fs::path dir = prepare_out_dir(cfg);
    write_text_file((dir / "calibration.json").string(), calibration_json(cfg, derived, hash));

    std::printf("retention fit: mu_log_us=%.9f sigma_log=%.9f\n", derived.curve.mu_log_us,
                derived.curve.sigma_log);
    std::printf("ber(t_std=%.1f us) = %.6e\n", cfg.intervals.t_std_us,
                ber_at(derived.curve, cfg.intervals.t_std_us));
    std::printf("t_kelle(ber=%.1e) = %.6f us\n", cfg.intervals.kelle_ber_target,
                derived.t_kelle_us);
    std::printf("e_ref_cycle = %.6e J (%s)\n", derived.e_ref_cycle_j,
                derived.e_ref_calibrated ? "calibrated-from-target-gain" : "configured");
    std::printf("wrote %s\n", (dir / "calibration.json").string().c_str());
}

void cmd_simulate(const CommandOptions& opts) {
    const SimConfig cfg = resolve_config(opts);
    const DerivedParameters derived = derive_parameters(cfg);
    const std::string hash = config_hash(cfg);

    // Selections resolve, and throw, before anything touches the filesystem.
    const std::vector<const ModelConfig*> models = select_models(cfg, opts.model);
    const std::vector<const Scenario*> scenarios = select_scenarios(cfg, opts.scenario);

    std::vector<std::future<PairArtifacts>> tasks;
    tasks.reserve(models.size() * scenarios.size());
    for (const ModelConfig* m : models) {
        for (const Scenario* s : scenarios) {
            tasks.push_back(std::async(std::launch::async, run_pair, std::cref(*m),
                                       std::cref(*s), std::cref(derived), std::cref(hash)));
        }
    }

    const fs::path dir = prepare_out_dir(cfg);
    std::vector<ScenarioGainRow> rows;
    rows.reserve(tasks.size());
    for (std::future<PairArtifacts>& task : tasks) {
        const PairArtifacts art = task.get();
        audit_trace_csv(art.csv, cfg.intervals.t_std_us, cfg.intervals.t_rel_us);
        write_text_file((dir / (art.base_name + ".csv")).string(), art.csv);
        write_text_file((dir / (art.base_name + "_summary.json")).string(), art.summary);
        rows.push_back(art.row);
        std::printf("%s: gain_shield=%.6f gain_kelle=%.6f (audited)\n", art.base_name.c_str(),
                    art.row.gain_shield, art.row.gain_kelle);
    }
    write_text_file((dir / "gain_table.csv").string(), gain_table_csv(rows, hash));
    std::printf("wrote %zu trace(s) and %s\n", rows.size(),
                (dir / "gain_table.csv").string().c_str());
}

void cmd_sweep(const CommandOptions& opts, const SweepOptions& sweep) {
    const SimConfig cfg = resolve_config(opts);
    const DerivedParameters derived = derive_parameters(cfg);
    const std::string hash = config_hash(cfg);

    if (sweep.param != "t_rel" && sweep.param != "kv_ratio" && sweep.param != "ber_target") {
        throw std::invalid_argument("sweep parameter must be t_rel, kv_ratio, or ber_target");
    }
    if (!(sweep.from < sweep.to)) {
        throw std::invalid_argument("sweep range must satisfy from < to");
    }
    if (sweep.steps < 2) {
        throw std::invalid_argument("sweep needs at least 2 steps");
    }
    if (sweep.param == "t_rel" && sweep.from <= 0.0) {
        throw std::invalid_argument("t_rel sweep must stay positive");
    }
    if (sweep.param == "kv_ratio" && (sweep.from < 0.0 || sweep.to > 1.0)) {
        throw std::invalid_argument("kv_ratio sweep must stay in [0, 1]");
    }
    if (sweep.param == "ber_target" && (sweep.from <= 0.0 || sweep.to >= 1.0)) {
        throw std::invalid_argument("ber_target sweep must stay in (0, 1)");
    }

    const double t_std = cfg.intervals.t_std_us;
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<size_t>(sweep.steps));
    for (long long i = 0; i < sweep.steps; ++i) {
        const double value = sweep.from + (sweep.to - sweep.from) *
                                              static_cast<double>(i) /
                                              static_cast<double>(sweep.steps - 1);
        SweepRow row;
        row.param = sweep.param;
        row.value = value;
        row.t_rel_us = cfg.intervals.t_rel_us;
        row.kv_ratio = cfg.sweep.kv_ratio;
        row.ber_target = cfg.intervals.kelle_ber_target;
        row.interval_us = derived.t_kelle_us;
        double t_kelle = derived.t_kelle_us;
        if (sweep.param == "t_rel") {
            row.t_rel_us = value;
        } else if (sweep.param == "kv_ratio") {
            row.kv_ratio = value;
        } else {
            row.ber_target = value;
            row.interval_us = interval_for_ber(derived.curve, value);
            t_kelle = row.interval_us;
        }
        const WorkspaceState w = make_workspace(row.kv_ratio, 1.0 - row.kv_ratio);
        row.eta = eta_from_kv_ratio(row.kv_ratio, t_std, row.t_rel_us);
        const double p_base = baseline_power(derived.constants, t_std);
        row.gain_shield =
            gain(p_base, shield_power(derived.constants, w, t_std, row.t_rel_us));
        row.gain_kelle = gain(p_base, kelle_power(derived.constants, w, t_std, t_kelle));
        rows.push_back(row);
    }

    const fs::path dir = prepare_out_dir(cfg);
    const fs::path file = dir / ("sweep_" + sweep.param + ".csv");
    write_text_file(file.string(), sweep_csv(rows, hash));
    std::printf("wrote %s (%lld rows)\n", file.string().c_str(), sweep.steps);
}

void cmd_inject_demo(const CommandOptions& opts) {
    const SimConfig cfg = resolve_config(opts);
    const DerivedParameters derived = derive_parameters(cfg);
    const std::string hash = config_hash(cfg);

    const AttentionDims dims{cfg.demo.seq_len, cfg.demo.model_dim, cfg.demo.num_heads};
    const AttentionWeights weights = random_weights(dims, cfg.seed);
    const std::vector<Bf16Word> input = random_input(dims, cfg.seed);
    const FaultRunResult result = run_with_faults(dims, weights, input, derived.fault);
    const PerturbationStats& st = result.stats;

    const fs::path dir = prepare_out_dir(cfg);
    write_text_file((dir / "inject_demo.json").string(),
                    inject_report_json(cfg, st, hash));

    char text[1024];
    std::snprintf(text, sizeof(text),
                  "fault injection demo (seq=%lld, d=%lld, heads=%lld)\n"
                  "rho_kv=%.3e rho_qo=%.3e mask=%s seed=%llu\n"
                  "changed words: Q %lld/%lld, K %lld/%lld, V %lld/%lld, O %lld/%lld\n"
                  "sign/exponent preserved: %s\n"
                  "magnitude ratio within (0.5x, 2x) on normal values: %s\n"
                  "max softmax row L1 error: %.6e\n"
                  "max elementwise relative error: %.6e\n"
                  "output cosine similarity: %.9f\n",
                  cfg.demo.seq_len, cfg.demo.model_dim, cfg.demo.num_heads, cfg.fault.rho_kv,
                  cfg.fault.rho_qo, cfg.fault.mask.c_str(),
                  static_cast<unsigned long long>(cfg.seed), st.q_changed, st.q_words,
                  st.k_changed, st.k_words, st.v_changed, st.v_words, st.o_changed, st.o_words,
                  st.sign_exponent_preserved ? "yes" : "no",
                  st.magnitude_ratio_bounded ? "yes" : "no", st.max_softmax_row_error,
                  st.max_rel_error, st.cosine_similarity);
    write_text_file((dir / "inject_demo.txt").string(), text);
    std::fputs(text, stdout);
}

}  // namespace shield
