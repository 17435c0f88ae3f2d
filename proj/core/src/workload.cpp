// SPDX-License-Identifier: Apache-2.0

#include "shield/workload.hpp"

#include <cmath>
#include <stdexcept>

namespace shield {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

void check_context(long long context_len) {
    require(context_len >= 1, "context length must be at least one token");
}

WorkspaceState workspace_at(const ModelConfig& m, const Scenario& s, long long context_len,
                            WorkspaceMode mode) {
    // The QO arena is sized once, at the prefill high-water mark, and reused
    // for every decode token; only the KV side keeps growing.
    const double b_qo = qo_footprint_bytes(m, s.prefill_tokens);
    const double b_kv = mode == WorkspaceMode::ActiveLayer
                            ? kv_footprint_active_layer_bytes(m, context_len)
                            : kv_footprint_bytes(m, context_len);
    return make_workspace(b_kv, b_qo);
}

}  // namespace

void validate_model(const ModelConfig& m) {
    require(!m.name.empty(), "model name must be nonempty");
    require(m.num_layers >= 1, "model must have at least one layer");
    require(m.hidden_dim >= 1, "hidden dimension must be positive");
    require(m.kv_dim >= 1, "kv dimension must be positive");
    require(m.bytes_per_element >= 1, "bytes per element must be positive");
}

void validate_scenario(const Scenario& s) {
    require(!s.name.empty(), "scenario name must be nonempty");
    require(s.prefill_tokens >= 1, "prefill must contain at least one token");
    require(s.decode_tokens >= 0, "decode token count must be nonnegative");
}

std::vector<Scenario> default_scenarios() {
    return {
        {ScenarioKind::Summary, "summary", 1024, 64},
        {ScenarioKind::Translation, "translation", 512, 512},
        {ScenarioKind::Storytelling, "storytelling", 128, 512},
        {ScenarioKind::Lifecycle, "lifecycle", 128, 256},
    };
}

double qo_footprint_bytes(const ModelConfig& m, long long context_len) {
    validate_model(m);
    check_context(context_len);
    return 2.0 * static_cast<double>(context_len) * static_cast<double>(m.hidden_dim) *
           static_cast<double>(m.bytes_per_element);
}

double kv_footprint_bytes(const ModelConfig& m, long long context_len) {
    return kv_footprint_active_layer_bytes(m, context_len) *
           static_cast<double>(m.num_layers);
}

double kv_footprint_active_layer_bytes(const ModelConfig& m, long long context_len) {
    validate_model(m);
    check_context(context_len);
    return 2.0 * static_cast<double>(context_len) * static_cast<double>(m.kv_dim) *
           static_cast<double>(m.bytes_per_element);
}

Trace run_trace(const ModelConfig& m, const Scenario& s, const ArrayConstants& constants,
                const PolicyConfig& policies, const TraceOptions& options) {
    validate_model(m);
    validate_scenario(s);
    validate_policies(policies);
    require(std::isfinite(options.fixed_capacity_bytes) && options.fixed_capacity_bytes >= 0.0,
            "fixed capacity must be nonnegative");

    Trace trace{m, s, policies, constants, options, {}, {}};
    trace.steps.reserve(static_cast<size_t>(s.decode_tokens) + 1);

    double sum_dwell = 0.0;
    double sum_base = 0.0;
    double sum_shield = 0.0;
    double sum_kelle = 0.0;
    double sum_kv_ratio = 0.0;
    double sum_eta = 0.0;
    double sum_eta_unweighted = 0.0;

    for (long long k = 0; k <= s.decode_tokens; ++k) {
        const long long context_len = s.prefill_tokens + k;
        const long long dwell = k == 0 ? s.prefill_tokens : 1;
        const WorkspaceState w = workspace_at(m, s, context_len, options.mode);

        ArrayConstants step_constants = constants;
        if (options.fixed_capacity_bytes > 0.0) {
            if (w.b_total > options.fixed_capacity_bytes) {
                throw std::invalid_argument(
                    "workspace exceeds the configured array capacity");
            }
            // Only the occupied rows get refreshed; the whole array leaks.
            step_constants.e_ref_cycle_j *= w.b_total / options.fixed_capacity_bytes;
        }

        const EnergyReport report = evaluate_step(step_constants, w, policies);
        trace.steps.push_back({k, context_len, dwell, w, report});

        const double wd = static_cast<double>(dwell);
        sum_dwell += wd;
        sum_base += wd * report.p_base_w;
        sum_shield += wd * report.p_shield_w;
        sum_kelle += wd * report.p_kelle_w;
        sum_kv_ratio += wd * (w.b_kv / w.b_total);
        sum_eta += wd * report.eta_refresh_only;
        sum_eta_unweighted += report.eta_refresh_only;
    }

    TraceAggregate agg;
    agg.p_base_w = sum_base / sum_dwell;
    agg.p_shield_w = sum_shield / sum_dwell;
    agg.p_kelle_w = sum_kelle / sum_dwell;
    agg.gain_shield = gain(agg.p_base_w, agg.p_shield_w);
    agg.gain_kelle = gain(agg.p_base_w, agg.p_kelle_w);
    const double base_refresh = sum_base - sum_dwell * constants.p_leak_w;
    const double shield_refresh = sum_shield - sum_dwell * constants.p_leak_w;
    agg.reduction_refresh_only =
        base_refresh > 0.0 ? 1.0 - shield_refresh / base_refresh : sum_eta / sum_dwell;
    agg.reduction_leakage_inclusive = 1.0 - sum_shield / sum_base;
    agg.reduction_lifecycle_weighted =
        sum_eta_unweighted / static_cast<double>(trace.steps.size());
    agg.kv_ratio_mean = sum_kv_ratio / sum_dwell;
    agg.total_dwell_tokens = s.prefill_tokens + s.decode_tokens;
    trace.aggregate = agg;
    return trace;
}

std::vector<ScenarioGainRow> scenario_table(const ModelConfig& m,
                                            const std::vector<Scenario>& scenarios,
                                            const ArrayConstants& constants,
                                            const PolicyConfig& policies,
                                            const TraceOptions& options) {
    std::vector<ScenarioGainRow> rows;
    rows.reserve(scenarios.size());
    for (const Scenario& s : scenarios) {
        const Trace trace = run_trace(m, s, constants, policies, options);
        rows.push_back({m.name, s.name, s.prefill_tokens, s.decode_tokens,
                        trace.aggregate.gain_shield, trace.aggregate.gain_kelle,
                        trace.aggregate.reduction_refresh_only,
                        trace.aggregate.reduction_leakage_inclusive});
    }
    return rows;
}

}  // namespace shield
