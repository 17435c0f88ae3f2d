// SPDX-License-Identifier: Apache-2.0
//
// Inference workload traces. A trace walks one request through prefill and
// decode, sizing the activation workspace at every token and evaluating the
// refresh policies on that workspace.

#pragma once

#include <string>
#include <vector>

#include "shield/energy.hpp"

namespace shield {

struct ModelConfig {
    std::string name;
    long long num_layers = 0;
    long long hidden_dim = 0;
    long long kv_dim = 0;  // combined K plus V width per token per layer is 2 * kv_dim
    long long bytes_per_element = 2;
};

void validate_model(const ModelConfig& m);

enum class ScenarioKind { Summary, Translation, Storytelling, Lifecycle, Custom };

struct Scenario {
    ScenarioKind kind = ScenarioKind::Custom;
    std::string name;
    long long prefill_tokens = 1;
    long long decode_tokens = 0;
};

void validate_scenario(const Scenario& s);

// The four built-in prefill/decode mixes.
std::vector<Scenario> default_scenarios();

// Query and output activations for a context of `context_len` tokens. These
// live only within the active layer, so the count is per layer by
// construction.
double qo_footprint_bytes(const ModelConfig& m, long long context_len);

// Key and value cache across every layer of the model.
double kv_footprint_bytes(const ModelConfig& m, long long context_len);

// Key and value slice the active layer reads while attending.
double kv_footprint_active_layer_bytes(const ModelConfig& m, long long context_len);

// ActiveLayer sizes the workspace as one layer's working set: the QO arena at
// its prefill high-water mark plus the active layer's KV slice. WholeModel
// charges the full KV cache of all layers against the same QO arena.
enum class WorkspaceMode { ActiveLayer, WholeModel };

struct TraceOptions {
    WorkspaceMode mode = WorkspaceMode::ActiveLayer;
    // When positive, the workspace occupies a fixed array of this many bytes:
    // refresh energy scales with occupancy and a step overflowing the array is
    // an error. Zero disables the check and the scaling.
    double fixed_capacity_bytes = 0.0;
};

struct TraceStep {
    long long step = 0;         // 0 is the prefill step, k >= 1 is decode token k
    long long context_len = 0;  // tokens visible to attention at this step
    long long dwell_tokens = 0; // token-times this workspace shape persists
    WorkspaceState workspace;
    EnergyReport report;
};

struct TraceAggregate {
    // Dwell-weighted mean powers over the trace; the gains are their ratios,
    // which equal the corresponding energy ratios.
    double p_base_w = 0.0;
    double p_shield_w = 0.0;
    double p_kelle_w = 0.0;
    double gain_shield = 0.0;
    double gain_kelle = 0.0;
    // Refresh energy saved, leakage excluded from both sides.
    double reduction_refresh_only = 0.0;
    // Total energy saved, leakage counted on both sides.
    double reduction_leakage_inclusive = 0.0;
    // Plain per-step mean of the closed-form refresh reduction, each lifecycle
    // stage counted once regardless of dwell.
    double reduction_lifecycle_weighted = 0.0;
    double kv_ratio_mean = 0.0;  // dwell-weighted
    long long total_dwell_tokens = 0;
};

struct Trace {
    ModelConfig model;
    Scenario scenario;
    PolicyConfig policies;
    ArrayConstants constants;
    TraceOptions options;
    std::vector<TraceStep> steps;
    TraceAggregate aggregate;
};

Trace run_trace(const ModelConfig& m, const Scenario& s, const ArrayConstants& constants,
                const PolicyConfig& policies, const TraceOptions& options = {});

struct ScenarioGainRow {
    std::string model;
    std::string scenario;
    long long prefill_tokens = 0;
    long long decode_tokens = 0;
    double gain_shield = 0.0;
    double gain_kelle = 0.0;
    double reduction_refresh_only = 0.0;
    double reduction_leakage_inclusive = 0.0;
};

std::vector<ScenarioGainRow> scenario_table(const ModelConfig& m,
                                            const std::vector<Scenario>& scenarios,
                                            const ArrayConstants& constants,
                                            const PolicyConfig& policies,
                                            const TraceOptions& options = {});

}  // namespace shield
