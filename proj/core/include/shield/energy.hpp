// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace shield {

/// Electrical constants of one memory array.
struct ArrayConstants {
    double p_leak_w = 0.0;        // static leakage of the whole array, watts
    double e_ref_cycle_j = 0.0;   // energy of one full-array refresh cycle, joules
    double capacity_bytes = 0.0;  // array capacity
};

enum class RefreshRegime { Standard, Relaxed, RefreshLess };

/// Refresh policy of one bank segment.
struct BankPolicy {
    RefreshRegime regime = RefreshRegime::Standard;
    double interval_us = 0.0;  // refresh period; unused for RefreshLess
};

BankPolicy standard_refresh(double interval_us);
BankPolicy relaxed_refresh(double interval_us);
BankPolicy refresh_less();

/// Per-segment refresh policies of the segmented design plus the interval the
/// whole-word-relaxation comparator uses for KV words.
struct PolicyConfig {
    BankPolicy sign_exponent{RefreshRegime::Standard, 45.0};
    BankPolicy kv_mantissa{RefreshRegime::Relaxed, 1216.0};
    BankPolicy qo_mantissa{RefreshRegime::RefreshLess, 0.0};
    double t_kelle_us = 0.0;

    double t_std_us() const { return sign_exponent.interval_us; }
    double t_rel_us() const { return kv_mantissa.interval_us; }
};

PolicyConfig make_policies(double t_std_us, double t_rel_us, double t_kelle_us);
void validate_policies(const PolicyConfig& policies);

/// Occupied workspace snapshot. b_total is always b_kv + b_qo.
struct WorkspaceState {
    double b_kv = 0.0;
    double b_qo = 0.0;
    double b_total = 0.0;
};

WorkspaceState make_workspace(double b_kv_bytes, double b_qo_bytes);

/// Powers and derived figures of merit for one workspace state.
struct EnergyReport {
    double p_base_w = 0.0;
    double p_shield_w = 0.0;
    double p_kelle_w = 0.0;
    double eta_refresh_only = 0.0;  // closed-form refresh power reduction
    double eta_total = 0.0;         // total power reduction including leakage
    double gain_shield = 0.0;
    double gain_kelle = 0.0;
};

/// Baseline: leakage plus a full-array refresh every t_std_us.
double baseline_power(const ArrayConstants& c, double t_std_us);

/// Segmented design: sign and exponent bits (9 of 16) refresh at t_std_us,
/// KV mantissa bits (7 of 16, weighted by the KV share of the workspace)
/// refresh at t_rel_us, QO mantissa bits are never refreshed.
double shield_power(const ArrayConstants& c, const WorkspaceState& w, double t_std_us,
                    double t_rel_us);

/// Whole-word comparator: all 16 bits of QO words refresh at t_std_us and all
/// 16 bits of KV words at t_kelle_us.
double kelle_power(const ArrayConstants& c, const WorkspaceState& w, double t_std_us,
                   double t_kelle_us);

/// Closed-form refresh power reduction of the segmented design:
/// 1 - (9/16 + (7/16) * kv_ratio * t_std/t_rel). Leakage-free by definition.
double eta_from_kv_ratio(double kv_ratio, double t_std_us, double t_rel_us);
double eta(const WorkspaceState& w, double t_std_us, double t_rel_us);

/// p_base / p_policy; both inputs must be positive.
double gain(double p_base_w, double p_policy_w);

/// Solves for the full-array refresh cycle energy that makes the segmented
/// design's gain over baseline equal target_gain at the given operating
/// point. Targets at or above the refresh-relaxation cap are rejected with a
/// diagnostic naming the cap.
double calibrate_refresh_energy(double target_gain, double p_leak_w, double t_std_us,
                                double t_rel_us, double kv_ratio);

enum class Technology { Sram, Edram };

/// Shipped reference constants. Only the 2 MiB workspace point is published;
/// other sizes must supply ArrayConstants explicitly. SRAM does not refresh,
/// so its cycle energy is zero; for eDRAM the caller passes the refresh cycle
/// energy obtained from calibration or configuration.
ArrayConstants destiny_constants(double workspace_bytes, Technology technology,
                                 double e_ref_cycle_j = 0.0);

/// All three policies plus reductions and gains for one workspace state.
EnergyReport evaluate_step(const ArrayConstants& c, const WorkspaceState& w,
                           const PolicyConfig& policies);

}  // namespace shield
