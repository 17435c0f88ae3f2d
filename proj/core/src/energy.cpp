// SPDX-License-Identifier: Apache-2.0

#include "shield/energy.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "shield/bf16.hpp"

namespace shield {

namespace {

constexpr double kMicro = 1e-6;

// Segment widths follow the storage masks: 9 sign/exponent bits and 7
// mantissa bits of each 16-bit word.
constexpr double kWordBits = 16.0;
constexpr double kSignExponentShare = std::popcount(kSignExponentMask) / kWordBits;
constexpr double kMantissaShare = std::popcount(kMantissaMask) / kWordBits;
static_assert(kSignExponentShare + kMantissaShare == 1.0);

void require(bool ok, const char* msg) {
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

void check_constants(const ArrayConstants& c) {
    require(std::isfinite(c.p_leak_w) && c.p_leak_w >= 0.0, "leakage power must be nonnegative");
    require(std::isfinite(c.e_ref_cycle_j) && c.e_ref_cycle_j >= 0.0,
            "refresh cycle energy must be nonnegative");
}

void check_interval(double t_us, const char* msg) {
    require(std::isfinite(t_us) && t_us > 0.0, msg);
}

double refresh_power(double e_ref_cycle_j, double interval_us) {
    return e_ref_cycle_j / (interval_us * kMicro);
}

double kv_ratio_of(const WorkspaceState& w) {
    require(w.b_total > 0.0, "workspace must be nonempty");
    require(w.b_kv >= 0.0 && w.b_qo >= 0.0, "workspace byte counts must be nonnegative");
    return w.b_kv / w.b_total;
}

void check_ratio(double kv_ratio) {
    require(kv_ratio >= 0.0 && kv_ratio <= 1.0, "kv_ratio must lie in [0, 1]");
}

}  // namespace

BankPolicy standard_refresh(double interval_us) {
    check_interval(interval_us, "standard refresh interval must be positive");
    return {RefreshRegime::Standard, interval_us};
}

BankPolicy relaxed_refresh(double interval_us) {
    check_interval(interval_us, "relaxed refresh interval must be positive");
    return {RefreshRegime::Relaxed, interval_us};
}

BankPolicy refresh_less() { return {RefreshRegime::RefreshLess, 0.0}; }

PolicyConfig make_policies(double t_std_us, double t_rel_us, double t_kelle_us) {
    PolicyConfig p{standard_refresh(t_std_us), relaxed_refresh(t_rel_us), refresh_less(),
                   t_kelle_us};
    validate_policies(p);
    return p;
}

void validate_policies(const PolicyConfig& policies) {
    require(policies.sign_exponent.regime == RefreshRegime::Standard,
            "sign/exponent bank must use the standard regime");
    require(policies.kv_mantissa.regime == RefreshRegime::Relaxed,
            "KV mantissa bank must use the relaxed regime");
    require(policies.qo_mantissa.regime == RefreshRegime::RefreshLess,
            "QO mantissa bank must be refresh-less");
    check_interval(policies.t_std_us(), "standard refresh interval must be positive");
    check_interval(policies.t_rel_us(), "relaxed refresh interval must be positive");
    check_interval(policies.t_kelle_us, "comparator refresh interval must be positive");
}

WorkspaceState make_workspace(double b_kv_bytes, double b_qo_bytes) {
    require(std::isfinite(b_kv_bytes) && b_kv_bytes >= 0.0, "b_kv must be nonnegative");
    require(std::isfinite(b_qo_bytes) && b_qo_bytes >= 0.0, "b_qo must be nonnegative");
    return {b_kv_bytes, b_qo_bytes, b_kv_bytes + b_qo_bytes};
}

double baseline_power(const ArrayConstants& c, double t_std_us) {
    check_constants(c);
    check_interval(t_std_us, "standard refresh interval must be positive");
    return c.p_leak_w + refresh_power(c.e_ref_cycle_j, t_std_us);
}

double shield_power(const ArrayConstants& c, const WorkspaceState& w, double t_std_us,
                    double t_rel_us) {
    check_constants(c);
    check_interval(t_std_us, "standard refresh interval must be positive");
    check_interval(t_rel_us, "relaxed refresh interval must be positive");
    const double kv_ratio = kv_ratio_of(w);
    return c.p_leak_w + kSignExponentShare * refresh_power(c.e_ref_cycle_j, t_std_us) +
           kMantissaShare * kv_ratio * refresh_power(c.e_ref_cycle_j, t_rel_us);
}

double kelle_power(const ArrayConstants& c, const WorkspaceState& w, double t_std_us,
                   double t_kelle_us) {
    check_constants(c);
    check_interval(t_std_us, "standard refresh interval must be positive");
    check_interval(t_kelle_us, "comparator refresh interval must be positive");
    const double kv_ratio = kv_ratio_of(w);
    return c.p_leak_w + (1.0 - kv_ratio) * refresh_power(c.e_ref_cycle_j, t_std_us) +
           kv_ratio * refresh_power(c.e_ref_cycle_j, t_kelle_us);
}

double eta_from_kv_ratio(double kv_ratio, double t_std_us, double t_rel_us) {
    check_ratio(kv_ratio);
    check_interval(t_std_us, "standard refresh interval must be positive");
    check_interval(t_rel_us, "relaxed refresh interval must be positive");
    return 1.0 - (kSignExponentShare + kMantissaShare * kv_ratio * (t_std_us / t_rel_us));
}

double eta(const WorkspaceState& w, double t_std_us, double t_rel_us) {
    return eta_from_kv_ratio(kv_ratio_of(w), t_std_us, t_rel_us);
}

double gain(double p_base_w, double p_policy_w) {
    require(std::isfinite(p_base_w) && p_base_w > 0.0, "baseline power must be positive");
    require(std::isfinite(p_policy_w) && p_policy_w > 0.0, "policy power must be positive");
    return p_base_w / p_policy_w;
}

double calibrate_refresh_energy(double target_gain, double p_leak_w, double t_std_us,
                                double t_rel_us, double kv_ratio) {
    require(std::isfinite(target_gain) && target_gain > 1.0, "target gain must exceed 1");
    require(std::isfinite(p_leak_w) && p_leak_w >= 0.0, "leakage power must be nonnegative");
    check_interval(t_std_us, "standard refresh interval must be positive");
    check_interval(t_rel_us, "relaxed refresh interval must be positive");
    check_ratio(kv_ratio);
    const double kept =
        kSignExponentShare + kMantissaShare * kv_ratio * (t_std_us / t_rel_us);
    const double cap = 1.0 / kept;
    if (!(target_gain < cap)) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "target gain %.6f is unreachable: refresh relaxation alone caps the "
                      "gain at %.6f for this operating point",
                      target_gain, cap);
        throw std::invalid_argument(msg);
    }
    const double refresh_w = p_leak_w * (target_gain - 1.0) / (1.0 - target_gain * kept);
    return refresh_w * t_std_us * kMicro;
}

ArrayConstants destiny_constants(double workspace_bytes, Technology technology,
                                 double e_ref_cycle_j) {
    constexpr double kPublishedWorkspaceBytes = 2.0 * 1024.0 * 1024.0;
    require(workspace_bytes == kPublishedWorkspaceBytes,
            "reference constants exist only for the 2 MiB workspace; supply "
            "ArrayConstants explicitly for other sizes");
    require(std::isfinite(e_ref_cycle_j) && e_ref_cycle_j >= 0.0,
            "refresh cycle energy must be nonnegative");
    switch (technology) {
        case Technology::Sram:
            return {0.45225, 0.0, kPublishedWorkspaceBytes};
        case Technology::Edram:
            return {0.95e-3, e_ref_cycle_j, kPublishedWorkspaceBytes};
    }
    throw std::invalid_argument("unknown technology");
}

EnergyReport evaluate_step(const ArrayConstants& c, const WorkspaceState& w,
                           const PolicyConfig& policies) {
    validate_policies(policies);
    EnergyReport r;
    r.p_base_w = baseline_power(c, policies.t_std_us());
    r.p_shield_w = shield_power(c, w, policies.t_std_us(), policies.t_rel_us());
    r.p_kelle_w = kelle_power(c, w, policies.t_std_us(), policies.t_kelle_us);
    r.eta_refresh_only = eta(w, policies.t_std_us(), policies.t_rel_us());
    r.eta_total = 1.0 - r.p_shield_w / r.p_base_w;
    r.gain_shield = gain(r.p_base_w, r.p_shield_w);
    r.gain_kelle = gain(r.p_base_w, r.p_kelle_w);
    return r;
}

}  // namespace shield
