// SPDX-License-Identifier: Apache-2.0
//
// Artifact emission. All writers are deterministic: fixed number formats, no
// timestamps, and the config hash embedded in every file, so reruns with the
// same config are byte-identical.

#pragma once

#include <string>
#include <vector>

#include "shield/attention.hpp"
#include "shield/config.hpp"
#include "shield/workload.hpp"

namespace shield {

// Column order is part of the external contract; renderers key on it.
inline constexpr const char* kTraceCsvHeader =
    "step,b_kv,b_qo,p_base,p_kelle,p_shield,eta_eq9,eta_total,gain_kelle,gain_shield";

std::string trace_csv(const Trace& trace, const std::string& cfg_hash);

std::string trace_summary_json(const Trace& trace, const DerivedParameters& derived,
                               const std::string& cfg_hash);

std::string gain_table_csv(const std::vector<ScenarioGainRow>& rows,
                           const std::string& cfg_hash);

struct SweepRow {
    std::string param;
    double value = 0.0;
    double t_rel_us = 0.0;
    double kv_ratio = 0.0;
    double ber_target = 0.0;
    double interval_us = 0.0;  // comparator interval implied by ber_target
    double eta = 0.0;
    double gain_shield = 0.0;
    double gain_kelle = 0.0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& cfg_hash);

std::string calibration_json(const SimConfig& cfg, const DerivedParameters& derived,
                             const std::string& cfg_hash);

std::string inject_report_json(const SimConfig& cfg, const PerturbationStats& stats,
                               const std::string& cfg_hash);

void write_text_file(const std::string& path, const std::string& content);

// Re-derives the refresh reduction of every CSV row from its own byte columns
// and the intervals, and rejects the artifact if any row disagrees with its
// eta_eq9 column by more than 1e-9.
void audit_trace_csv(const std::string& csv_text, double t_std_us, double t_rel_us);

}  // namespace shield
