// SPDX-License-Identifier: Apache-2.0

#include "shield/config.hpp"

#include "shield/attention.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace shield {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& msg) {
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

void reject_unknown_keys(const json& node, std::initializer_list<const char*> known,
                         const char* where) {
    for (const auto& item : node.items()) {
        bool found = false;
        for (const char* k : known) {
            if (item.key() == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument(std::string("unknown config key \"") + item.key() +
                                        "\" in " + where);
        }
    }
}

template <typename T>
void overlay(const json& node, const char* key, T& field) {
    if (node.contains(key)) {
        field = node.at(key).get<T>();
    }
}

void overlay_intervals(const json& node, IntervalConfig& c) {
    reject_unknown_keys(node, {"t_std_us", "t_rel_us", "kelle_ber_target"}, "intervals");
    overlay(node, "t_std_us", c.t_std_us);
    overlay(node, "t_rel_us", c.t_rel_us);
    overlay(node, "kelle_ber_target", c.kelle_ber_target);
}

void overlay_calibration(const json& node, CalibrationConfig& c) {
    reject_unknown_keys(node, {"target_gain", "kv_ratio"}, "calibration");
    overlay(node, "target_gain", c.target_gain);
    overlay(node, "kv_ratio", c.kv_ratio);
}

void overlay_array(const json& node, ArrayConfig& c) {
    reject_unknown_keys(node, {"workspace_bytes", "p_leak_w", "sram_p_leak_w", "e_ref_cycle_j"},
                        "array");
    overlay(node, "workspace_bytes", c.workspace_bytes);
    overlay(node, "p_leak_w", c.p_leak_w);
    overlay(node, "sram_p_leak_w", c.sram_p_leak_w);
    overlay(node, "e_ref_cycle_j", c.e_ref_cycle_j);
}

void overlay_fault(const json& node, FaultConfig& c) {
    reject_unknown_keys(node, {"rho_kv", "rho_qo", "mask"}, "fault");
    overlay(node, "rho_kv", c.rho_kv);
    overlay(node, "rho_qo", c.rho_qo);
    overlay(node, "mask", c.mask);
}

void overlay_demo(const json& node, DemoConfig& c) {
    reject_unknown_keys(node, {"seq_len", "model_dim", "num_heads"}, "demo");
    overlay(node, "seq_len", c.seq_len);
    overlay(node, "model_dim", c.model_dim);
    overlay(node, "num_heads", c.num_heads);
}

void overlay_workspace(const json& node, WorkspaceConfig& c) {
    reject_unknown_keys(node, {"mode", "fixed_capacity_bytes"}, "workspace");
    overlay(node, "mode", c.mode);
    overlay(node, "fixed_capacity_bytes", c.fixed_capacity_bytes);
}

void overlay_sweep(const json& node, SweepConfig& c) {
    reject_unknown_keys(node, {"kv_ratio"}, "sweep");
    overlay(node, "kv_ratio", c.kv_ratio);
}

std::vector<AnchorPoint> parse_anchors(const json& node) {
    std::vector<AnchorPoint> anchors;
    for (const json& item : node) {
        reject_unknown_keys(item, {"t_us", "ber"}, "retention_anchors");
        AnchorPoint a;
        a.t_us = item.at("t_us").get<double>();
        a.ber = item.at("ber").get<double>();
        anchors.push_back(a);
    }
    return anchors;
}

std::vector<ModelConfig> parse_models(const json& node) {
    std::vector<ModelConfig> models;
    for (const json& item : node) {
        reject_unknown_keys(item, {"name", "num_layers", "hidden_dim", "kv_dim",
                                   "bytes_per_element"},
                            "models");
        ModelConfig m;
        m.name = item.at("name").get<std::string>();
        m.num_layers = item.at("num_layers").get<long long>();
        m.hidden_dim = item.at("hidden_dim").get<long long>();
        m.kv_dim = item.at("kv_dim").get<long long>();
        overlay(item, "bytes_per_element", m.bytes_per_element);
        models.push_back(m);
    }
    return models;
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "summary") return ScenarioKind::Summary;
    if (name == "translation") return ScenarioKind::Translation;
    if (name == "storytelling") return ScenarioKind::Storytelling;
    if (name == "lifecycle") return ScenarioKind::Lifecycle;
    return ScenarioKind::Custom;
}

std::vector<Scenario> parse_scenarios(const json& node) {
    std::vector<Scenario> scenarios;
    for (const json& item : node) {
        reject_unknown_keys(item, {"name", "prefill_tokens", "decode_tokens"}, "scenarios");
        Scenario s;
        s.name = item.at("name").get<std::string>();
        s.kind = scenario_kind_from_name(s.name);
        s.prefill_tokens = item.at("prefill_tokens").get<long long>();
        s.decode_tokens = item.at("decode_tokens").get<long long>();
        scenarios.push_back(s);
    }
    return scenarios;
}

json render(const SimConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["intervals"] = {{"t_std_us", cfg.intervals.t_std_us},
                      {"t_rel_us", cfg.intervals.t_rel_us},
                      {"kelle_ber_target", cfg.intervals.kelle_ber_target}};
    json anchors = json::array();
    for (const AnchorPoint& a : cfg.retention_anchors) {
        anchors.push_back({{"t_us", a.t_us}, {"ber", a.ber}});
    }
    j["retention_anchors"] = anchors;
    j["calibration"] = {{"target_gain", cfg.calibration.target_gain},
                        {"kv_ratio", cfg.calibration.kv_ratio}};
    j["array"] = {{"workspace_bytes", cfg.array.workspace_bytes},
                  {"p_leak_w", cfg.array.p_leak_w},
                  {"sram_p_leak_w", cfg.array.sram_p_leak_w},
                  {"e_ref_cycle_j", cfg.array.e_ref_cycle_j}};
    j["fault"] = {{"rho_kv", cfg.fault.rho_kv},
                  {"rho_qo", cfg.fault.rho_qo},
                  {"mask", cfg.fault.mask}};
    j["demo"] = {{"seq_len", cfg.demo.seq_len},
                 {"model_dim", cfg.demo.model_dim},
                 {"num_heads", cfg.demo.num_heads}};
    j["workspace"] = {{"mode", cfg.workspace.mode},
                      {"fixed_capacity_bytes", cfg.workspace.fixed_capacity_bytes}};
    j["sweep"] = {{"kv_ratio", cfg.sweep.kv_ratio}};
    j["default_model"] = cfg.default_model;
    json models = json::array();
    for (const ModelConfig& m : cfg.models) {
        models.push_back({{"name", m.name},
                          {"num_layers", m.num_layers},
                          {"hidden_dim", m.hidden_dim},
                          {"kv_dim", m.kv_dim},
                          {"bytes_per_element", m.bytes_per_element}});
    }
    j["models"] = models;
    json scenarios = json::array();
    for (const Scenario& s : cfg.scenarios) {
        scenarios.push_back({{"name", s.name},
                             {"prefill_tokens", s.prefill_tokens},
                             {"decode_tokens", s.decode_tokens}});
    }
    j["scenarios"] = scenarios;
    return j;
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace

std::vector<ModelConfig> builtin_models() {
    return {
        {"qwen3-1.7b", 28, 2048, 1024, 2},
        {"qwen3-4b", 36, 2560, 1024, 2},
        {"qwen3-8b", 36, 4096, 1024, 2},
        {"mistral-7b", 32, 4096, 1024, 2},
        {"llama-3-8b", 32, 4096, 1024, 2},
    };
}

SimConfig default_config() {
    SimConfig cfg;
    cfg.models = builtin_models();
    cfg.scenarios = default_scenarios();
    return cfg;
}

SimConfig parse_config(const std::string& json_text) {
    const json root = json::parse(json_text);
    require(root.is_object(), "config root must be a JSON object");
    reject_unknown_keys(root,
                        {"seed", "out_dir", "intervals", "retention_anchors", "calibration",
                         "array", "fault", "demo", "workspace", "sweep", "default_model",
                         "models", "scenarios"},
                        "the top level");

    SimConfig cfg = default_config();
    overlay(root, "seed", cfg.seed);
    overlay(root, "out_dir", cfg.out_dir);
    if (root.contains("intervals")) overlay_intervals(root.at("intervals"), cfg.intervals);
    if (root.contains("retention_anchors")) {
        cfg.retention_anchors = parse_anchors(root.at("retention_anchors"));
    }
    if (root.contains("calibration")) overlay_calibration(root.at("calibration"), cfg.calibration);
    if (root.contains("array")) overlay_array(root.at("array"), cfg.array);
    if (root.contains("fault")) overlay_fault(root.at("fault"), cfg.fault);
    if (root.contains("demo")) overlay_demo(root.at("demo"), cfg.demo);
    if (root.contains("workspace")) overlay_workspace(root.at("workspace"), cfg.workspace);
    if (root.contains("sweep")) overlay_sweep(root.at("sweep"), cfg.sweep);
    overlay(root, "default_model", cfg.default_model);
    if (root.contains("models")) cfg.models = parse_models(root.at("models"));
    if (root.contains("scenarios")) cfg.scenarios = parse_scenarios(root.at("scenarios"));

    validate_config(cfg);
    return cfg;
}

SimConfig load_config(const std::string& path) {
    if (path.empty()) {
        SimConfig cfg = default_config();
        validate_config(cfg);
        return cfg;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void validate_config(const SimConfig& cfg) {
    require(!cfg.out_dir.empty(), "out_dir must be nonempty");
    require(std::isfinite(cfg.intervals.t_std_us) && cfg.intervals.t_std_us > 0.0,
            "t_std_us must be positive");
    require(std::isfinite(cfg.intervals.t_rel_us) && cfg.intervals.t_rel_us > 0.0,
            "t_rel_us must be positive");
    require(cfg.intervals.kelle_ber_target > 0.0 && cfg.intervals.kelle_ber_target < 1.0,
            "kelle_ber_target must lie in (0, 1)");
    require(cfg.retention_anchors.size() == 2, "exactly two retention anchors are required");
    require(std::isfinite(cfg.calibration.kv_ratio) && cfg.calibration.kv_ratio >= 0.0 &&
                cfg.calibration.kv_ratio <= 1.0,
            "calibration kv_ratio must lie in [0, 1]");
    require(std::isfinite(cfg.array.workspace_bytes) && cfg.array.workspace_bytes > 0.0,
            "workspace_bytes must be positive");
    require(std::isfinite(cfg.array.p_leak_w) && cfg.array.p_leak_w >= 0.0,
            "p_leak_w must be nonnegative");
    require(std::isfinite(cfg.array.sram_p_leak_w) && cfg.array.sram_p_leak_w >= 0.0,
            "sram_p_leak_w must be nonnegative");
    require(std::isfinite(cfg.array.e_ref_cycle_j) && cfg.array.e_ref_cycle_j >= 0.0,
            "e_ref_cycle_j must be nonnegative");
    require(cfg.fault.rho_kv >= 0.0 && cfg.fault.rho_kv <= 1.0, "rho_kv must lie in [0, 1]");
    require(cfg.fault.rho_qo >= 0.0 && cfg.fault.rho_qo <= 1.0, "rho_qo must lie in [0, 1]");
    parse_mask(cfg.fault.mask);
    validate_dims({cfg.demo.seq_len, cfg.demo.model_dim, cfg.demo.num_heads});
    parse_workspace_mode(cfg.workspace.mode);
    require(std::isfinite(cfg.workspace.fixed_capacity_bytes) &&
                cfg.workspace.fixed_capacity_bytes >= 0.0,
            "fixed_capacity_bytes must be nonnegative");
    require(std::isfinite(cfg.sweep.kv_ratio) && cfg.sweep.kv_ratio >= 0.0 &&
                cfg.sweep.kv_ratio <= 1.0,
            "sweep kv_ratio must lie in [0, 1]");
    require(!cfg.models.empty(), "at least one model is required");
    for (const ModelConfig& m : cfg.models) {
        validate_model(m);
    }
    require(!cfg.scenarios.empty(), "at least one scenario is required");
    for (const Scenario& s : cfg.scenarios) {
        validate_scenario(s);
    }
    find_model(cfg, cfg.default_model);
}

std::string to_json_string(const SimConfig& cfg) { return render(cfg).dump(); }

std::string config_hash(const SimConfig& cfg) {
    // out_dir is where artifacts land, not what the experiment is; two runs
    // of the same experiment into different directories share a hash.
    json j = render(cfg);
    j.erase("out_dir");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

SegmentMask parse_mask(const std::string& text) {
    if (text == "mantissa") {
        return kMantissaSegment;
    }
    if (text == "sign-exponent") {
        return kSignExponentSegment;
    }
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        try {
            size_t consumed = 0;
            const unsigned long value = std::stoul(text.substr(2), &consumed, 16);
            if (consumed == text.size() - 2 && value <= 0xFFFF) {
                return SegmentMask{static_cast<uint16_t>(value)};
            }
        } catch (const std::exception&) {
            // fall through to the shared rejection below
        }
    }
    throw std::invalid_argument("mask must be \"mantissa\", \"sign-exponent\", or a 16-bit "
                                "hex literal like \"0x007f\"");
}

std::string mask_name(SegmentMask mask) {
    if (mask.bits == kMantissaSegment.bits) {
        return "mantissa";
    }
    if (mask.bits == kSignExponentSegment.bits) {
        return "sign-exponent";
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%04x", mask.bits);
    return buf;
}

WorkspaceMode parse_workspace_mode(const std::string& text) {
    if (text == "active-layer") {
        return WorkspaceMode::ActiveLayer;
    }
    if (text == "whole-model") {
        return WorkspaceMode::WholeModel;
    }
    throw std::invalid_argument("workspace mode must be \"active-layer\" or \"whole-model\"");
}

DerivedParameters derive_parameters(const SimConfig& cfg) {
    validate_config(cfg);
    DerivedParameters d;
    d.curve = calibrate_retention(cfg.retention_anchors[0], cfg.retention_anchors[1]);
    d.t_kelle_us = interval_for_ber(d.curve, cfg.intervals.kelle_ber_target);
    if (cfg.array.e_ref_cycle_j > 0.0) {
        d.e_ref_cycle_j = cfg.array.e_ref_cycle_j;
        d.e_ref_calibrated = false;
    } else {
        d.e_ref_cycle_j = calibrate_refresh_energy(
            cfg.calibration.target_gain, cfg.array.p_leak_w, cfg.intervals.t_std_us,
            cfg.intervals.t_rel_us, cfg.calibration.kv_ratio);
        d.e_ref_calibrated = true;
    }
    d.constants = {cfg.array.p_leak_w, d.e_ref_cycle_j, cfg.array.workspace_bytes};
    d.policies =
        make_policies(cfg.intervals.t_std_us, cfg.intervals.t_rel_us, d.t_kelle_us);
    d.trace_options = {parse_workspace_mode(cfg.workspace.mode),
                       cfg.workspace.fixed_capacity_bytes};
    d.fault = {cfg.fault.rho_kv, cfg.fault.rho_qo, parse_mask(cfg.fault.mask), cfg.seed};
    return d;
}

const ModelConfig& find_model(const SimConfig& cfg, const std::string& name) {
    for (const ModelConfig& m : cfg.models) {
        if (m.name == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown model: " + name);
}

const Scenario& find_scenario(const SimConfig& cfg, const std::string& name) {
    for (const Scenario& s : cfg.scenarios) {
        if (s.name == name) {
            return s;
        }
    }
    throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace shield
