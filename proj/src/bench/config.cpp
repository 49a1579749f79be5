// SPDX-License-Identifier: Apache-2.0

#include "cohlab/bench/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cohlab::bench {

using json = nlohmann::json;

double ExperimentConfig::launch_power_w() const {
    return 1e-3 * std::pow(10.0, launch_power_dbm / 10.0);
}

FiberParams ExperimentConfig::fiber_params() const { return fiber_from_engineering(fiber); }

LinkConfig ExperimentConfig::link_config() const {
    LinkConfig link;
    link.span = fiber_params();
    link.n_spans = n_spans;
    link.amplifier.gain_db = fiber.attenuation_db_km * fiber.span_km;  // transparent spans
    link.amplifier.noise_figure_db = noise_figure_db;
    link.amplifier.ase_enabled = ase;
    link.ssfm_step = ssfm_step_m;
    link.polarization_model = polarization_model == "scalar" ? PolarizationModel::IndependentScalar
                                                             : PolarizationModel::Manakov;
    return link;
}

PulseShape ExperimentConfig::pulse_shape() const {
    PulseShape s;
    s.rolloff = rolloff;
    s.sps = sps;
    s.span_symbols = rrc_span_symbols;
    return s;
}

nn::TransformerConfig ExperimentConfig::transformer_config() const {
    nn::TransformerConfig c;
    c.seq_len = transformer_seq_len();
    c.d_model = d_model;
    c.n_heads = n_heads;
    c.n_layers = n_layers;
    c.d_ff = d_ff;
    c.d_out = 2;
    c.dropout = dropout;
    return c;
}

nn::FcnnConfig ExperimentConfig::fcnn_config() const {
    nn::FcnnConfig c;
    c.seq_len = transformer_seq_len();
    c.d_model = d_model;
    c.d_hidden = fcnn_hidden;
    c.d_out = 2;
    return c;
}

nn::TrainConfig ExperimentConfig::train_config() const {
    nn::TrainConfig c;
    c.batch_size = batch_size;
    c.learning_rate = learning_rate;
    c.beta1 = adam_beta1;
    c.beta2 = adam_beta2;
    c.eps = adam_eps;
    c.epochs = epochs;
    return c;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

json to_json_doc(const ExperimentConfig& c) {
    json j;
    j["link"] = {{"n_spans", c.n_spans},
                 {"span_km", c.fiber.span_km},
                 {"attenuation_db_km", c.fiber.attenuation_db_km},
                 {"dispersion_ps_nm_km", c.fiber.dispersion_ps_nm_km},
                 {"beta3_ps3_km", c.fiber.beta3_ps3_km},
                 {"n2_m2_per_w", c.fiber.n2_m2_per_w},
                 {"core_area_um2", c.fiber.core_area_um2},
                 {"wavelength_nm", c.fiber.wavelength_nm},
                 {"noise_figure_db", c.noise_figure_db},
                 {"ase", c.ase},
                 {"ssfm_step_m", c.ssfm_step_m},
                 {"polarization_model", c.polarization_model}};
    j["tx"] = {{"symbol_rate_gbaud", c.symbol_rate_gbaud},
               {"launch_power_dbm", c.launch_power_dbm},
               {"rolloff", c.rolloff},
               {"sps", c.sps},
               {"rrc_span_symbols", c.rrc_span_symbols},
               {"linewidth_hz", c.linewidth_hz},
               {"frequency_offset_hz", c.frequency_offset_hz}};
    j["rx"] = {{"loading_noise", c.loading_noise}, {"loading_snr_db", c.loading_snr_db}};
    j["dsp"] = {{"dbp_steps_per_span", c.dbp_steps_per_span},
                {"dbp_nl_scaling", c.dbp_nl_scaling},
                {"cpr_test_phases", c.cpr_test_phases},
                {"cpr_window", c.cpr_window}};
    j["model"] = {{"window_n", c.window_n},
                  {"d_model", c.d_model},
                  {"n_heads", c.n_heads},
                  {"n_layers", c.n_layers},
                  {"d_ff", c.d_ff},
                  {"dropout", c.dropout},
                  {"fcnn_hidden", c.fcnn_hidden},
                  {"epochs", c.epochs},
                  {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate},
                  {"adam_beta1", c.adam_beta1},
                  {"adam_beta2", c.adam_beta2},
                  {"adam_eps", c.adam_eps}};
    j["run"] = {{"seed", c.seed},
                {"n_symbols", c.n_symbols},
                {"train_symbols", c.train_symbols},
                {"methods", c.methods},
                {"sweep_variable", c.sweep_variable},
                {"sweep_values", c.sweep_values},
                {"evaluate_polarization", c.evaluate_polarization},
                {"fec_threshold_db", c.fec_threshold_db}};
    return j;
}

void deep_merge(json& base, const json& over, const std::string& path) {
    if (!over.is_object())
        throw std::invalid_argument("config: section " + (path.empty() ? "root" : path) +
                                    " must be an object");
    for (auto it = over.begin(); it != over.end(); ++it) {
        const std::string here = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key()))
            throw std::invalid_argument("config: unknown key " + here);
        if (base[it.key()].is_object()) {
            deep_merge(base[it.key()], it.value(), here);
        } else {
            base[it.key()] = it.value();
        }
    }
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
    try {
        out = j.at(section).at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: bad value for ") + section + "." + key +
                                    ": " + e.what());
    }
}

ExperimentConfig from_json_doc(const json& j) {
    ExperimentConfig c;
    read(j, "link", "n_spans", c.n_spans);
    read(j, "link", "span_km", c.fiber.span_km);
    read(j, "link", "attenuation_db_km", c.fiber.attenuation_db_km);
    read(j, "link", "dispersion_ps_nm_km", c.fiber.dispersion_ps_nm_km);
    read(j, "link", "beta3_ps3_km", c.fiber.beta3_ps3_km);
    read(j, "link", "n2_m2_per_w", c.fiber.n2_m2_per_w);
    read(j, "link", "core_area_um2", c.fiber.core_area_um2);
    read(j, "link", "wavelength_nm", c.fiber.wavelength_nm);
    read(j, "link", "noise_figure_db", c.noise_figure_db);
    read(j, "link", "ase", c.ase);
    read(j, "link", "ssfm_step_m", c.ssfm_step_m);
    read(j, "link", "polarization_model", c.polarization_model);
    read(j, "tx", "symbol_rate_gbaud", c.symbol_rate_gbaud);
    read(j, "tx", "launch_power_dbm", c.launch_power_dbm);
    read(j, "tx", "rolloff", c.rolloff);
    read(j, "tx", "sps", c.sps);
    read(j, "tx", "rrc_span_symbols", c.rrc_span_symbols);
    read(j, "tx", "linewidth_hz", c.linewidth_hz);
    read(j, "tx", "frequency_offset_hz", c.frequency_offset_hz);
    read(j, "rx", "loading_noise", c.loading_noise);
    read(j, "rx", "loading_snr_db", c.loading_snr_db);
    read(j, "dsp", "dbp_steps_per_span", c.dbp_steps_per_span);
    read(j, "dsp", "dbp_nl_scaling", c.dbp_nl_scaling);
    read(j, "dsp", "cpr_test_phases", c.cpr_test_phases);
    read(j, "dsp", "cpr_window", c.cpr_window);
    read(j, "model", "window_n", c.window_n);
    read(j, "model", "d_model", c.d_model);
    read(j, "model", "n_heads", c.n_heads);
    read(j, "model", "n_layers", c.n_layers);
    read(j, "model", "d_ff", c.d_ff);
    read(j, "model", "dropout", c.dropout);
    read(j, "model", "fcnn_hidden", c.fcnn_hidden);
    read(j, "model", "epochs", c.epochs);
    read(j, "model", "batch_size", c.batch_size);
    read(j, "model", "learning_rate", c.learning_rate);
    read(j, "model", "adam_beta1", c.adam_beta1);
    read(j, "model", "adam_beta2", c.adam_beta2);
    read(j, "model", "adam_eps", c.adam_eps);
    read(j, "run", "seed", c.seed);
    read(j, "run", "n_symbols", c.n_symbols);
    read(j, "run", "train_symbols", c.train_symbols);
    read(j, "run", "methods", c.methods);
    read(j, "run", "sweep_variable", c.sweep_variable);
    read(j, "run", "sweep_values", c.sweep_values);
    read(j, "run", "evaluate_polarization", c.evaluate_polarization);
    read(j, "run", "fec_threshold_db", c.fec_threshold_db);
    validate(c);
    return c;
}

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (c.n_spans < 1) fail("link.n_spans must be >= 1");
    if (c.fiber.span_km <= 0) fail("link.span_km must be > 0");
    if (c.fiber.core_area_um2 <= 0) fail("link.core_area_um2 must be > 0");
    if (c.fiber.wavelength_nm <= 0) fail("link.wavelength_nm must be > 0");
    if (c.ssfm_step_m <= 0) fail("link.ssfm_step_m must be > 0");
    if (c.ssfm_step_m > c.fiber.span_km * 1e3) fail("link.ssfm_step_m exceeds the span length");
    if (c.polarization_model != "manakov" && c.polarization_model != "scalar")
        fail("link.polarization_model must be \"manakov\" or \"scalar\"");
    if (c.symbol_rate_gbaud <= 0) fail("tx.symbol_rate_gbaud must be > 0");
    if (c.rolloff < 0 || c.rolloff > 1) fail("tx.rolloff must be in [0, 1]");
    if (c.sps < 2) fail("tx.sps must be >= 2");
    if (c.rrc_span_symbols < 1) fail("tx.rrc_span_symbols must be >= 1");
    if (c.linewidth_hz < 0) fail("tx.linewidth_hz must be >= 0");
    if (c.dbp_steps_per_span < 1) fail("dsp.dbp_steps_per_span must be >= 1");
    if (c.cpr_test_phases < 4) fail("dsp.cpr_test_phases must be >= 4");
    if (c.cpr_window < 1) fail("dsp.cpr_window must be >= 1");
    if (c.window_n < 0) fail("model.window_n must be >= 0");
    if (c.d_model != 32) fail("model.d_model must be 32 (binary32 token features)");
    if (c.n_heads < 1 || c.d_model % c.n_heads != 0) fail("model.n_heads must divide d_model");
    if (c.n_layers < 1) fail("model.n_layers must be >= 1");
    if (c.d_ff < 1) fail("model.d_ff must be >= 1");
    if (c.dropout < 0 || c.dropout >= 1) fail("model.dropout must be in [0, 1)");
    if (c.fcnn_hidden < 1) fail("model.fcnn_hidden must be >= 1");
    if (c.epochs < 1) fail("model.epochs must be >= 1");
    if (c.batch_size < 1) fail("model.batch_size must be >= 1");
    if (!(c.learning_rate > 0)) fail("model.learning_rate must be > 0");
    if (!is_pow2(c.n_symbols)) fail("run.n_symbols must be a power of two");
    if (!is_pow2(c.train_symbols)) fail("run.train_symbols must be a power of two");
    const size_t min_sym = 2 * static_cast<size_t>(c.rrc_span_symbols) +
                           2 * static_cast<size_t>(c.window_n) + 16;
    if (c.n_symbols < min_sym || c.train_symbols < min_sym)
        fail("run.n_symbols/train_symbols too small for the filter guard and window");
    if (c.methods.empty()) fail("run.methods must be non-empty");
    for (const auto& m : c.methods)
        if (m != "linear-eq" && m != "dbp" && m != "fcnn" && m != "transformer")
            fail("run.methods: unknown method " + m);
    if (c.sweep_variable != "launch_power_dbm" && c.sweep_variable != "n_spans")
        fail("run.sweep_variable must be launch_power_dbm or n_spans");
    if (c.sweep_values.empty()) fail("run.sweep_values must be non-empty");
    if (c.sweep_variable == "n_spans")
        for (double v : c.sweep_values)
            if (v < 1 || v != std::floor(v)) fail("run.sweep_values: n_spans values must be integers >= 1");
    if (c.evaluate_polarization != "x" && c.evaluate_polarization != "y")
        fail("run.evaluate_polarization must be \"x\" or \"y\"");
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json_doc(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text) {
    json over;
    try {
        over = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    json base = to_json_doc(ExperimentConfig{});
    deep_merge(base, over, "");
    return from_json_doc(base);
}

std::string apply_overrides_to_json(const std::string& text,
                                    const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    for (const std::string& kv : overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("override must be key=value, got: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // bare words become strings
        }
        json* node = &doc;
        size_t start = 0;
        while (true) {
            const size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (part.empty()) throw std::invalid_argument("override: empty path segment in " + key);
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    return doc.dump();
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(apply_overrides_to_json(buf.str(), overrides));
}

uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = to_json_doc(cfg).dump();
    uint64_t h = 14695981039346656037ull;
    for (const unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace cohlab::bench
