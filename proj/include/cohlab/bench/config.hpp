// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: engineering units at the boundary, JSON on disk,
// dotted-path overrides from the command line. Defaults describe the
// desk-scale link; every field is one config change away from the full-scale
// setup.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cohlab/channel.hpp"
#include "cohlab/dsp.hpp"
#include "cohlab/nn/model.hpp"
#include "cohlab/nn/train.hpp"

namespace cohlab::bench {

struct ExperimentConfig {
    // link
    FiberEngineering fiber;
    int n_spans = 4;
    double noise_figure_db = 4.5;
    bool ase = true;
    double ssfm_step_m = 100.0;
    std::string polarization_model = "manakov";  // or "scalar"

    // tx
    double symbol_rate_gbaud = 10.0;
    double launch_power_dbm = 1.0;
    double rolloff = 0.18;
    int sps = 8;
    int rrc_span_symbols = 16;
    double linewidth_hz = 1e5;
    double frequency_offset_hz = 0.0;

    // rx front end: white Gaussian loading noise setting the post-matched-
    // filter SNR per polarization (see pipeline docs)
    bool loading_noise = true;
    double loading_snr_db = 16.0;

    // dsp
    int dbp_steps_per_span = 10;
    double dbp_nl_scaling = 1.0;
    int cpr_test_phases = 64;
    int cpr_window = 32;

    // equalizer models
    int window_n = 2;  // half-width; token count = 2(2n+1)
    int d_model = 32;
    int n_heads = 8;
    int n_layers = 1;
    int d_ff = 1024;
    double dropout = 0.1;
    int fcnn_hidden = 100;
    int epochs = 20;
    size_t batch_size = 1024;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    // run
    uint64_t seed = 1;
    size_t n_symbols = 32768;      // evaluation frame
    size_t train_symbols = 8192;   // training frame (separate seed branch)
    std::vector<std::string> methods = {"linear-eq", "dbp", "fcnn", "transformer"};
    std::string sweep_variable = "launch_power_dbm";  // or "n_spans"
    std::vector<double> sweep_values = {-4, -3, -2, -1, 0, 1, 2, 3};
    std::string evaluate_polarization = "x";
    double fec_threshold_db = 8.53;  // reference line in plots only

    // derived helpers
    double symbol_rate_hz() const { return symbol_rate_gbaud * 1e9; }
    double launch_power_w() const;
    int transformer_seq_len() const { return 2 * (2 * window_n + 1); }
    FiberParams fiber_params() const;
    LinkConfig link_config() const;
    PulseShape pulse_shape() const;
    nn::TransformerConfig transformer_config() const;
    nn::FcnnConfig fcnn_config() const;
    nn::TrainConfig train_config() const;  // seed left at 0, filled per run
};

// Defaults above, serialized with section structure.
ExperimentConfig default_config();

// JSON round trip. from_json starts from the defaults, deep-merges the given
// document over them and validates; unknown sections or keys are errors.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

// Read a JSON file, apply key=value overrides (dotted paths into the section
// structure, values parsed as JSON with bare-word fallback to string), then
// parse. A missing file is an error naming the path.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

// Overrides applied to a bare JSON document; exposed for the CLI and tests.
std::string apply_overrides_to_json(const std::string& text,
                                    const std::vector<std::string>& overrides);

// FNV-1a over the canonical JSON form; stamps error messages and logs.
uint64_t config_hash(const ExperimentConfig& cfg);

void validate(const ExperimentConfig& cfg);

}  // namespace cohlab::bench
