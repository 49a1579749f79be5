// SPDX-License-Identifier: Apache-2.0
//
// End-to-end experiment pipeline: transmit, propagate, receive, optionally
// train the neural equalizers, and score every requested method on one
// shared received waveform.
//
// Seed tree (all via derive_seed from run.seed): "test-frame" and
// "train-frame" for the two simulations, "init.<arch>" / "train.<arch>" for
// each model, and within a frame "bits.x"/"bits.y", "laser", "link",
// "loading.x"/"loading.y". Sweeps derive one sub-seed per point with
// ("sweep", index).
//
// Loading noise: white circular Gaussian added per polarization at the
// receiver input with per-sample variance P_pol * sps / 10^(snr/10), which
// sets the post-matched-filter SNR to approximately snr dB. This stands in
// for every unmodelled receiver impairment and pins the operating point of
// the desk-scale link.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "cohlab/bench/config.hpp"
#include "cohlab/metrics.hpp"

namespace cohlab::bench {

struct MethodResult {
    std::string method;
    MetricsReport metrics;
    double runtime_s = 0.0;
    bool failed = false;
    std::string error;
};

// Optional artifact capture for constellation dumps and training curves.
struct PipelineArtifacts {
    SymbolFrame tx_reference;                          // common scored range
    SymbolFrame rx_unequalized;                        // linear-eq chain output
    std::map<std::string, SymbolFrame> rx_equalized;   // per method, same range
    std::map<std::string, std::vector<double>> train_loss;
};

// Per polarization, seeded receiver loading noise (see header comment).
ComplexWaveform add_loading_noise(const ComplexWaveform& w, double snr_db, int sps,
                                  uint64_t rng_seed);

// Runs every method in cfg.methods on the shared test frame; per-method
// wall-clock runtimes are recorded only when timing is true so that emitted
// CSV bytes stay reproducible by default.
std::vector<MethodResult> run_pipeline(const ExperimentConfig& cfg, bool timing = false,
                                       PipelineArtifacts* artifacts = nullptr);

struct SweepRow {
    double sweep_var = 0.0;
    std::string method;
    MetricsReport metrics;
    double runtime_s = 0.0;
    uint64_t seed = 0;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (sweep_var, method order in config)
};

// run_pipeline per sweep value with sub-seed ("sweep", index). A failing
// point is recorded (failed flag, NaN metrics) and the sweep continues.
SweepResult sweep(const ExperimentConfig& cfg, bool timing = false);

// Building blocks reused by the CLI subcommands.
struct TrainOutput {
    std::unique_ptr<nn::Model> model;
    nn::CheckpointMeta meta;
    nn::TrainResult result;
};

// Simulate the training frame, run the linear receiver chain, window the
// aligned symbols and train the requested architecture.
TrainOutput train_model(const ExperimentConfig& cfg, const std::string& architecture);

// Simulate the test frame, run the linear chain, apply a trained model and
// score it over the common trimmed range.
MethodResult evaluate_model(const ExperimentConfig& cfg, nn::Model& model,
                            const nn::CheckpointMeta& meta, PipelineArtifacts* artifacts = nullptr);

}  // namespace cohlab::bench
