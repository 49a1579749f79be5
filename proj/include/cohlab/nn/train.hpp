// SPDX-License-Identifier: Apache-2.0
//
// Minibatch training mechanics: Adam with bias correction, the seeded epoch
// loop with best-checkpoint tracking, and frame-level inference (equalize).

#pragma once

#include <cstdint>
#include <vector>

#include "cohlab/dataset.hpp"
#include "cohlab/nn/model.hpp"
#include "cohlab/txrx.hpp"

namespace cohlab::nn {

struct TrainConfig {
    size_t batch_size = 1024;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs = 100;
    uint64_t seed = 0;
};

// One bias-corrected Adam update on a single parameter vector; t is the
// 1-based step count after this update.
void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, long t, double lr, double beta1,
                 double beta2, double eps);

struct AdamState {
    std::vector<std::vector<double>> m, v;  // one pair per model parameter
    long t = 0;
};

// Applies adam_update across every model parameter using the gradients
// accumulated by the last backward pass.
void adam_step(Model& model, AdamState& state, const TrainConfig& cfg);

struct TrainResult {
    std::vector<double> loss_history;  // mean training MSE per epoch
    double best_loss = 0.0;
    int best_epoch = 0;
};

// Seeded shuffling, minibatch forward/backward/Adam, per-epoch mean MSE.
// The model is left holding the best-epoch weights. Throws if the loss turns
// non-finite (divergence) or the dataset is empty or mismatched.
TrainResult train(Model& model, const TokenDataset& ds, const TrainConfig& cfg);

// Assemble a [count, seq, 32] token tensor from dataset sequences starting
// at `first`; helper shared by training, inference and the python bindings.
Tensor batch_tokens(const TokenDataset& ds, const std::vector<size_t>& order, size_t first,
                    size_t count);
Tensor batch_targets(const TokenDataset& ds, const std::vector<size_t>& order, size_t first,
                     size_t count);

// Slide the model across a frame: symbol t in [n, L-n) is replaced by the
// model's (I, Q) output for the window centered there; the first and last n
// symbols pass through unchanged. normalization is the divisor recorded in
// the training dataset.
SymbolFrame equalize(Model& model, const SymbolFrame& rx, int n, double normalization);

}  // namespace cohlab::nn
