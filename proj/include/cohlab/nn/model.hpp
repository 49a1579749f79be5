// SPDX-License-Identifier: Apache-2.0
//
// Equalizer models on top of the autodiff engine: an encoder-only
// Transformer (sinusoidal positional encoding added to the bit tokens,
// post-norm encoder blocks, flattened outputs into one linear head) and a
// single-hidden-layer FCNN baseline. Both consume [batch, seq, 32] token
// tensors and predict an (I, Q) pair per sequence.

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cohlab/nn/tensor.hpp"

namespace cohlab::nn {

struct TransformerConfig {
    int seq_len = 10;
    int d_model = 32;
    int n_heads = 8;
    int n_layers = 1;
    int d_ff = 1024;
    int d_out = 2;
    double dropout = 0.1;
};

struct FcnnConfig {
    int seq_len = 10;
    int d_model = 32;
    int d_hidden = 100;
    int d_out = 2;
};

// PE(pos, 2i) = sin(pos / 10000^(2i/d)), PE(pos, 2i+1) = cos(same argument);
// leaf tensor of shape [seq_len, d_model]. d_model must be even.
Tensor positional_encoding(int seq_len, int d_model);

class Model {
  public:
    virtual ~Model() = default;

    // x: [batch, seq_len, 32]. Returns [batch, d_out]. dropout_rng is only
    // consumed in training mode.
    virtual Tensor forward(const Tensor& x, bool training, GaussianSampler& dropout_rng) = 0;

    virtual std::string architecture() const = 0;
    virtual std::string config_string() const = 0;  // JSON text
    virtual int seq_len() const = 0;

    std::vector<std::pair<std::string, Tensor>>& parameters() { return params_; }
    const std::vector<std::pair<std::string, Tensor>>& parameters() const { return params_; }
    size_t parameter_count() const;

    // Uniform fan-in init U(-sqrt(1/fan_in), sqrt(1/fan_in)) for weights and
    // biases; normalization gains start at 1 and shifts at 0. Deterministic
    // in the seed and the registration order.
    void init_weights(uint64_t seed);

  protected:
    enum class Init { FanInUniform, Ones, Zeros };
    Tensor add_param(const std::string& name, std::vector<size_t> shape, Init init,
                     size_t fan_in = 0);

  private:
    struct Entry {
        Init init;
        size_t fan_in;
    };
    std::vector<std::pair<std::string, Tensor>> params_;
    std::vector<Entry> entries_;
};

class TransformerModel : public Model {
  public:
    explicit TransformerModel(const TransformerConfig& cfg);
    Tensor forward(const Tensor& x, bool training, GaussianSampler& dropout_rng) override;
    std::string architecture() const override { return "transformer"; }
    std::string config_string() const override;
    int seq_len() const override { return cfg_.seq_len; }
    const TransformerConfig& config() const { return cfg_; }

  private:
    struct Block {
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
    };
    TransformerConfig cfg_;
    Tensor pe_;  // constant, not a parameter
    std::vector<Block> blocks_;
    Tensor head_w_, head_b_;
};

class FcnnModel : public Model {
  public:
    explicit FcnnModel(const FcnnConfig& cfg);
    Tensor forward(const Tensor& x, bool training, GaussianSampler& dropout_rng) override;
    std::string architecture() const override { return "fcnn"; }
    std::string config_string() const override;
    int seq_len() const override { return cfg_.seq_len; }
    const FcnnConfig& config() const { return cfg_; }

  private:
    FcnnConfig cfg_;
    Tensor w1_, b1_, w2_, b2_;
};

// Construct from an architecture tag ("transformer" or "fcnn") and the JSON
// produced by config_string(); weights start at zero.
std::unique_ptr<Model> make_model(const std::string& architecture, const std::string& config_json);

struct CheckpointMeta {
    int epochs = 0;
    int best_epoch = 0;
    double final_loss = 0.0;
    uint64_t seed = 0;
    uint64_t dataset_hash = 0;
    int window_n = 0;            // half-width the model was trained with
    double normalization = 1.0;  // rx scaling divisor recorded by the dataset
};

// Versioned little-endian container: magic, version, architecture tag,
// config+meta JSON, then each named tensor (name, dims, raw doubles).
// Reloading reproduces evaluation-mode outputs bit for bit.
void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::string& path);

struct LoadedCheckpoint {
    std::unique_ptr<Model> model;
    CheckpointMeta meta;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace cohlab::nn
