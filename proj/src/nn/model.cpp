// SPDX-License-Identifier: Apache-2.0

#include "cohlab/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cohlab::nn {

using json = nlohmann::json;

size_t Model::parameter_count() const {
    size_t n = 0;
    for (const auto& [name, t] : params_) n += t->size();
    return n;
}

Tensor Model::add_param(const std::string& name, std::vector<size_t> shape, Init init,
                        size_t fan_in) {
    Tensor t = make_tensor(std::move(shape));
    if (init == Init::Ones) std::fill(t->value.begin(), t->value.end(), 1.0);
    params_.emplace_back(name, t);
    entries_.push_back({init, fan_in});
    return t;
}

void Model::init_weights(uint64_t seed) {
    GaussianSampler rng(derive_seed(seed, "init"));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& t = params_[i].second;
        switch (entries_[i].init) {
            case Init::Zeros:
                std::fill(t->value.begin(), t->value.end(), 0.0);
                break;
            case Init::Ones:
                std::fill(t->value.begin(), t->value.end(), 1.0);
                break;
            case Init::FanInUniform: {
                const double bound = std::sqrt(1.0 / static_cast<double>(entries_[i].fan_in));
                for (auto& v : t->value) v = bound * (2.0 * rng.uniform() - 1.0);
                break;
            }
        }
    }
}

Tensor positional_encoding(int seq_len, int d_model) {
    if (seq_len < 1 || d_model < 2 || d_model % 2 != 0)
        throw std::invalid_argument("positional_encoding: need seq_len >= 1 and even d_model");
    Tensor pe = make_tensor({static_cast<size_t>(seq_len), static_cast<size_t>(d_model)});
    for (int pos = 0; pos < seq_len; ++pos) {
        for (int i = 0; i < d_model / 2; ++i) {
            const double arg = pos * std::pow(10000.0, -2.0 * i / static_cast<double>(d_model));
            pe->value[pos * d_model + 2 * i] = std::sin(arg);
            pe->value[pos * d_model + 2 * i + 1] = std::cos(arg);
        }
    }
    return pe;
}

TransformerModel::TransformerModel(const TransformerConfig& cfg) : cfg_(cfg) {
    if (cfg.d_model % cfg.n_heads != 0)
        throw std::invalid_argument("TransformerModel: d_model not divisible by n_heads");
    if (cfg.seq_len < 1 || cfg.n_layers < 1 || cfg.d_ff < 1 || cfg.d_out < 1)
        throw std::invalid_argument("TransformerModel: invalid config");
    const auto d = static_cast<size_t>(cfg.d_model);
    const auto ff = static_cast<size_t>(cfg.d_ff);
    pe_ = positional_encoding(cfg.seq_len, cfg.d_model);
    blocks_.resize(cfg.n_layers);
    for (int l = 0; l < cfg.n_layers; ++l) {
        Block& b = blocks_[l];
        const std::string p = "enc" + std::to_string(l) + ".";
        b.wq = add_param(p + "attn.wq", {d, d}, Init::FanInUniform, d);
        b.bq = add_param(p + "attn.bq", {d}, Init::FanInUniform, d);
        b.wk = add_param(p + "attn.wk", {d, d}, Init::FanInUniform, d);
        b.bk = add_param(p + "attn.bk", {d}, Init::FanInUniform, d);
        b.wv = add_param(p + "attn.wv", {d, d}, Init::FanInUniform, d);
        b.bv = add_param(p + "attn.bv", {d}, Init::FanInUniform, d);
        b.wo = add_param(p + "attn.wo", {d, d}, Init::FanInUniform, d);
        b.bo = add_param(p + "attn.bo", {d}, Init::FanInUniform, d);
        b.ln1_g = add_param(p + "ln1.gain", {d}, Init::Ones);
        b.ln1_b = add_param(p + "ln1.bias", {d}, Init::Zeros);
        b.w1 = add_param(p + "ff.w1", {d, ff}, Init::FanInUniform, d);
        b.b1 = add_param(p + "ff.b1", {ff}, Init::FanInUniform, d);
        b.w2 = add_param(p + "ff.w2", {ff, d}, Init::FanInUniform, ff);
        b.b2 = add_param(p + "ff.b2", {d}, Init::FanInUniform, ff);
        b.ln2_g = add_param(p + "ln2.gain", {d}, Init::Ones);
        b.ln2_b = add_param(p + "ln2.bias", {d}, Init::Zeros);
    }
    const size_t flat = static_cast<size_t>(cfg.seq_len) * d;
    head_w_ = add_param("head.w", {flat, static_cast<size_t>(cfg.d_out)}, Init::FanInUniform, flat);
    head_b_ = add_param("head.b", {static_cast<size_t>(cfg.d_out)}, Init::FanInUniform, flat);
}

Tensor TransformerModel::forward(const Tensor& x, bool training, GaussianSampler& dropout_rng) {
    const auto S = static_cast<size_t>(cfg_.seq_len);
    const auto D = static_cast<size_t>(cfg_.d_model);
    if (x->shape.size() != 3 || x->shape[1] != S || x->shape[2] != D)
        throw std::invalid_argument("TransformerModel::forward: input " + shape_str(x->shape) +
                                    ", expected [batch," + std::to_string(S) + "," +
                                    std::to_string(D) + "]");
    const size_t B = x->shape[0];
    const auto H = static_cast<size_t>(cfg_.n_heads);
    const size_t dh = D / H;

    Tensor flat = reshape(add(x, pe_), {B * S, D});
    for (const Block& blk : blocks_) {
        // multi-head self-attention, no mask
        Tensor q = add(matmul(flat, blk.wq), blk.bq);
        Tensor k = add(matmul(flat, blk.wk), blk.bk);
        Tensor v = add(matmul(flat, blk.wv), blk.bv);
        auto split = [&](const Tensor& t) {
            return reshape(permute(reshape(t, {B, S, H, dh}), {0, 2, 1, 3}), {B * H, S, dh});
        };
        Tensor qh = split(q);
        Tensor vh = split(v);
        Tensor kt = reshape(permute(reshape(k, {B, S, H, dh}), {0, 2, 3, 1}), {B * H, dh, S});
        Tensor attn = softmax_lastdim(scale(bmm(qh, kt), 1.0 / std::sqrt(double(dh))));
        Tensor ctx = reshape(permute(reshape(bmm(attn, vh), {B, H, S, dh}), {0, 2, 1, 3}),
                             {B * S, D});
        Tensor proj = dropout(add(matmul(ctx, blk.wo), blk.bo), cfg_.dropout, training,
                              dropout_rng);
        flat = layer_norm_lastdim(add(flat, proj), blk.ln1_g, blk.ln1_b);

        Tensor ffn = add(matmul(relu(add(matmul(flat, blk.w1), blk.b1)), blk.w2), blk.b2);
        ffn = dropout(ffn, cfg_.dropout, training, dropout_rng);
        flat = layer_norm_lastdim(add(flat, ffn), blk.ln2_g, blk.ln2_b);
    }
    return add(matmul(reshape(flat, {B, S * D}), head_w_), head_b_);
}

std::string TransformerModel::config_string() const {
    json j;
    j["seq_len"] = cfg_.seq_len;
    j["d_model"] = cfg_.d_model;
    j["n_heads"] = cfg_.n_heads;
    j["n_layers"] = cfg_.n_layers;
    j["d_ff"] = cfg_.d_ff;
    j["d_out"] = cfg_.d_out;
    j["dropout"] = cfg_.dropout;
    return j.dump();
}

FcnnModel::FcnnModel(const FcnnConfig& cfg) : cfg_(cfg) {
    if (cfg.seq_len < 1 || cfg.d_model < 1 || cfg.d_hidden < 1 || cfg.d_out < 1)
        throw std::invalid_argument("FcnnModel: invalid config");
    const size_t d_in = static_cast<size_t>(cfg.seq_len) * static_cast<size_t>(cfg.d_model);
    w1_ = add_param("fc1.w", {d_in, static_cast<size_t>(cfg.d_hidden)}, Init::FanInUniform, d_in);
    b1_ = add_param("fc1.b", {static_cast<size_t>(cfg.d_hidden)}, Init::FanInUniform, d_in);
    w2_ = add_param("fc2.w", {static_cast<size_t>(cfg.d_hidden), static_cast<size_t>(cfg.d_out)},
                    Init::FanInUniform, static_cast<size_t>(cfg.d_hidden));
    b2_ = add_param("fc2.b", {static_cast<size_t>(cfg.d_out)}, Init::FanInUniform,
                    static_cast<size_t>(cfg.d_hidden));
}

Tensor FcnnModel::forward(const Tensor& x, bool training, GaussianSampler& dropout_rng) {
    (void)training;
    (void)dropout_rng;
    const auto S = static_cast<size_t>(cfg_.seq_len);
    const auto D = static_cast<size_t>(cfg_.d_model);
    if (x->shape.size() != 3 || x->shape[1] != S || x->shape[2] != D)
        throw std::invalid_argument("FcnnModel::forward: input " + shape_str(x->shape) +
                                    ", expected [batch," + std::to_string(S) + "," +
                                    std::to_string(D) + "]");
    Tensor flat = reshape(x, {x->shape[0], S * D});
    return add(matmul(relu(add(matmul(flat, w1_), b1_)), w2_), b2_);
}

std::string FcnnModel::config_string() const {
    json j;
    j["seq_len"] = cfg_.seq_len;
    j["d_model"] = cfg_.d_model;
    j["d_hidden"] = cfg_.d_hidden;
    j["d_out"] = cfg_.d_out;
    return j.dump();
}

std::unique_ptr<Model> make_model(const std::string& architecture,
                                  const std::string& config_json) {
    json j = json::parse(config_json);
    if (architecture == "transformer") {
        TransformerConfig c;
        c.seq_len = j.value("seq_len", c.seq_len);
        c.d_model = j.value("d_model", c.d_model);
        c.n_heads = j.value("n_heads", c.n_heads);
        c.n_layers = j.value("n_layers", c.n_layers);
        c.d_ff = j.value("d_ff", c.d_ff);
        c.d_out = j.value("d_out", c.d_out);
        c.dropout = j.value("dropout", c.dropout);
        return std::make_unique<TransformerModel>(c);
    }
    if (architecture == "fcnn") {
        FcnnConfig c;
        c.seq_len = j.value("seq_len", c.seq_len);
        c.d_model = j.value("d_model", c.d_model);
        c.d_hidden = j.value("d_hidden", c.d_hidden);
        c.d_out = j.value("d_out", c.d_out);
        return std::make_unique<FcnnModel>(c);
    }
    throw std::invalid_argument("make_model: unknown architecture " + architecture);
}

namespace {
constexpr char kMagic[8] = {'C', 'O', 'H', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_checkpoint: truncated file");
    return v;
}

void put_string(std::ofstream& out, const std::string& s) {
    put(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
    const uint32_t len = get<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("load_checkpoint: truncated file");
    return s;
}
}  // namespace

void save_checkpoint(const Model& model, const CheckpointMeta& meta, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put_string(out, model.architecture());

    json blob;
    blob["config"] = json::parse(model.config_string());
    blob["meta"] = {{"epochs", meta.epochs},
                    {"best_epoch", meta.best_epoch},
                    {"final_loss", meta.final_loss},
                    {"seed", meta.seed},
                    {"dataset_hash", meta.dataset_hash},
                    {"window_n", meta.window_n},
                    {"normalization", meta.normalization}};
    put_string(out, blob.dump());

    put(out, static_cast<uint64_t>(model.parameters().size()));
    for (const auto& [name, t] : model.parameters()) {
        put_string(out, name);
        put(out, static_cast<uint32_t>(t->shape.size()));
        for (size_t d : t->shape) put(out, static_cast<uint64_t>(d));
        out.write(reinterpret_cast<const char*>(t->value.data()),
                  static_cast<std::streamsize>(t->value.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    if (get<uint32_t>(in) != kVersion)
        throw std::runtime_error("load_checkpoint: unsupported version in " + path);

    const std::string arch = get_string(in);
    const json blob = json::parse(get_string(in));

    LoadedCheckpoint ck;
    ck.model = make_model(arch, blob.at("config").dump());
    const json& m = blob.at("meta");
    ck.meta.epochs = m.value("epochs", 0);
    ck.meta.best_epoch = m.value("best_epoch", 0);
    ck.meta.final_loss = m.value("final_loss", 0.0);
    ck.meta.seed = m.value("seed", uint64_t{0});
    ck.meta.dataset_hash = m.value("dataset_hash", uint64_t{0});
    ck.meta.window_n = m.value("window_n", 0);
    ck.meta.normalization = m.value("normalization", 1.0);

    const uint64_t n_tensors = get<uint64_t>(in);
    auto& params = ck.model->parameters();
    if (n_tensors != params.size())
        throw std::runtime_error("load_checkpoint: tensor count mismatch in " + path);
    for (uint64_t i = 0; i < n_tensors; ++i) {
        const std::string name = get_string(in);
        const uint32_t rank = get<uint32_t>(in);
        std::vector<size_t> shape(rank);
        for (auto& d : shape) d = static_cast<size_t>(get<uint64_t>(in));
        if (name != params[i].first || shape != params[i].second->shape)
            throw std::runtime_error("load_checkpoint: tensor " + name +
                                     " does not match model layout");
        in.read(reinterpret_cast<char*>(params[i].second->value.data()),
                static_cast<std::streamsize>(params[i].second->value.size() * sizeof(double)));
        if (!in) throw std::runtime_error("load_checkpoint: truncated file");
    }
    return ck;
}

}  // namespace cohlab::nn
