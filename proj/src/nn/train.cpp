// SPDX-License-Identifier: Apache-2.0

#include "cohlab/nn/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cohlab::nn {

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, long t, double lr, double beta1,
                 double beta2, double eps) {
    if (param.size() != grad.size() || param.size() != m.size() || param.size() != v.size())
        throw std::invalid_argument("adam_update: state size mismatch");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < param.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

void adam_step(Model& model, AdamState& state, const TrainConfig& cfg) {
    auto& params = model.parameters();
    if (state.m.size() != params.size()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].second->size(), 0.0);
            state.v[i].assign(params[i].second->size(), 0.0);
        }
    }
    ++state.t;
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i].second;
        p->ensure_grad();
        adam_update(p->value, p->grad, state.m[i], state.v[i], state.t, cfg.learning_rate,
                    cfg.beta1, cfg.beta2, cfg.eps);
    }
}

Tensor batch_tokens(const TokenDataset& ds, const std::vector<size_t>& order, size_t first,
                    size_t count) {
    const size_t seq = 2 * (2 * static_cast<size_t>(ds.n) + 1);
    Tensor x = make_tensor({count, seq, 32});
    double* dst = x->value.data();
    for (size_t i = 0; i < count; ++i) {
        const TokenSequence& s = ds.sequences[order[first + i]];
        for (size_t tk = 0; tk < seq; ++tk) {
            const auto f = unpack_bits(s.tokens[tk]);
            for (int b = 0; b < 32; ++b) *dst++ = f[b];
        }
    }
    return x;
}

Tensor batch_targets(const TokenDataset& ds, const std::vector<size_t>& order, size_t first,
                     size_t count) {
    Tensor t = make_tensor({count, 2});
    for (size_t i = 0; i < count; ++i) {
        const TokenSequence& s = ds.sequences[order[first + i]];
        t->value[2 * i] = s.target_i;
        t->value[2 * i + 1] = s.target_q;
    }
    return t;
}

TrainResult train(Model& model, const TokenDataset& ds, const TrainConfig& cfg) {
    const size_t count = ds.sequences.size();
    if (count == 0) throw std::invalid_argument("train: empty dataset");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    const int seq = 2 * (2 * ds.n + 1);
    if (seq != model.seq_len())
        throw std::invalid_argument("train: dataset window n=" + std::to_string(ds.n) +
                                    " gives " + std::to_string(seq) + " tokens, model expects " +
                                    std::to_string(model.seq_len()));

    auto& params = model.parameters();
    AdamState state;
    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(params.size());

    std::vector<size_t> order(count);
    uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = 0; i < count; ++i) order[i] = i;
        std::mt19937_64 eng(derive_seed(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
        for (size_t i = count; i > 1; --i) std::swap(order[i - 1], order[eng() % i]);

        double epoch_loss = 0.0;
        for (size_t start = 0; start < count; start += cfg.batch_size) {
            const size_t b = std::min(cfg.batch_size, count - start);
            Tensor x = batch_tokens(ds, order, start, b);
            Tensor t = batch_targets(ds, order, start, b);
            GaussianSampler drop_rng(derive_seed(cfg.seed, "dropout", step));
            Tensor loss = mse_loss(model.forward(x, true, drop_rng), t);
            const double lv = loss->value[0];
            if (!std::isfinite(lv))
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(step));
            epoch_loss += lv * static_cast<double>(b);
            for (auto& [name, p] : params) p->grad.assign(p->value.size(), 0.0);
            backward(loss);
            adam_step(model, state, cfg);
            ++step;
        }
        epoch_loss /= static_cast<double>(count);
        result.loss_history.push_back(epoch_loss);
        if (epoch_loss < result.best_loss) {
            result.best_loss = epoch_loss;
            result.best_epoch = epoch;
            for (size_t i = 0; i < params.size(); ++i) best[i] = params[i].second->value;
        }
    }
    for (size_t i = 0; i < params.size(); ++i) params[i].second->value = std::move(best[i]);
    return result;
}

SymbolFrame equalize(Model& model, const SymbolFrame& rx, int n, double normalization) {
    if (n < 0) throw std::invalid_argument("equalize: n must be >= 0");
    if (!(normalization > 0.0)) throw std::invalid_argument("equalize: normalization must be > 0");
    const size_t len = rx.size();
    if (len <= 2 * static_cast<size_t>(n))
        throw std::invalid_argument("equalize: frame shorter than window");
    const size_t seq = 2 * (2 * static_cast<size_t>(n) + 1);
    if (static_cast<int>(seq) != model.seq_len())
        throw std::invalid_argument("equalize: window does not match model sequence length");

    SymbolFrame out = rx;
    const size_t n_centers = len - 2 * static_cast<size_t>(n);
    const size_t chunk = 1024;
    GaussianSampler unused_rng(0);
    for (size_t first = 0; first < n_centers; first += chunk) {
        const size_t b = std::min(chunk, n_centers - first);
        Tensor x = make_tensor({b, seq, 32});
        double* dst = x->value.data();
        for (size_t i = 0; i < b; ++i) {
            const size_t t = first + i + static_cast<size_t>(n);
            for (int d = -n; d <= n; ++d) {
                const cdouble v = rx.symbols[t + d] / normalization;
                for (const double f : float_to_bits(v.real())) *dst++ = f;
                for (const double f : float_to_bits(v.imag())) *dst++ = f;
            }
        }
        Tensor y = model.forward(x, false, unused_rng);
        for (size_t i = 0; i < b; ++i)
            out.symbols[first + i + n] = cdouble(y->value[2 * i], y->value[2 * i + 1]);
    }
    return out;
}

}  // namespace cohlab::nn
