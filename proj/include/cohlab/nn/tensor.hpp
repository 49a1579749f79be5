// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode autodiff. Ops evaluate eagerly and record a backward
// closure; backward() walks the graph in reverse topological order and
// accumulates exact analytic gradients. Everything is double precision and
// single threaded per graph.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cohlab/rng.hpp"

namespace cohlab::nn {

struct TensorData;
using Tensor = std::shared_ptr<TensorData>;

struct TensorData {
    std::vector<size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated on demand, same length as value
    std::vector<Tensor> parents;
    std::function<void()> backward_fn;  // adds this node's grad into parents
    size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

size_t shape_size(const std::vector<size_t>& shape);
std::string shape_str(const std::vector<size_t>& shape);

// Leaf tensors (no parents). Values zero-filled or taken from the argument.
Tensor make_tensor(std::vector<size_t> shape);
Tensor make_tensor(std::vector<size_t> shape, std::vector<double> value);

// a + b where b's shape equals a's or is a trailing suffix of it (the suffix
// is broadcast over the leading dimensions; used for bias and positional
// encoding adds).
Tensor add(const Tensor& a, const Tensor& b);

// c * a for a plain double constant.
Tensor scale(const Tensor& a, double c);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// [B,m,k] x [B,k,n] -> [B,m,n]
Tensor bmm(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& a);

// Softmax over the last dimension, numerically stabilized per row.
Tensor softmax_lastdim(const Tensor& a);

// Per-row normalization over the last dimension (population variance), then
// elementwise gain and bias (both shaped like the last dimension).
Tensor layer_norm_lastdim(const Tensor& a, const Tensor& gain, const Tensor& bias,
                          double eps = 1e-8);

// Inverted dropout: keeps each activation with probability 1-p and scales
// survivors by 1/(1-p). With training=false (or p=0) the input node is
// returned unchanged, so evaluation mode is an exact identity.
Tensor dropout(const Tensor& a, double p, bool training, GaussianSampler& rng);

Tensor reshape(const Tensor& a, std::vector<size_t> new_shape);

// Axis permutation (generalized transpose); perm must be a permutation of
// 0..rank-1 and gives, for each output axis, the source axis.
Tensor permute(const Tensor& a, const std::vector<size_t>& perm);

// Mean of squared differences over all elements; scalar output.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// Reverse pass from a scalar root: seeds d(root)/d(root) = 1 and runs every
// recorded backward closure exactly once, children before parents.
void backward(const Tensor& root);

}  // namespace cohlab::nn
