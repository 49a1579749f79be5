// SPDX-License-Identifier: Apache-2.0

#include "cohlab/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace cohlab::nn {

size_t shape_size(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<size_t>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor make_tensor(std::vector<size_t> shape) {
    auto t = std::make_shared<TensorData>();
    t->value.assign(shape_size(shape), 0.0);
    t->shape = std::move(shape);
    return t;
}

Tensor make_tensor(std::vector<size_t> shape, std::vector<double> value) {
    if (shape_size(shape) != value.size())
        throw std::invalid_argument("make_tensor: " + std::to_string(value.size()) +
                                    " values for shape " + shape_str(shape));
    auto t = std::make_shared<TensorData>();
    t->shape = std::move(shape);
    t->value = std::move(value);
    return t;
}

namespace {

// The accumulator pointer never aliases the inputs at any call site (outputs
// and gradients are distinct buffers); stating it lets the inner loops
// vectorize without changing the per-element operation order.

// C[m,n] += A[m,k] * B[k,n]
void kernel_nn(const double* a, const double* b, double* __restrict__ c, size_t m, size_t k,
               size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* __restrict__ crow = c + i * n;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m,k] += A[m,n] * B[k,n]^T
void kernel_nt(const double* a, const double* b, double* __restrict__ c, size_t m, size_t n,
               size_t k) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* __restrict__ crow = c + i * k;
        for (size_t p = 0; p < k; ++p) {
            const double* brow = b + p * n;
            double acc = 0.0;
            for (size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
            crow[p] += acc;
        }
    }
}

// C[k,n] += A[m,k]^T * B[m,n]
void kernel_tn(const double* a, const double* b, double* __restrict__ c, size_t m, size_t k,
               size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            double* __restrict__ crow = c + p * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

bool is_suffix(const std::vector<size_t>& tail, const std::vector<size_t>& full) {
    if (tail.size() > full.size()) return false;
    return std::equal(tail.rbegin(), tail.rend(), full.rbegin());
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    if (!is_suffix(b->shape, a->shape))
        throw std::invalid_argument("add: shape " + shape_str(b->shape) +
                                    " is not a suffix of " + shape_str(a->shape));
    const size_t bs = b->size();
    const size_t total = a->size();
    const size_t rows = total / bs;
    auto out = make_tensor(a->shape);
    for (size_t r = 0; r < rows; ++r) {
        const double* arow = a->value.data() + r * bs;
        const double* brow = b->value.data();
        double* __restrict__ orow = out->value.data() + r * bs;
        for (size_t j = 0; j < bs; ++j) orow[j] = arow[j] + brow[j];
    }
    out->parents = {a, b};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    TensorData* pb = b.get();
    out->backward_fn = [o, pa, pb, bs, rows]() {
        pa->ensure_grad();
        pb->ensure_grad();
        // two passes so the accumulators never alias (covers add(x, x))
        for (size_t r = 0; r < rows; ++r) {
            const double* grow = o->grad.data() + r * bs;
            double* __restrict__ garow = pa->grad.data() + r * bs;
            for (size_t j = 0; j < bs; ++j) garow[j] += grow[j];
        }
        for (size_t r = 0; r < rows; ++r) {
            const double* grow = o->grad.data() + r * bs;
            double* __restrict__ gbrow = pb->grad.data();
            for (size_t j = 0; j < bs; ++j) gbrow[j] += grow[j];
        }
    };
    return out;
}

Tensor scale(const Tensor& a, double c) {
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < a->size(); ++i) out->value[i] = c * a->value[i];
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa, c]() {
        pa->ensure_grad();
        for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += c * o->grad[i];
    };
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a->shape) +
                                    " x " + shape_str(b->shape));
    const size_t m = a->shape[0], k = a->shape[1], n = b->shape[1];
    auto out = make_tensor({m, n});
    kernel_nn(a->value.data(), b->value.data(), out->value.data(), m, k, n);
    out->parents = {a, b};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    TensorData* pb = b.get();
    out->backward_fn = [o, pa, pb, m, k, n]() {
        pa->ensure_grad();
        pb->ensure_grad();
        kernel_nt(o->grad.data(), pb->value.data(), pa->grad.data(), m, n, k);
        kernel_tn(pa->value.data(), o->grad.data(), pb->grad.data(), m, k, n);
    };
    return out;
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    if (a->shape.size() != 3 || b->shape.size() != 3 || a->shape[0] != b->shape[0] ||
        a->shape[2] != b->shape[1])
        throw std::invalid_argument("bmm: incompatible shapes " + shape_str(a->shape) + " x " +
                                    shape_str(b->shape));
    const size_t batch = a->shape[0], m = a->shape[1], k = a->shape[2], n = b->shape[2];
    auto out = make_tensor({batch, m, n});
    for (size_t i = 0; i < batch; ++i)
        kernel_nn(a->value.data() + i * m * k, b->value.data() + i * k * n,
                  out->value.data() + i * m * n, m, k, n);
    out->parents = {a, b};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    TensorData* pb = b.get();
    out->backward_fn = [o, pa, pb, batch, m, k, n]() {
        pa->ensure_grad();
        pb->ensure_grad();
        for (size_t i = 0; i < batch; ++i) {
            kernel_nt(o->grad.data() + i * m * n, pb->value.data() + i * k * n,
                      pa->grad.data() + i * m * k, m, n, k);
            kernel_tn(pa->value.data() + i * m * k, o->grad.data() + i * m * n,
                      pb->grad.data() + i * k * n, m, k, n);
        }
    };
    return out;
}

Tensor relu(const Tensor& a) {
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < a->size(); ++i) out->value[i] = a->value[i] > 0.0 ? a->value[i] : 0.0;
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa]() {
        pa->ensure_grad();
        for (size_t i = 0; i < pa->grad.size(); ++i)
            if (pa->value[i] > 0.0) pa->grad[i] += o->grad[i];
    };
    return out;
}

Tensor softmax_lastdim(const Tensor& a) {
    if (a->shape.empty()) throw std::invalid_argument("softmax: scalar input");
    const size_t cols = a->shape.back();
    const size_t rows = a->size() / cols;
    auto out = make_tensor(a->shape);
    for (size_t r = 0; r < rows; ++r) {
        const double* x = a->value.data() + r * cols;
        double* y = out->value.data() + r * cols;
        double mx = x[0];
        for (size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (size_t j = 0; j < cols; ++j) y[j] /= sum;
    }
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa, rows, cols]() {
        pa->ensure_grad();
        for (size_t r = 0; r < rows; ++r) {
            const double* y = o->value.data() + r * cols;
            const double* g = o->grad.data() + r * cols;
            double* gx = pa->grad.data() + r * cols;
            double dot = 0.0;
            for (size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
            for (size_t j = 0; j < cols; ++j) gx[j] += y[j] * (g[j] - dot);
        }
    };
    return out;
}

Tensor layer_norm_lastdim(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
    if (a->shape.empty()) throw std::invalid_argument("layer_norm: scalar input");
    const size_t cols = a->shape.back();
    if (gain->size() != cols || bias->size() != cols)
        throw std::invalid_argument("layer_norm: gain/bias size must equal last dim " +
                                    std::to_string(cols));
    const size_t rows = a->size() / cols;
    auto out = make_tensor(a->shape);
    // per-row inverse standard deviation, kept for the backward pass
    auto inv_std = std::make_shared<std::vector<double>>(rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* x = a->value.data() + r * cols;
        double* y = out->value.data() + r * cols;
        double mean = 0.0;
        for (size_t j = 0; j < cols; ++j) mean += x[j];
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (size_t j = 0; j < cols; ++j) var += (x[j] - mean) * (x[j] - mean);
        var /= static_cast<double>(cols);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = is;
        for (size_t j = 0; j < cols; ++j)
            y[j] = gain->value[j] * (x[j] - mean) * is + bias->value[j];
    }
    out->parents = {a, gain, bias};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    TensorData* pg = gain.get();
    TensorData* pb = bias.get();
    out->backward_fn = [o, pa, pg, pb, rows, cols, inv_std]() {
        pa->ensure_grad();
        pg->ensure_grad();
        pb->ensure_grad();
        const double nc = static_cast<double>(cols);
        for (size_t r = 0; r < rows; ++r) {
            const double* x = pa->value.data() + r * cols;
            const double* g = o->grad.data() + r * cols;
            double* gx = pa->grad.data() + r * cols;
            const double is = (*inv_std)[r];
            double mean = 0.0;
            for (size_t j = 0; j < cols; ++j) mean += x[j];
            mean /= nc;
            // accumulate the two row sums the gradient needs
            double sum_gh = 0.0, sum_ghx = 0.0;
            for (size_t j = 0; j < cols; ++j) {
                const double gh = g[j] * pg->value[j];
                const double xh = (x[j] - mean) * is;
                sum_gh += gh;
                sum_ghx += gh * xh;
                pg->grad[j] += g[j] * xh;
                pb->grad[j] += g[j];
            }
            for (size_t j = 0; j < cols; ++j) {
                const double gh = g[j] * pg->value[j];
                const double xh = (x[j] - mean) * is;
                gx[j] += is * (gh - sum_gh / nc - xh * sum_ghx / nc);
            }
        }
    };
    return out;
}

Tensor dropout(const Tensor& a, double p, bool training, GaussianSampler& rng) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0, 1)");
    if (!training || p == 0.0) return a;
    const double keep_scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<uint8_t>>(a->size());
    auto out = make_tensor(a->shape);
    for (size_t i = 0; i < a->size(); ++i) {
        const bool keep = rng.uniform() > p;
        (*mask)[i] = keep;
        out->value[i] = keep ? a->value[i] * keep_scale : 0.0;
    }
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa, mask, keep_scale]() {
        pa->ensure_grad();
        for (size_t i = 0; i < pa->grad.size(); ++i)
            if ((*mask)[i]) pa->grad[i] += o->grad[i] * keep_scale;
    };
    return out;
}

Tensor reshape(const Tensor& a, std::vector<size_t> new_shape) {
    if (shape_size(new_shape) != a->size())
        throw std::invalid_argument("reshape: " + shape_str(a->shape) + " to " +
                                    shape_str(new_shape) + " changes element count");
    auto out = make_tensor(std::move(new_shape), a->value);
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa]() {
        pa->ensure_grad();
        for (size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += o->grad[i];
    };
    return out;
}

Tensor permute(const Tensor& a, const std::vector<size_t>& perm) {
    const size_t rank = a->shape.size();
    if (perm.size() != rank) throw std::invalid_argument("permute: rank mismatch");
    std::vector<bool> seen(rank, false);
    for (size_t ax : perm) {
        if (ax >= rank || seen[ax]) throw std::invalid_argument("permute: invalid permutation");
        seen[ax] = true;
    }
    std::vector<size_t> in_strides(rank, 1);
    for (size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * a->shape[i];
    std::vector<size_t> out_shape(rank);
    for (size_t i = 0; i < rank; ++i) out_shape[i] = a->shape[perm[i]];

    auto out = make_tensor(out_shape);
    auto src_index = std::make_shared<std::vector<size_t>>(a->size());
    std::vector<size_t> idx(rank, 0);
    for (size_t j = 0; j < out->size(); ++j) {
        size_t src = 0;
        for (size_t i = 0; i < rank; ++i) src += idx[i] * in_strides[perm[i]];
        (*src_index)[j] = src;
        out->value[j] = a->value[src];
        for (size_t i = rank; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    out->parents = {a};
    TensorData* o = out.get();
    TensorData* pa = a.get();
    out->backward_fn = [o, pa, src_index]() {
        pa->ensure_grad();
        for (size_t j = 0; j < o->grad.size(); ++j) pa->grad[(*src_index)[j]] += o->grad[j];
    };
    return out;
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred->shape != target->shape)
        throw std::invalid_argument("mse_loss: shapes " + shape_str(pred->shape) + " and " +
                                    shape_str(target->shape) + " differ");
    const size_t n = pred->size();
    if (n == 0) throw std::invalid_argument("mse_loss: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = pred->value[i] - target->value[i];
        acc += d * d;
    }
    auto out = make_tensor({1}, {acc / static_cast<double>(n)});
    out->parents = {pred, target};
    TensorData* o = out.get();
    TensorData* pp = pred.get();
    TensorData* pt = target.get();
    out->backward_fn = [o, pp, pt, n]() {
        pp->ensure_grad();
        pt->ensure_grad();
        const double s = 2.0 / static_cast<double>(n) * o->grad[0];
        for (size_t i = 0; i < n; ++i) {
            const double d = pp->value[i] - pt->value[i];
            pp->grad[i] += s * d;
            pt->grad[i] -= s * d;
        }
    };
    return out;
}

void backward(const Tensor& root) {
    if (root->size() != 1) throw std::invalid_argument("backward: root must be scalar");
    // iterative post-order DFS; children end up after their parents, so the
    // reverse walk below visits every node before the nodes it feeds
    std::vector<TensorData*> order;
    std::unordered_set<TensorData*> visited;
    std::vector<std::pair<TensorData*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorData* parent = node->parents[next++].get();
            if (visited.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn();
}

}  // namespace cohlab::nn
