// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "mixsent/tensor.hpp"

namespace mixsent {

// Dense ops used by the encoder. Each op validates shapes, guarantees a
// finite result, and has an analytic gradient counterpart checked against
// finite differences (see grad_check).

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

// Gradient contract: da = dc . b^T, db = a^T . dc. Accumulates into da/db.
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor& da, Tensor& db);

// Softmax over the last axis, max-subtracted for stability.
Tensor softmax(const Tensor& x);

// dx = p * (dp - sum(dp * p)) per slice, where p = softmax(x).
Tensor softmax_backward(const Tensor& probs, const Tensor& dprobs);

// Per-position standardization over the last axis, then affine with
// gamma/beta (both 1-D of that axis length).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-12);

// Analytic layer-norm gradient; accumulates into dgamma/dbeta, returns dx.
Tensor layer_norm_backward(const Tensor& x, const Tensor& gamma, double eps, const Tensor& dy,
                           Tensor& dgamma, Tensor& dbeta);

// Exact Gaussian-CDF form: x * Phi(x).
Tensor gelu(const Tensor& x);

// dy/dx = Phi(x) + x * phi(x)
Tensor gelu_backward(const Tensor& x, const Tensor& dy);

double gelu_scalar(double x);
double gelu_grad_scalar(double x);

// Mean over batch rows of -log softmax(logits)[target].
double cross_entropy(const Tensor& logits, std::span<const int> targets);

// (softmax - one_hot) / batch
Tensor cross_entropy_grad(const Tensor& logits, std::span<const int> targets);

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

// Central finite differences against an analytic gradient.
// Relative error per coordinate: |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
// `point` is perturbed in place and restored before returning.
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<double> point, std::span<const double> analytic,
                           double step = 1e-5);

}  // namespace mixsent
