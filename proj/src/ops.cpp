// SPDX-License-Identifier: Apache-2.0
#include "mixsent/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mixsent {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

CMapMat map2d(const Tensor& t) {
    return CMapMat(t.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

MapMat map2d(Tensor& t) {
    return MapMat(t.data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

std::size_t last_dim(const Tensor& t) {
    if (t.rank() == 0 || t.shape().back() == 0) {
        throw ShapeMismatch("operation requires a non-empty last axis");
    }
    return t.shape().back();
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeMismatch("matmul: expected 2-D operands, got " + shape_str(a) + " and " +
                            shape_str(b));
    }
    if (a.cols() != b.rows()) {
        throw ShapeMismatch("matmul: inner dimensions disagree: " + shape_str(a) + " x " +
                            shape_str(b));
    }
    Tensor c({a.rows(), b.cols()}, 0.0);
    map2d(c).noalias() = map2d(a) * map2d(b);
    require_finite(c, "matmul");
    return c;
}

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor& da, Tensor& db) {
    if (dc.rank() != 2 || dc.rows() != a.rows() || dc.cols() != b.cols()) {
        throw ShapeMismatch("matmul_backward: dc has shape " + shape_str(dc));
    }
    if (!da.same_shape(a) || !db.same_shape(b)) {
        throw ShapeMismatch("matmul_backward: gradient accumulators mismatch operands");
    }
    map2d(da).noalias() += map2d(dc) * map2d(b).transpose();
    map2d(db).noalias() += map2d(a).transpose() * map2d(dc);
}

Tensor softmax(const Tensor& x) {
    const std::size_t n = last_dim(x);
    Tensor out(x.shape(), 0.0);
    const std::size_t slices = x.numel() / n;
    for (std::size_t s = 0; s < slices; ++s) {
        const double* in = x.data() + s * n;
        double* o = out.data() + s * n;
        double m = in[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, in[i]);
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            o[i] = std::exp(in[i] - m);
            denom += o[i];
        }
        for (std::size_t i = 0; i < n; ++i) o[i] /= denom;
    }
    require_finite(out, "softmax");
    return out;
}

Tensor softmax_backward(const Tensor& probs, const Tensor& dprobs) {
    if (!probs.same_shape(dprobs)) {
        throw ShapeMismatch("softmax_backward: shape mismatch");
    }
    const std::size_t n = last_dim(probs);
    Tensor dx(probs.shape(), 0.0);
    const std::size_t slices = probs.numel() / n;
    for (std::size_t s = 0; s < slices; ++s) {
        const double* p = probs.data() + s * n;
        const double* dp = dprobs.data() + s * n;
        double* o = dx.data() + s * n;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += dp[i] * p[i];
        for (std::size_t i = 0; i < n; ++i) o[i] = p[i] * (dp[i] - dot);
    }
    return dx;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t n = last_dim(x);
    if (gamma.numel() != n || beta.numel() != n) {
        throw ShapeMismatch("layer_norm: gamma/beta do not match last dimension");
    }
    if (!(eps > 0.0)) {
        throw ShapeMismatch("layer_norm: eps must be positive");
    }
    Tensor out(x.shape(), 0.0);
    const std::size_t slices = x.numel() / n;
    for (std::size_t s = 0; s < slices; ++s) {
        const double* in = x.data() + s * n;
        double* o = out.data() + s * n;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += in[i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = in[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double rstd = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < n; ++i) {
            o[i] = (in[i] - mean) * rstd * gamma[i] + beta[i];
        }
    }
    require_finite(out, "layer_norm");
    return out;
}

Tensor layer_norm_backward(const Tensor& x, const Tensor& gamma, double eps, const Tensor& dy,
                           Tensor& dgamma, Tensor& dbeta) {
    const std::size_t n = last_dim(x);
    if (!x.same_shape(dy) || gamma.numel() != n || dgamma.numel() != n || dbeta.numel() != n) {
        throw ShapeMismatch("layer_norm_backward: shape mismatch");
    }
    Tensor dx(x.shape(), 0.0);
    const std::size_t slices = x.numel() / n;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < slices; ++s) {
        const double* in = x.data() + s * n;
        const double* dyp = dy.data() + s * n;
        double* o = dx.data() + s * n;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += in[i];
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = in[i] - mean;
            var += d * d;
        }
        var *= inv_n;
        const double rstd = 1.0 / std::sqrt(var + eps);
        // dxhat_i = dy_i * gamma_i; dx = rstd * (dxhat - mean(dxhat) - xhat * mean(dxhat*xhat))
        double mean_dxhat = 0.0;
        double mean_dxhat_xhat = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double xhat = (in[i] - mean) * rstd;
            const double dxhat = dyp[i] * gamma[i];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat;
            dgamma[i] += dyp[i] * xhat;
            dbeta[i] += dyp[i];
        }
        mean_dxhat *= inv_n;
        mean_dxhat_xhat *= inv_n;
        for (std::size_t i = 0; i < n; ++i) {
            const double xhat = (in[i] - mean) * rstd;
            const double dxhat = dyp[i] * gamma[i];
            o[i] = rstd * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
        }
    }
    return dx;
}

double gelu_scalar(double x) {
    // x * Phi(x) with Phi the standard normal CDF
    return x * 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
}

double gelu_grad_scalar(double x) {
    const double phi_cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double phi_pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return phi_cdf + x * phi_pdf;
}

Tensor gelu(const Tensor& x) {
    Tensor out(x.shape(), 0.0);
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = gelu_scalar(x[i]);
    require_finite(out, "gelu");
    return out;
}

Tensor gelu_backward(const Tensor& x, const Tensor& dy) {
    if (!x.same_shape(dy)) throw ShapeMismatch("gelu_backward: shape mismatch");
    Tensor dx(x.shape(), 0.0);
    for (std::size_t i = 0; i < x.numel(); ++i) dx[i] = dy[i] * gelu_grad_scalar(x[i]);
    return dx;
}

double cross_entropy(const Tensor& logits, std::span<const int> targets) {
    if (logits.rank() != 2) throw ShapeMismatch("cross_entropy: expected 2-D logits");
    const std::size_t b = logits.rows();
    const std::size_t k = logits.cols();
    if (b == 0 || targets.size() != b) {
        throw ShapeMismatch("cross_entropy: batch/target length mismatch");
    }
    double total = 0.0;
    for (std::size_t r = 0; r < b; ++r) {
        const int t = targets[r];
        if (t < 0 || static_cast<std::size_t>(t) >= k) {
            throw IndexOutOfRange("cross_entropy: target " + std::to_string(t) +
                                  " outside [0," + std::to_string(k) + ")");
        }
        const double* row = logits.data() + r * k;
        double m = row[0];
        for (std::size_t i = 1; i < k; ++i) m = std::max(m, row[i]);
        double denom = 0.0;
        for (std::size_t i = 0; i < k; ++i) denom += std::exp(row[i] - m);
        total += m + std::log(denom) - row[static_cast<std::size_t>(t)];
    }
    const double loss = total / static_cast<double>(b);
    if (!std::isfinite(loss)) throw NonFiniteValue("cross_entropy: non-finite loss");
    return loss;
}

Tensor cross_entropy_grad(const Tensor& logits, std::span<const int> targets) {
    const std::size_t b = logits.rows();
    const std::size_t k = logits.cols();
    if (b == 0 || targets.size() != b) {
        throw ShapeMismatch("cross_entropy_grad: batch/target length mismatch");
    }
    Tensor grad = softmax(logits);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t r = 0; r < b; ++r) {
        const int t = targets[r];
        if (t < 0 || static_cast<std::size_t>(t) >= k) {
            throw IndexOutOfRange("cross_entropy_grad: target out of range");
        }
        grad[r * k + static_cast<std::size_t>(t)] -= 1.0;
        for (std::size_t i = 0; i < k; ++i) grad[r * k + i] *= inv_b;
    }
    return grad;
}

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<double> point, std::span<const double> analytic,
                           double step) {
    if (point.size() != analytic.size()) {
        throw ShapeMismatch("grad_check: point/gradient length mismatch");
    }
    GradCheckReport report;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + step;
        const double fp = f(point);
        point[i] = saved - step;
        const double fm = f(point);
        point[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NonFiniteValue("grad_check: non-finite function value");
        }
        const double numeric = (fp - fm) / (2.0 * step);
        const double ga = analytic[i];
        const double denom = std::max({std::abs(ga), std::abs(numeric), 1e-8});
        const double rel = std::abs(ga - numeric) / denom;
        if (rel > report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_index = i;
            report.analytic_at_worst = ga;
            report.numeric_at_worst = numeric;
        }
    }
    return report;
}

}  // namespace mixsent
