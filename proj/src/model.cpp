// SPDX-License-Identifier: Apache-2.0
#include "mixsent/model.hpp"

#include <Eigen/Core>
#include <zlib.h>

#include <cmath>
#include <limits>

#include "mixsent/ops.hpp"
#include "mixsent/rng.hpp"

namespace mixsent {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

constexpr double kLnEps = 1e-12;

// parameter storage layout
constexpr std::size_t kTok = 0;
constexpr std::size_t kPos = 1;
constexpr std::size_t kLayerBase = 2;
constexpr std::size_t kPerLayer = 16;
enum LayerParam : std::size_t {
    kWq = 0, kBq, kWk, kBk, kWv, kBv, kWo, kBo,
    kG1, kBe1, kW1, kB1, kW2, kB2, kG2, kBe2,
};

std::size_t head_weight_index(const ModelConfig& cfg) {
    return kLayerBase + static_cast<std::size_t>(cfg.n_layers) * kPerLayer;
}

CMatMap mat(const Parameter& p) {
    return CMatMap(p.value.data(), static_cast<Eigen::Index>(p.value.dim(0)),
                   static_cast<Eigen::Index>(p.value.dim(1)));
}

MatMap gmat(Parameter& p) {
    return MatMap(p.grad.data(), static_cast<Eigen::Index>(p.value.dim(0)),
                  static_cast<Eigen::Index>(p.value.dim(1)));
}

CVecMap vec(const Parameter& p) {
    return CVecMap(p.value.data(), static_cast<Eigen::Index>(p.value.numel()));
}

VecMap gvec(Parameter& p) {
    return VecMap(p.grad.data(), static_cast<Eigen::Index>(p.value.numel()));
}

void apply_dropout(RowMat& x, std::vector<std::uint8_t>& mask, double p, Rng& rng) {
    mask.resize(static_cast<std::size_t>(x.size()));
    const double scale = 1.0 / (1.0 - p);
    double* d = x.data();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool keep = rng.uniform() >= p;
        mask[static_cast<std::size_t>(i)] = keep ? 1 : 0;
        d[i] = keep ? d[i] * scale : 0.0;
    }
}

void dropout_backward(RowMat& dy, const std::vector<std::uint8_t>& mask, double p) {
    const double scale = 1.0 / (1.0 - p);
    double* d = dy.data();
    for (Eigen::Index i = 0; i < dy.size(); ++i) {
        d[i] = mask[static_cast<std::size_t>(i)] ? d[i] * scale : 0.0;
    }
}

void ln_forward(const RowMat& s, CVecMap gamma, CVecMap beta, RowMat& xhat,
                Eigen::VectorXd& rstd, RowMat& y) {
    const Eigen::Index rows = s.rows();
    const Eigen::Index cols = s.cols();
    xhat.resize(rows, cols);
    y.resize(rows, cols);
    rstd.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double mean = s.row(i).mean();
        const double var = (s.row(i).array() - mean).square().sum() / static_cast<double>(cols);
        const double r = 1.0 / std::sqrt(var + kLnEps);
        rstd(i) = r;
        xhat.row(i) = (s.row(i).array() - mean) * r;
        y.row(i) = xhat.row(i).cwiseProduct(gamma.transpose()) + beta.transpose();
    }
}

RowMat ln_backward(const RowMat& xhat, const Eigen::VectorXd& rstd, CVecMap gamma,
                   const RowMat& dy, VecMap dgamma, VecMap dbeta) {
    const Eigen::Index rows = xhat.rows();
    const Eigen::Index cols = xhat.cols();
    RowMat dx(rows, cols);
    const double inv_cols = 1.0 / static_cast<double>(cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(gamma.transpose());
        const double m1 = dxhat.sum() * inv_cols;
        const double m2 = dxhat.cwiseProduct(xhat.row(i)).sum() * inv_cols;
        dx.row(i) = rstd(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2);
        dgamma += dy.row(i).cwiseProduct(xhat.row(i)).transpose();
        dbeta += dy.row(i).transpose();
    }
    return dx;
}

struct LayerTrace {
    RowMat x_in, q, k, v, ctx, x1, f_pre, f_act, x_out;
    RowMat xhat1, xhat2;
    Eigen::VectorXd rstd1, rstd2;
    std::vector<RowMat> att;  // per head, [L,L]; PAD-key columns are zero
    std::vector<std::uint8_t> drop_attn, drop_ff;
};

struct ExampleTrace {
    RowMat x0;
    std::vector<std::uint8_t> drop_emb;
    std::vector<LayerTrace> layers;
};

int effective_length(const ModelConfig& cfg, const std::vector<TokenSequence>& batch) {
    if (batch.empty()) throw ShapeMismatch("encoder: empty batch");
    std::size_t eff = 0;
    for (const auto& seq : batch) {
        if (seq.ids.size() != static_cast<std::size_t>(cfg.max_len) ||
            seq.attention_mask.size() != seq.ids.size()) {
            throw ShapeMismatch("encoder: sequence length does not match model max_len");
        }
        std::size_t real = 0;
        for (std::size_t t = 0; t < seq.ids.size(); ++t) {
            const int id = seq.ids[t];
            if (id < 0 || id >= cfg.vocab_size) {
                throw IdOutOfRange("encoder: token id " + std::to_string(id) +
                                   " outside [0," + std::to_string(cfg.vocab_size) + ")");
            }
            if (seq.attention_mask[t]) real = t + 1;
        }
        if (real == 0) throw ShapeMismatch("encoder: sequence has no real tokens");
        eff = std::max(eff, real);
    }
    return static_cast<int>(eff);
}

void encode_example(const ModelConfig& cfg, const std::vector<Parameter>& P,
                    const TokenSequence& seq, int eff_len, bool train, std::uint64_t ex_seed,
                    ExampleTrace& tr) {
    const int hidden = cfg.hidden;
    const int n_heads = cfg.n_heads;
    const int dh = hidden / n_heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    const double drop_p = cfg.dropout;
    const bool use_dropout = train && drop_p > 0.0;
    Rng rng(ex_seed);

    tr.x0.resize(eff_len, hidden);
    const auto tok = mat(P[kTok]);
    const auto pos = mat(P[kPos]);
    for (int t = 0; t < eff_len; ++t) {
        tr.x0.row(t) = tok.row(seq.ids[static_cast<std::size_t>(t)]) + pos.row(t);
    }
    if (use_dropout) apply_dropout(tr.x0, tr.drop_emb, drop_p, rng);

    tr.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    const RowMat* x = &tr.x0;
    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerTrace& lt = tr.layers[static_cast<std::size_t>(l)];
        const std::size_t base = kLayerBase + static_cast<std::size_t>(l) * kPerLayer;
        lt.x_in = *x;

        lt.q.noalias() = lt.x_in * mat(P[base + kWq]);
        lt.q.rowwise() += vec(P[base + kBq]).transpose();
        lt.k.noalias() = lt.x_in * mat(P[base + kWk]);
        lt.k.rowwise() += vec(P[base + kBk]).transpose();
        lt.v.noalias() = lt.x_in * mat(P[base + kWv]);
        lt.v.rowwise() += vec(P[base + kBv]).transpose();

        lt.att.resize(static_cast<std::size_t>(n_heads));
        lt.ctx.resize(eff_len, hidden);
        for (int h = 0; h < n_heads; ++h) {
            const auto qh = lt.q.middleCols(h * dh, dh);
            const auto kh = lt.k.middleCols(h * dh, dh);
            const auto vh = lt.v.middleCols(h * dh, dh);
            RowMat scores = qh * kh.transpose() * inv_sqrt_dh;
            RowMat& att = lt.att[static_cast<std::size_t>(h)];
            att = RowMat::Zero(eff_len, eff_len);
            // softmax over real keys only; PAD keys get exact zero weight
            for (int i = 0; i < eff_len; ++i) {
                double m = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < eff_len; ++j) {
                    if (seq.attention_mask[static_cast<std::size_t>(j)]) {
                        m = std::max(m, scores(i, j));
                    }
                }
                double denom = 0.0;
                for (int j = 0; j < eff_len; ++j) {
                    if (!seq.attention_mask[static_cast<std::size_t>(j)]) continue;
                    const double e = std::exp(scores(i, j) - m);
                    att(i, j) = e;
                    denom += e;
                }
                for (int j = 0; j < eff_len; ++j) att(i, j) /= denom;
            }
            lt.ctx.middleCols(h * dh, dh).noalias() = att * vh;
        }

        RowMat attn_out = lt.ctx * mat(P[base + kWo]);
        attn_out.rowwise() += vec(P[base + kBo]).transpose();
        if (use_dropout) apply_dropout(attn_out, lt.drop_attn, drop_p, rng);

        const RowMat s1 = lt.x_in + attn_out;
        ln_forward(s1, vec(P[base + kG1]), vec(P[base + kBe1]), lt.xhat1, lt.rstd1, lt.x1);

        lt.f_pre.noalias() = lt.x1 * mat(P[base + kW1]);
        lt.f_pre.rowwise() += vec(P[base + kB1]).transpose();
        lt.f_act = lt.f_pre.unaryExpr([](double v) { return gelu_scalar(v); });

        RowMat f_out = lt.f_act * mat(P[base + kW2]);
        f_out.rowwise() += vec(P[base + kB2]).transpose();
        if (use_dropout) apply_dropout(f_out, lt.drop_ff, drop_p, rng);

        const RowMat s2 = lt.x1 + f_out;
        ln_forward(s2, vec(P[base + kG2]), vec(P[base + kBe2]), lt.xhat2, lt.rstd2, lt.x_out);
        x = &lt.x_out;
    }
}

void backward_example(const ModelConfig& cfg, std::vector<Parameter>& P,
                      const TokenSequence& seq, int eff_len, bool train, const ExampleTrace& tr,
                      RowMat dx) {
    const int hidden = cfg.hidden;
    const int n_heads = cfg.n_heads;
    const int dh = hidden / n_heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    const double drop_p = cfg.dropout;
    const bool use_dropout = train && drop_p > 0.0;

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const LayerTrace& lt = tr.layers[static_cast<std::size_t>(l)];
        const std::size_t base = kLayerBase + static_cast<std::size_t>(l) * kPerLayer;

        // x_out = LN2(x1 + f_out)
        RowMat ds2 = ln_backward(lt.xhat2, lt.rstd2, vec(P[base + kG2]), dx,
                                 gvec(P[base + kG2]), gvec(P[base + kBe2]));
        RowMat df_out = ds2;
        if (use_dropout) dropout_backward(df_out, lt.drop_ff, drop_p);

        // f_out = gelu(x1 W1 + b1) W2 + b2
        gmat(P[base + kW2]).noalias() += lt.f_act.transpose() * df_out;
        gvec(P[base + kB2]) += df_out.colwise().sum().transpose();
        RowMat df_act = df_out * mat(P[base + kW2]).transpose();
        RowMat df_pre =
            df_act.cwiseProduct(lt.f_pre.unaryExpr([](double v) { return gelu_grad_scalar(v); }));
        gmat(P[base + kW1]).noalias() += lt.x1.transpose() * df_pre;
        gvec(P[base + kB1]) += df_pre.colwise().sum().transpose();

        RowMat dx1 = ds2;
        dx1.noalias() += df_pre * mat(P[base + kW1]).transpose();

        // x1 = LN1(x_in + attn_out)
        RowMat ds1 = ln_backward(lt.xhat1, lt.rstd1, vec(P[base + kG1]), dx1,
                                 gvec(P[base + kG1]), gvec(P[base + kBe1]));
        RowMat dattn_out = ds1;
        if (use_dropout) dropout_backward(dattn_out, lt.drop_attn, drop_p);

        // attn_out = ctx Wo + bo
        gmat(P[base + kWo]).noalias() += lt.ctx.transpose() * dattn_out;
        gvec(P[base + kBo]) += dattn_out.colwise().sum().transpose();
        RowMat dctx = dattn_out * mat(P[base + kWo]).transpose();

        RowMat dq = RowMat::Zero(eff_len, hidden);
        RowMat dk = RowMat::Zero(eff_len, hidden);
        RowMat dv = RowMat::Zero(eff_len, hidden);
        for (int h = 0; h < n_heads; ++h) {
            const auto qh = lt.q.middleCols(h * dh, dh);
            const auto kh = lt.k.middleCols(h * dh, dh);
            const auto vh = lt.v.middleCols(h * dh, dh);
            const auto dctx_h = dctx.middleCols(h * dh, dh);
            const RowMat& att = lt.att[static_cast<std::size_t>(h)];

            RowMat datt = dctx_h * vh.transpose();
            dv.middleCols(h * dh, dh).noalias() += att.transpose() * dctx_h;

            RowMat dscores = RowMat::Zero(eff_len, eff_len);
            for (int i = 0; i < eff_len; ++i) {
                double dot = 0.0;
                for (int j = 0; j < eff_len; ++j) dot += att(i, j) * datt(i, j);
                for (int j = 0; j < eff_len; ++j) {
                    if (!seq.attention_mask[static_cast<std::size_t>(j)]) continue;
                    dscores(i, j) = att(i, j) * (datt(i, j) - dot);
                }
            }
            dq.middleCols(h * dh, dh).noalias() += dscores * kh * inv_sqrt_dh;
            dk.middleCols(h * dh, dh).noalias() += dscores.transpose() * qh * inv_sqrt_dh;
        }

        gmat(P[base + kWq]).noalias() += lt.x_in.transpose() * dq;
        gvec(P[base + kBq]) += dq.colwise().sum().transpose();
        gmat(P[base + kWk]).noalias() += lt.x_in.transpose() * dk;
        gvec(P[base + kBk]) += dk.colwise().sum().transpose();
        gmat(P[base + kWv]).noalias() += lt.x_in.transpose() * dv;
        gvec(P[base + kBv]) += dv.colwise().sum().transpose();

        RowMat dx_in = ds1;
        dx_in.noalias() += dq * mat(P[base + kWq]).transpose();
        dx_in.noalias() += dk * mat(P[base + kWk]).transpose();
        dx_in.noalias() += dv * mat(P[base + kWv]).transpose();
        dx = std::move(dx_in);
    }

    if (use_dropout) dropout_backward(dx, tr.drop_emb, drop_p);
    MatMap gtok = gmat(P[kTok]);
    MatMap gpos = gmat(P[kPos]);
    for (int t = 0; t < eff_len; ++t) {
        gtok.row(seq.ids[static_cast<std::size_t>(t)]) += dx.row(t);
        gpos.row(t) += dx.row(t);
    }
}

const RowMat& final_hidden(const ExampleTrace& tr) {
    return tr.layers.empty() ? tr.x0 : tr.layers.back().x_out;
}

// stable per-row log-softmax loss; returns sum of -log p[target]
double nll_sum(const RowMat& logits, std::span<const int> targets) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
        total += lse - logits(r, targets[static_cast<std::size_t>(r)]);
    }
    return total;
}

RowMat ce_grad(const RowMat& logits, std::span<const int> targets) {
    RowMat grad(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(r).array() - m).exp();
        grad.row(r) = e / e.sum();
        grad(r, targets[static_cast<std::size_t>(r)]) -= 1.0;
    }
    return grad;
}

}  // namespace

void ModelConfig::validate() const {
    if (n_layers < 1) throw InvalidConfig("n_layers must be >= 1");
    if (hidden < 1 || n_heads < 1 || hidden % n_heads != 0) {
        throw InvalidConfig("hidden must be a positive multiple of n_heads");
    }
    if (ff_dim < 1) throw InvalidConfig("ff_dim must be >= 1");
    if (vocab_size < 6) throw InvalidConfig("vocab_size must cover the five special ids");
    if (max_len < 3) throw InvalidConfig("max_len must be >= 3");
    if (n_classes != 3) throw InvalidConfig("n_classes is fixed at 3");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidConfig("dropout must be in [0,1)");
}

std::string_view to_string(HeadKind head) {
    return head == HeadKind::mlm ? "mlm" : "classifier";
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Model m;
    m.config_ = config;
    m.head_ = HeadKind::mlm;

    const auto V = static_cast<std::size_t>(config.vocab_size);
    const auto H = static_cast<std::size_t>(config.hidden);
    const auto F = static_cast<std::size_t>(config.ff_dim);
    const auto L = static_cast<std::size_t>(config.max_len);
    const int n_layers = config.n_layers;
    const int emb_group = n_layers + 1;

    Rng rng(seed);
    auto weight = [&rng](std::vector<std::size_t> shape) {
        Tensor t(std::move(shape), 0.0);
        for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal() * 0.02;
        return t;
    };
    auto add = [&m](std::string name, Tensor value, int group) {
        Tensor grad(value.shape(), 0.0);
        m.params_.push_back({std::move(name), std::move(value), std::move(grad), group});
    };

    add("embeddings.token", weight({V, H}), emb_group);
    add("embeddings.position", weight({L, H}), emb_group);
    for (int l = 0; l < n_layers; ++l) {
        const int group = 1 + (n_layers - 1 - l);
        const std::string prefix = "layers." + std::to_string(l) + ".";
        add(prefix + "attn.wq", weight({H, H}), group);
        add(prefix + "attn.bq", Tensor({H}, 0.0), group);
        add(prefix + "attn.wk", weight({H, H}), group);
        add(prefix + "attn.bk", Tensor({H}, 0.0), group);
        add(prefix + "attn.wv", weight({H, H}), group);
        add(prefix + "attn.bv", Tensor({H}, 0.0), group);
        add(prefix + "attn.wo", weight({H, H}), group);
        add(prefix + "attn.bo", Tensor({H}, 0.0), group);
        add(prefix + "ln1.gamma", Tensor({H}, 1.0), group);
        add(prefix + "ln1.beta", Tensor({H}, 0.0), group);
        add(prefix + "ff.w1", weight({H, F}), group);
        add(prefix + "ff.b1", Tensor({F}, 0.0), group);
        add(prefix + "ff.w2", weight({F, H}), group);
        add(prefix + "ff.b2", Tensor({H}, 0.0), group);
        add(prefix + "ln2.gamma", Tensor({H}, 1.0), group);
        add(prefix + "ln2.beta", Tensor({H}, 0.0), group);
    }
    add("head.mlm.weight", weight({H, V}), 0);
    add("head.mlm.bias", Tensor({V}, 0.0), 0);

    m.rebuild_groups();
    return m;
}

void Model::rebuild_groups() {
    groups_.assign(static_cast<std::size_t>(n_groups()), {});
    for (std::size_t i = 0; i < params_.size(); ++i) {
        groups_[static_cast<std::size_t>(params_[i].group)].push_back(i);
    }
}

std::size_t Model::n_scalars() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.numel();
    return n;
}

void Model::zero_grads() {
    for (auto& p : params_) {
        std::fill(p.grad.values().begin(), p.grad.values().end(), 0.0);
    }
}

void Model::swap_head(HeadKind target, std::uint64_t seed) {
    const auto H = static_cast<std::size_t>(config_.hidden);
    const auto out_dim = target == HeadKind::mlm ? static_cast<std::size_t>(config_.vocab_size)
                                                 : static_cast<std::size_t>(config_.n_classes);
    params_.resize(head_weight_index(config_));

    Rng rng(seed);
    Tensor w({H, out_dim}, 0.0);
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.normal() * 0.02;
    const std::string prefix = target == HeadKind::mlm ? "head.mlm." : "head.classifier.";
    params_.push_back({prefix + "weight", std::move(w), Tensor({H, out_dim}, 0.0), 0});
    params_.push_back({prefix + "bias", Tensor({out_dim}, 0.0), Tensor({out_dim}, 0.0), 0});

    head_ = target;
    rebuild_groups();
}

Tensor Model::forward_encoder(const std::vector<TokenSequence>& batch, bool train_mode,
                              std::uint64_t seed) const {
    const int eff_len = effective_length(config_, batch);
    const auto H = static_cast<std::size_t>(config_.hidden);
    Tensor out({batch.size(), static_cast<std::size_t>(config_.max_len), H}, 0.0);
    for (std::size_t e = 0; e < batch.size(); ++e) {
        ExampleTrace tr;
        encode_example(config_, params_, batch[e], eff_len, train_mode, derive_seed(seed, e), tr);
        const RowMat& x = final_hidden(tr);
        for (int t = 0; t < eff_len; ++t) {
            for (std::size_t c = 0; c < H; ++c) {
                out[(e * static_cast<std::size_t>(config_.max_len) +
                     static_cast<std::size_t>(t)) * H + c] = x(t, static_cast<Eigen::Index>(c));
            }
        }
    }
    require_finite(out, "forward_encoder");
    return out;
}

namespace {

void validate_masked(const ModelConfig& cfg, const std::vector<TokenSequence>& batch,
                     std::span<const MaskedPosition> masked) {
    for (const auto& mp : masked) {
        if (mp.example >= batch.size()) {
            throw IdOutOfRange("masked position references example " +
                               std::to_string(mp.example));
        }
        if (mp.position >= static_cast<std::size_t>(cfg.max_len) ||
            !batch[mp.example].attention_mask[mp.position]) {
            throw IdOutOfRange("masked position " + std::to_string(mp.position) +
                               " does not index a real token");
        }
    }
}

}  // namespace

Tensor Model::forward_mlm(const std::vector<TokenSequence>& batch,
                          std::span<const MaskedPosition> masked) const {
    if (head_ != HeadKind::mlm) throw WrongHead("forward_mlm requires the MLM head");
    validate_masked(config_, batch, masked);
    const auto V = static_cast<std::size_t>(config_.vocab_size);
    const auto H = static_cast<std::size_t>(config_.hidden);
    Tensor logits({masked.size(), V}, 0.0);
    if (masked.empty()) return logits;

    const int eff_len = effective_length(config_, batch);
    std::vector<ExampleTrace> traces(batch.size());
    for (std::size_t e = 0; e < batch.size(); ++e) {
        encode_example(config_, params_, batch[e], eff_len, false, 0, traces[e]);
    }
    const auto wm = mat(params_[head_weight_index(config_)]);
    const auto bm = vec(params_[head_weight_index(config_) + 1]);
    RowMat rows(masked.size(), H);
    for (std::size_t r = 0; r < masked.size(); ++r) {
        rows.row(static_cast<Eigen::Index>(r)) =
            final_hidden(traces[masked[r].example]).row(static_cast<Eigen::Index>(masked[r].position));
    }
    RowMat lm = rows * wm;
    lm.rowwise() += bm.transpose();
    std::copy(lm.data(), lm.data() + lm.size(), logits.data());
    require_finite(logits, "forward_mlm");
    return logits;
}

Tensor Model::forward_classify(const std::vector<TokenSequence>& batch) const {
    if (head_ != HeadKind::classifier) throw WrongHead("forward_classify requires the classifier head");
    const int eff_len = effective_length(config_, batch);
    const auto H = static_cast<std::size_t>(config_.hidden);
    const auto wc = mat(params_[head_weight_index(config_)]);
    const auto bc = vec(params_[head_weight_index(config_) + 1]);
    RowMat rows(batch.size(), H);
    for (std::size_t e = 0; e < batch.size(); ++e) {
        ExampleTrace tr;
        encode_example(config_, params_, batch[e], eff_len, false, 0, tr);
        rows.row(static_cast<Eigen::Index>(e)) = final_hidden(tr).row(0);
    }
    RowMat lm = rows * wc;
    lm.rowwise() += bc.transpose();
    Tensor logits({batch.size(), static_cast<std::size_t>(config_.n_classes)}, 0.0);
    std::copy(lm.data(), lm.data() + lm.size(), logits.data());
    require_finite(logits, "forward_classify");
    return logits;
}

double Model::mlm_loss(const std::vector<TokenSequence>& batch,
                       std::span<const MaskedPosition> masked, std::span<const int> targets,
                       bool with_grads, bool train_mode, std::uint64_t dropout_seed) {
    if (head_ != HeadKind::mlm) throw WrongHead("mlm_loss requires the MLM head");
    if (masked.size() != targets.size()) {
        throw ShapeMismatch("mlm_loss: masked/target length mismatch");
    }
    validate_masked(config_, batch, masked);
    if (masked.empty()) return 0.0;
    for (int t : targets) {
        if (t < 0 || t >= config_.vocab_size) throw IdOutOfRange("mlm_loss: target id");
    }

    const int eff_len = effective_length(config_, batch);
    const auto H = static_cast<std::size_t>(config_.hidden);
    std::vector<ExampleTrace> traces(batch.size());
    for (std::size_t e = 0; e < batch.size(); ++e) {
        encode_example(config_, params_, batch[e], eff_len, train_mode,
                       derive_seed(dropout_seed, e), traces[e]);
    }

    Parameter& wm = params_[head_weight_index(config_)];
    Parameter& bm = params_[head_weight_index(config_) + 1];
    RowMat rows(masked.size(), H);
    for (std::size_t r = 0; r < masked.size(); ++r) {
        rows.row(static_cast<Eigen::Index>(r)) =
            final_hidden(traces[masked[r].example]).row(static_cast<Eigen::Index>(masked[r].position));
    }
    RowMat logits = rows * mat(wm);
    logits.rowwise() += vec(bm).transpose();

    const double inv_m = 1.0 / static_cast<double>(masked.size());
    const double loss = nll_sum(logits, targets) * inv_m;
    if (!std::isfinite(loss)) throw NonFiniteValue("mlm_loss: non-finite loss");
    if (!with_grads) return loss;

    RowMat dlogits = ce_grad(logits, targets) * inv_m;
    gmat(wm).noalias() += rows.transpose() * dlogits;
    gvec(bm) += dlogits.colwise().sum().transpose();
    RowMat drows = dlogits * mat(wm).transpose();

    for (std::size_t e = 0; e < batch.size(); ++e) {
        RowMat dx = RowMat::Zero(eff_len, static_cast<Eigen::Index>(H));
        bool touched = false;
        for (std::size_t r = 0; r < masked.size(); ++r) {
            if (masked[r].example != e) continue;
            dx.row(static_cast<Eigen::Index>(masked[r].position)) +=
                drows.row(static_cast<Eigen::Index>(r));
            touched = true;
        }
        if (!touched) continue;
        backward_example(config_, params_, batch[e], eff_len, train_mode, traces[e],
                         std::move(dx));
    }
    return loss;
}

double Model::classify_loss(const std::vector<TokenSequence>& batch, std::span<const int> labels,
                            bool with_grads, bool train_mode, std::uint64_t dropout_seed) {
    if (head_ != HeadKind::classifier) throw WrongHead("classify_loss requires the classifier head");
    if (labels.size() != batch.size()) {
        throw ShapeMismatch("classify_loss: batch/label length mismatch");
    }
    for (int t : labels) {
        if (t < 0 || t >= config_.n_classes) throw IdOutOfRange("classify_loss: label");
    }

    const int eff_len = effective_length(config_, batch);
    const auto H = static_cast<std::size_t>(config_.hidden);
    std::vector<ExampleTrace> traces(batch.size());
    for (std::size_t e = 0; e < batch.size(); ++e) {
        encode_example(config_, params_, batch[e], eff_len, train_mode,
                       derive_seed(dropout_seed, e), traces[e]);
    }

    Parameter& wc = params_[head_weight_index(config_)];
    Parameter& bc = params_[head_weight_index(config_) + 1];
    RowMat rows(batch.size(), H);
    for (std::size_t e = 0; e < batch.size(); ++e) {
        rows.row(static_cast<Eigen::Index>(e)) = final_hidden(traces[e]).row(0);
    }
    RowMat logits = rows * mat(wc);
    logits.rowwise() += vec(bc).transpose();

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const double loss = nll_sum(logits, labels) * inv_b;
    if (!std::isfinite(loss)) throw NonFiniteValue("classify_loss: non-finite loss");
    if (!with_grads) return loss;

    RowMat dlogits = ce_grad(logits, labels) * inv_b;
    gmat(wc).noalias() += rows.transpose() * dlogits;
    gvec(bc) += dlogits.colwise().sum().transpose();
    RowMat drows = dlogits * mat(wc).transpose();

    for (std::size_t e = 0; e < batch.size(); ++e) {
        RowMat dx = RowMat::Zero(eff_len, static_cast<Eigen::Index>(H));
        dx.row(0) = drows.row(static_cast<Eigen::Index>(e));
        backward_example(config_, params_, batch[e], eff_len, train_mode, traces[e],
                         std::move(dx));
    }
    return loss;
}

Tensor Model::attention_probs(const std::vector<TokenSequence>& batch, int layer, int head_index,
                              std::size_t example) const {
    if (layer < 0 || layer >= config_.n_layers || head_index < 0 ||
        head_index >= config_.n_heads || example >= batch.size()) {
        throw IdOutOfRange("attention_probs: layer/head/example out of range");
    }
    const int eff_len = effective_length(config_, batch);
    ExampleTrace tr;
    encode_example(config_, params_, batch[example], eff_len, false, 0, tr);
    const RowMat& att =
        tr.layers[static_cast<std::size_t>(layer)].att[static_cast<std::size_t>(head_index)];
    Tensor out({static_cast<std::size_t>(eff_len), static_cast<std::size_t>(eff_len)}, 0.0);
    std::copy(att.data(), att.data() + att.size(), out.data());
    return out;
}

std::uint32_t Model::encoder_checksum() const {
    uLong crc = crc32(0L, Z_NULL, 0);
    for (const auto& p : params_) {
        if (p.group == 0) continue;  // head excluded
        crc = crc32(crc, reinterpret_cast<const Bytef*>(p.name.data()),
                    static_cast<uInt>(p.name.size()));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(p.value.data()),
                    static_cast<uInt>(p.value.numel() * sizeof(double)));
    }
    return static_cast<std::uint32_t>(crc);
}

int predict_class(std::span<const double> logits) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(logits.size()); ++c) {
        if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

}  // namespace mixsent
