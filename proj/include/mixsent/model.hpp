// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixsent/tensor.hpp"
#include "mixsent/tokenizer.hpp"

namespace mixsent {

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

struct WrongHead : std::runtime_error {
    explicit WrongHead(const std::string& what) : std::runtime_error(what) {}
};

struct IdOutOfRange : std::runtime_error {
    explicit IdOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct ModelConfig {
    int n_layers = 4;
    int hidden = 128;
    int n_heads = 4;
    int ff_dim = 512;
    int vocab_size = 8000;
    int max_len = 70;  // maximum encoder sequence length
    int n_classes = 3;
    double dropout = 0.1;

    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

enum class HeadKind { mlm, classifier };

std::string_view to_string(HeadKind head);

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    int group = 0;  // index into head-first group order
};

struct MaskedPosition {
    std::size_t example = 0;
    std::size_t position = 0;
};

// BERT-style encoder with exactly one attached head. Parameters are
// organized into head-first groups [head, top layer, ..., bottom layer,
// embeddings] for discriminative rates and gradual unfreezing.
class Model {
public:
    // Fresh model with an MLM head. Weights ~ N(0, 0.02^2) from the seed,
    // biases and layer-norm betas 0, layer-norm gammas 1.
    static Model init(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    HeadKind head() const { return head_; }
    int n_groups() const { return config_.n_layers + 2; }

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }
    const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
    std::size_t n_scalars() const;
    void zero_grads();

    // Token+position embedding sum followed by the encoder stack. PAD
    // positions never receive attention weight from any query; dropout is
    // applied only in train mode, deterministically from the seed.
    Tensor forward_encoder(const std::vector<TokenSequence>& batch, bool train_mode,
                           std::uint64_t seed = 0) const;

    // Vocabulary logits at the masked positions, shape [#masked, vocab].
    Tensor forward_mlm(const std::vector<TokenSequence>& batch,
                       std::span<const MaskedPosition> masked) const;

    // Affine map of the CLS-position hidden state, shape [batch, 3].
    Tensor forward_classify(const std::vector<TokenSequence>& batch) const;

    // Loss entry points for training; gradients accumulate into the
    // parameters' grad tensors when with_grads is set.
    double mlm_loss(const std::vector<TokenSequence>& batch,
                    std::span<const MaskedPosition> masked, std::span<const int> targets,
                    bool with_grads, bool train_mode, std::uint64_t dropout_seed);
    double classify_loss(const std::vector<TokenSequence>& batch, std::span<const int> labels,
                         bool with_grads, bool train_mode, std::uint64_t dropout_seed);

    // Replaces the head with a freshly initialized one; encoder and
    // embedding parameters are untouched, bit for bit.
    void swap_head(HeadKind target, std::uint64_t seed);

    // CRC-32 over every non-head parameter, for freeze/swap contracts.
    std::uint32_t encoder_checksum() const;

    // Attention probabilities of one (layer, head, example), eval mode.
    // Debug/test aid; rows of PAD keys are exactly zero.
    Tensor attention_probs(const std::vector<TokenSequence>& batch, int layer, int head_index,
                           std::size_t example) const;

private:
    Model() = default;
    void rebuild_groups();

    ModelConfig config_;
    HeadKind head_ = HeadKind::mlm;
    std::vector<Parameter> params_;
    std::vector<std::vector<std::size_t>> groups_;

    friend struct ModelAccess;
};

// Argmax over a 3-class logit row with ties broken by the Sentiment order.
int predict_class(std::span<const double> logits);

}  // namespace mixsent
