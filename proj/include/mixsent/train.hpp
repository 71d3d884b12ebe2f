// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "mixsent/corpus.hpp"
#include "mixsent/metrics.hpp"
#include "mixsent/model.hpp"
#include "mixsent/schedule.hpp"
#include "mixsent/tokenizer.hpp"

namespace mixsent {

struct UnlabeledData : std::runtime_error {
    explicit UnlabeledData(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyDataset : std::runtime_error {
    explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};

struct TrainConfig {
    int batch_size = 16;
    double weight_decay = 1e-2;
    int max_len = 70;
    int epochs = 3;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool unfreeze_per_epoch = true;  // gradual unfreezing during fine-tuning
    double mlm_mask_rate = 0.15;
    long max_steps = 0;  // 0 = run all epochs to completion

    void validate() const;
};

// Adam first/second moment accumulators, shape-aligned with the model's
// parameter list. t counts optimizer steps.
struct OptimizerState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long t = 0;

    static OptimizerState for_model(const Model& model);
};

struct MaskResult {
    std::vector<int> corrupted_ids;
    std::vector<std::size_t> positions;  // ascending
    std::vector<int> original_ids;
};

// Each real non-special token is selected independently with probability
// `rate`; of the selected: 80% become MASK, 10% a random id >= 5, 10% stay
// unchanged. CLS/SEP/PAD are never candidates. Deterministic per (seq, seed).
MaskResult mask_tokens(const TokenSequence& seq, double rate, std::uint64_t seed,
                       int vocab_size);

// Decoupled-weight-decay Adam over the model's gradients. lr_per_group is
// aligned with the head-first group order; parameters (and accumulators) of
// frozen groups are untouched, bit for bit. t increments once per call.
void adamw_step(Model& model, OptimizerState& state, std::span<const double> lr_per_group,
                double weight_decay, const std::set<int>& frozen, double beta1, double beta2,
                double eps);

struct HistoryRow {
    int epoch = 0;
    long step = 0;
    double lr = 0.0;
    double loss = 0.0;
    double val_weighted_f1 = -1.0;  // < 0 when not evaluated at this row
};

struct TrainHistory {
    std::vector<HistoryRow> rows;
    std::vector<double> epoch_loss;  // mean loss per epoch

    std::string to_csv() const;  // "epoch,step,lr,loss,val_weighted_f1"
};

// Masked-language-model pre-training over the dataset's tweet text (already
// normalized upstream when preprocessing is enabled). All groups train.
TrainHistory pretrain_mlm(Model& model, const Dataset& dataset, const Vocabulary& vocab,
                          const TrainConfig& cfg, const ScheduleConfig& sched);

struct FinetuneResult {
    TrainHistory history;
    std::vector<EvalReport> epoch_reports;  // validation, one per epoch
};

// ULMFiT fine-tuning: per step the STLR rate is scaled per group by the
// discriminative factor; the frozen set comes from the unfreezing plan.
// Post-epoch validation is reported as weighted F1.
FinetuneResult finetune(Model& model, const Dataset& train_set, const Dataset& valid_set,
                        const Vocabulary& vocab, const TrainConfig& cfg,
                        const ScheduleConfig& sched);

// Deterministic helpers shared by the training loops and the CLI.
std::vector<TokenSequence> encode_dataset(const Dataset& dataset, const Vocabulary& vocab,
                                          int max_len);
std::vector<Sentiment> predict_dataset(const Model& model,
                                       const std::vector<TokenSequence>& sequences,
                                       int batch_size);

}  // namespace mixsent
