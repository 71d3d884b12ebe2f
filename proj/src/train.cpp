// SPDX-License-Identifier: Apache-2.0
#include "mixsent/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixsent/rng.hpp"

namespace mixsent {

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (max_len < 3) throw std::invalid_argument("train: max_len must be >= 3");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (!(mlm_mask_rate >= 0.0 && mlm_mask_rate <= 1.0)) {
        throw std::invalid_argument("train: mlm_mask_rate must be in [0,1]");
    }
    if (max_steps < 0) throw std::invalid_argument("train: max_steps must be >= 0");
}

OptimizerState OptimizerState::for_model(const Model& model) {
    OptimizerState state;
    state.m.reserve(model.parameters().size());
    state.v.reserve(model.parameters().size());
    for (const auto& p : model.parameters()) {
        state.m.push_back(Tensor(p.value.shape(), 0.0));
        state.v.push_back(Tensor(p.value.shape(), 0.0));
    }
    return state;
}

MaskResult mask_tokens(const TokenSequence& seq, double rate, std::uint64_t seed,
                       int vocab_size) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw std::invalid_argument("mask_tokens: rate must be in [0,1]");
    }
    MaskResult result;
    result.corrupted_ids = seq.ids;
    Rng rng(seed);
    for (std::size_t t = 0; t < seq.ids.size(); ++t) {
        if (!seq.attention_mask[t]) continue;
        const int id = seq.ids[t];
        if (id == Vocabulary::kCls || id == Vocabulary::kSep || id == Vocabulary::kPad) continue;
        if (!rng.bernoulli(rate)) continue;
        result.positions.push_back(t);
        result.original_ids.push_back(id);
        const double u = rng.uniform();
        if (u < 0.8) {
            result.corrupted_ids[t] = Vocabulary::kMask;
        } else if (u < 0.9 && vocab_size > 5) {
            result.corrupted_ids[t] =
                5 + static_cast<int>(rng.uniform_int(0, static_cast<std::uint64_t>(vocab_size) - 6));
        }  // else: keep the original id
    }
    return result;
}

void adamw_step(Model& model, OptimizerState& state, std::span<const double> lr_per_group,
                double weight_decay, const std::set<int>& frozen, double beta1, double beta2,
                double eps) {
    auto& params = model.parameters();
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeMismatch("adamw_step: optimizer state does not match the parameter list");
    }
    if (lr_per_group.size() != static_cast<std::size_t>(model.n_groups())) {
        throw ShapeMismatch("adamw_step: one learning rate per parameter group required");
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = params[i];
        if (frozen.contains(p.group)) continue;
        if (!state.m[i].same_shape(p.value)) {
            throw ShapeMismatch("adamw_step: accumulator shape mismatch for " + p.name);
        }
        const double lr = lr_per_group[static_cast<std::size_t>(p.group)];
        double* value = p.value.data();
        const double* grad = p.grad.data();
        double* m = state.m[i].data();
        double* v = state.v[i].data();
        for (std::size_t j = 0; j < p.value.numel(); ++j) {
            m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            value[j] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * value[j]);
        }
    }
}

std::string TrainHistory::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "epoch,step,lr,loss,val_weighted_f1\n";
    for (const auto& row : rows) {
        os << row.epoch << ',' << row.step << ',' << row.lr << ',' << row.loss << ',';
        if (row.val_weighted_f1 >= 0.0) os << row.val_weighted_f1;
        os << '\n';
    }
    return os.str();
}

std::vector<TokenSequence> encode_dataset(const Dataset& dataset, const Vocabulary& vocab,
                                          int max_len) {
    std::vector<TokenSequence> sequences;
    sequences.reserve(dataset.tweets.size());
    for (const auto& tweet : dataset.tweets) {
        sequences.push_back(encode(tweet.text(), vocab, static_cast<std::size_t>(max_len)));
    }
    return sequences;
}

std::vector<Sentiment> predict_dataset(const Model& model,
                                       const std::vector<TokenSequence>& sequences,
                                       int batch_size) {
    std::vector<Sentiment> preds;
    preds.reserve(sequences.size());
    for (std::size_t start = 0; start < sequences.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(sequences.size(), start + static_cast<std::size_t>(batch_size));
        const std::vector<TokenSequence> batch(sequences.begin() + static_cast<std::ptrdiff_t>(start),
                                               sequences.begin() + static_cast<std::ptrdiff_t>(end));
        const Tensor logits = model.forward_classify(batch);
        for (std::size_t r = 0; r < batch.size(); ++r) {
            const int cls = predict_class(
                std::span<const double>(logits.data() + r * 3, 3));
            preds.push_back(static_cast<Sentiment>(cls));
        }
    }
    return preds;
}

namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x9000u + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    return order;
}

long planned_steps(std::size_t n_examples, int batch_size, int epochs, long max_steps) {
    const long per_epoch = static_cast<long>(
        (n_examples + static_cast<std::size_t>(batch_size) - 1) /
        static_cast<std::size_t>(batch_size));
    long total = per_epoch * static_cast<long>(epochs);
    if (max_steps > 0) total = std::min(total, max_steps);
    return total;
}

}  // namespace

TrainHistory pretrain_mlm(Model& model, const Dataset& dataset, const Vocabulary& vocab,
                          const TrainConfig& cfg, const ScheduleConfig& sched) {
    cfg.validate();
    if (model.head() != HeadKind::mlm) throw WrongHead("pretrain_mlm requires the MLM head");
    if (dataset.tweets.empty()) throw EmptyDataset("pretrain_mlm: empty dataset");

    const auto sequences = encode_dataset(dataset, vocab, cfg.max_len);
    const long total_steps = planned_steps(sequences.size(), cfg.batch_size, cfg.epochs,
                                           cfg.max_steps);
    ScheduleConfig schedule = sched;
    schedule.total_steps = std::max<long>(total_steps, 1);
    schedule.validate();

    OptimizerState state = OptimizerState::for_model(model);
    const std::set<int> nothing_frozen;
    const std::vector<double> flat_lr(static_cast<std::size_t>(model.n_groups()), 0.0);

    TrainHistory history;
    long step = 0;
    bool done = false;
    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        const auto order = epoch_order(sequences.size(), cfg.seed, epoch);
        double epoch_loss_sum = 0.0;
        long epoch_steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            if (cfg.max_steps > 0 && step >= cfg.max_steps) {
                done = true;
                break;
            }
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));

            std::vector<TokenSequence> batch;
            std::vector<MaskedPosition> masked;
            std::vector<int> targets;
            batch.reserve(end - start);
            for (std::size_t b = start; b < end; ++b) {
                const TokenSequence& seq = sequences[order[b]];
                const auto mask_seed =
                    derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)),
                                order[b]);
                MaskResult mr = mask_tokens(seq, cfg.mlm_mask_rate, mask_seed,
                                            model.config().vocab_size);
                TokenSequence corrupted = seq;
                corrupted.ids = std::move(mr.corrupted_ids);
                const std::size_t example = batch.size();
                batch.push_back(std::move(corrupted));
                for (std::size_t k = 0; k < mr.positions.size(); ++k) {
                    masked.push_back({example, mr.positions[k]});
                    targets.push_back(mr.original_ids[k]);
                }
            }

            const double lr = stlr(step, schedule);
            if (!masked.empty()) {
                model.zero_grads();
                const double loss =
                    model.mlm_loss(batch, masked, targets, true, true,
                                   derive_seed(cfg.seed, 0xD000u + static_cast<std::uint64_t>(step)));
                std::vector<double> lrs = flat_lr;
                std::fill(lrs.begin(), lrs.end(), lr);
                adamw_step(model, state, lrs, cfg.weight_decay, nothing_frozen, cfg.adam_beta1,
                           cfg.adam_beta2, cfg.adam_eps);
                history.rows.push_back({epoch, step, lr, loss, -1.0});
                epoch_loss_sum += loss;
                ++epoch_steps;
            }
            ++step;
        }
        if (epoch_steps > 0) {
            history.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(epoch_steps));
        }
    }
    return history;
}

FinetuneResult finetune(Model& model, const Dataset& train_set, const Dataset& valid_set,
                        const Vocabulary& vocab, const TrainConfig& cfg,
                        const ScheduleConfig& sched) {
    cfg.validate();
    if (model.head() != HeadKind::classifier) {
        throw WrongHead("finetune requires the classifier head");
    }
    if (train_set.tweets.empty()) throw EmptyDataset("finetune: empty training set");
    if (!train_set.labeled()) throw UnlabeledData("finetune: training set has unlabeled tweets");
    if (!valid_set.tweets.empty() && !valid_set.labeled()) {
        throw UnlabeledData("finetune: validation set has unlabeled tweets");
    }

    const auto train_seqs = encode_dataset(train_set, vocab, cfg.max_len);
    const auto valid_seqs = encode_dataset(valid_set, vocab, cfg.max_len);
    std::vector<int> train_labels(train_set.tweets.size());
    for (std::size_t i = 0; i < train_set.tweets.size(); ++i) {
        train_labels[i] = static_cast<int>(*train_set.tweets[i].label);
    }
    std::vector<Sentiment> valid_labels;
    valid_labels.reserve(valid_set.tweets.size());
    for (const auto& tweet : valid_set.tweets) valid_labels.push_back(*tweet.label);

    const long total_steps = planned_steps(train_seqs.size(), cfg.batch_size, cfg.epochs,
                                           cfg.max_steps);
    ScheduleConfig schedule = sched;
    schedule.total_steps = std::max<long>(total_steps, 1);
    schedule.validate();

    OptimizerState state = OptimizerState::for_model(model);
    const int n_groups = model.n_groups();

    FinetuneResult result;
    long step = 0;
    bool done = false;
    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        const std::set<int> frozen =
            cfg.unfreeze_per_epoch ? frozen_groups(epoch, n_groups) : std::set<int>{};
        const auto order = epoch_order(train_seqs.size(), cfg.seed, epoch);
        double epoch_loss_sum = 0.0;
        long epoch_steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            if (cfg.max_steps > 0 && step >= cfg.max_steps) {
                done = true;
                break;
            }
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<TokenSequence> batch;
            std::vector<int> labels;
            batch.reserve(end - start);
            for (std::size_t b = start; b < end; ++b) {
                batch.push_back(train_seqs[order[b]]);
                labels.push_back(train_labels[order[b]]);
            }

            const double base_lr = schedule.stlr_enabled ? stlr(step, schedule) : schedule.lr_max;
            const std::vector<double> lrs = discriminative_lrs(
                base_lr, schedule.discr_enabled ? schedule.discr_factor : 1.0, n_groups);

            model.zero_grads();
            const double loss =
                model.classify_loss(batch, labels, true, true,
                                    derive_seed(cfg.seed, 0xF000u + static_cast<std::uint64_t>(step)));
            adamw_step(model, state, lrs, cfg.weight_decay, frozen, cfg.adam_beta1,
                       cfg.adam_beta2, cfg.adam_eps);

            result.history.rows.push_back({epoch, step, base_lr, loss, -1.0});
            epoch_loss_sum += loss;
            ++epoch_steps;
            ++step;
        }
        if (epoch_steps > 0) {
            result.history.epoch_loss.push_back(epoch_loss_sum /
                                                static_cast<double>(epoch_steps));
        }

        if (!valid_seqs.empty()) {
            const auto preds = predict_dataset(model, valid_seqs, cfg.batch_size);
            EvalReport report = evaluate(valid_labels, preds);
            result.epoch_reports.push_back(report);
            HistoryRow row;
            row.epoch = epoch;
            row.step = step - 1;
            row.lr = result.history.rows.empty() ? 0.0 : result.history.rows.back().lr;
            row.loss = result.history.epoch_loss.empty() ? 0.0 : result.history.epoch_loss.back();
            row.val_weighted_f1 = report.weighted_f1;
            result.history.rows.push_back(row);
        }
    }
    return result;
}

}  // namespace mixsent
