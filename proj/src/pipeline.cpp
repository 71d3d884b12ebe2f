// SPDX-License-Identifier: Apache-2.0
#include "mixsent/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mixsent/checkpoint.hpp"
#include "mixsent/rng.hpp"
#include "mixsent/textnorm.hpp"

namespace mixsent {

namespace {

namespace fs = std::filesystem;

void require_input(const std::string& path, const char* what) {
    if (path.empty()) throw BadInput(std::string(what) + " path is not configured");
    if (!fs::exists(path)) {
        throw BadInput(std::string(what) + " file does not exist: " + path);
    }
}

fs::path ensure_out_dir(const RunConfig& rc) {
    fs::path dir(rc.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
}

Dataset synth_split(const SynthConfig& base, std::size_t total, std::uint64_t seed) {
    SynthConfig cfg = base;
    cfg.n_per_class = (total + 2) / 3;
    Dataset dataset = generate_synthetic(cfg, seed);
    if (dataset.tweets.size() > total) dataset.tweets.resize(total);
    return dataset;
}

Dataset load_input_dataset(const std::string& path, const char* what) {
    require_input(path, what);
    try {
        return read_dataset(path);
    } catch (const ParseError& e) {
        throw BadInput(std::string(what) + " file " + path + ": " + e.what());
    }
}

std::vector<std::string> dataset_texts(const Dataset& dataset) {
    std::vector<std::string> texts;
    texts.reserve(dataset.tweets.size());
    for (const auto& tweet : dataset.tweets) texts.push_back(tweet.text());
    return texts;
}

fs::path default_vocab_path(const RunConfig& rc) {
    return rc.vocab_path.empty() ? fs::path(rc.out_dir) / "vocab.txt" : fs::path(rc.vocab_path);
}

Vocabulary build_or_load_vocab(const RunConfig& rc, const Dataset& prepped_train,
                               const fs::path& vocab_file) {
    if (fs::exists(vocab_file)) return load_vocab(vocab_file);
    const auto texts = dataset_texts(prepped_train);
    Vocabulary vocab = build_vocab(texts, static_cast<std::size_t>(rc.model.vocab_size),
                                   rc.vocab_min_freq);
    fs::create_directories(vocab_file.parent_path().empty() ? "." : vocab_file.parent_path());
    save_vocab(vocab, vocab_file);
    return vocab;
}

TrainConfig pretrain_train_config(const RunConfig& rc) {
    TrainConfig cfg = rc.train;
    cfg.max_len = rc.model.max_len;
    cfg.epochs = rc.pretrain_epochs;
    return cfg;
}

ScheduleConfig pretrain_schedule(const RunConfig& rc) {
    ScheduleConfig sched = rc.sched;
    sched.lr_max = rc.pretrain_lr_max;
    sched.stlr_enabled = true;
    sched.discr_enabled = false;
    return sched;
}

ScheduleConfig finetune_schedule(const RunConfig& rc, bool ulmfit) {
    ScheduleConfig sched = rc.sched;
    sched.stlr_enabled = ulmfit;
    sched.discr_enabled = ulmfit;
    return sched;
}

TrainConfig finetune_train_config(const RunConfig& rc, bool ulmfit) {
    TrainConfig cfg = rc.train;
    cfg.max_len = rc.model.max_len;
    cfg.unfreeze_per_epoch = ulmfit;
    return cfg;
}

Model pretrain_in_memory(const RunConfig& rc, const Dataset& prepped_train,
                         const Vocabulary& vocab, std::uint64_t seed,
                         TrainHistory* history_out) {
    ModelConfig config = rc.model;
    config.vocab_size = static_cast<int>(vocab.size());
    Model model = Model::init(config, seed);
    TrainConfig cfg = pretrain_train_config(rc);
    cfg.seed = seed;
    TrainHistory history = pretrain_mlm(model, prepped_train, vocab, cfg, pretrain_schedule(rc));
    if (history_out) *history_out = std::move(history);
    return model;
}

FinetuneResult finetune_in_memory(const RunConfig& rc, Model& model,
                                  const Dataset& prepped_train, const Dataset& prepped_valid,
                                  const Vocabulary& vocab, std::uint64_t seed, bool ulmfit) {
    model.swap_head(HeadKind::classifier, derive_seed(seed, 0x77u));
    TrainConfig cfg = finetune_train_config(rc, ulmfit);
    cfg.seed = seed;
    return finetune(model, prepped_train, prepped_valid, vocab, cfg,
                    finetune_schedule(rc, ulmfit));
}

std::string reports_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream os;
    os.precision(12);
    os << "epoch,val_weighted_f1,val_accuracy\n";
    for (std::size_t e = 0; e < reports.size(); ++e) {
        os << e << ',' << reports[e].weighted_f1 << ',' << reports[e].accuracy << '\n';
    }
    return os.str();
}

}  // namespace

Dataset preprocess_dataset(const Dataset& dataset, const NormConfig& norm) {
    Dataset out;
    out.tweets.reserve(dataset.tweets.size());
    for (const auto& tweet : dataset.tweets) {
        Tweet copy;
        copy.uid = tweet.uid;
        copy.label = tweet.label;
        for (const auto& token : tweet.tokens) {
            std::string surface = normalize(token.surface, norm);
            if (surface.empty()) continue;  // removed mention/hashtag
            copy.tokens.push_back({std::move(surface), token.tag});
        }
        out.tweets.push_back(std::move(copy));
    }
    return out;
}

SynthOutcome run_synth(const RunConfig& rc) {
    const fs::path dir = ensure_out_dir(rc);
    const std::uint64_t seed = rc.train.seed;

    SynthOutcome outcome{dir / "train.conllu", dir / "valid.conllu", dir / "test.conllu"};
    write_text(outcome.train,
               serialize_conllu(synth_split(rc.synth, rc.synth_train, seed).tweets));
    write_text(outcome.valid,
               serialize_conllu(synth_split(rc.synth, rc.synth_valid,
                                            derive_seed(seed, 0x101u)).tweets));
    write_text(outcome.test,
               serialize_conllu(synth_split(rc.synth, rc.synth_test,
                                            derive_seed(seed, 0x202u)).tweets));
    return outcome;
}

PretrainOutcome run_pretrain(const RunConfig& rc) {
    const fs::path dir = ensure_out_dir(rc);
    const Dataset raw = load_input_dataset(rc.train_path, "training corpus");
    const Dataset prepped = rc.preprocessing ? preprocess_dataset(raw, rc.norm) : raw;

    const fs::path vocab_file = default_vocab_path(rc);
    const Vocabulary vocab = build_or_load_vocab(rc, prepped, vocab_file);

    TrainHistory history;
    const Model model = pretrain_in_memory(rc, prepped, vocab, rc.train.seed, &history);

    PretrainOutcome outcome;
    outcome.vocab = vocab_file;
    outcome.checkpoint = rc.checkpoint_path.empty() ? dir / "pretrained.mxl"
                                                    : fs::path(rc.checkpoint_path);
    save_checkpoint(model, outcome.checkpoint);
    outcome.history_csv = dir / "pretrain_history.csv";
    write_text(outcome.history_csv, history.to_csv());
    outcome.epoch_loss = history.epoch_loss;
    return outcome;
}

FinetuneOutcome run_finetune(const RunConfig& rc) {
    const fs::path dir = ensure_out_dir(rc);
    const Dataset raw_train = load_input_dataset(rc.train_path, "training corpus");
    const Dataset raw_valid = load_input_dataset(rc.valid_path, "validation corpus");
    const Dataset train_set = rc.preprocessing ? preprocess_dataset(raw_train, rc.norm) : raw_train;
    const Dataset valid_set = rc.preprocessing ? preprocess_dataset(raw_valid, rc.norm) : raw_valid;

    const fs::path vocab_file = default_vocab_path(rc);
    const Vocabulary vocab = build_or_load_vocab(rc, train_set, vocab_file);

    Model model = [&]() {
        if (rc.from_scratch) {
            ModelConfig config = rc.model;
            config.vocab_size = static_cast<int>(vocab.size());
            return Model::init(config, rc.train.seed);
        }
        const std::string ckpt = rc.checkpoint_path.empty()
                                     ? (dir / "pretrained.mxl").string()
                                     : rc.checkpoint_path;
        require_input(ckpt, "checkpoint");
        Model loaded = load_checkpoint(ckpt);
        if (loaded.config().vocab_size != static_cast<int>(vocab.size())) {
            throw BadInput("checkpoint vocabulary size " +
                           std::to_string(loaded.config().vocab_size) +
                           " does not match vocabulary file (" + std::to_string(vocab.size()) +
                           " entries)");
        }
        return loaded;
    }();

    FinetuneResult result =
        finetune_in_memory(rc, model, train_set, valid_set, vocab, rc.train.seed, rc.ulmfit);

    FinetuneOutcome outcome;
    outcome.checkpoint = dir / "finetuned.mxl";
    save_checkpoint(model, outcome.checkpoint);
    outcome.history_csv = dir / "finetune_history.csv";
    write_text(outcome.history_csv, result.history.to_csv());
    outcome.reports_csv = dir / "finetune_reports.csv";
    write_text(outcome.reports_csv, reports_csv(result.epoch_reports));
    outcome.epoch_reports = std::move(result.epoch_reports);
    return outcome;
}

std::filesystem::path run_predict(const RunConfig& rc) {
    const fs::path dir = ensure_out_dir(rc);
    const Dataset raw = load_input_dataset(rc.test_path, "test corpus");
    const Dataset prepped = rc.preprocessing ? preprocess_dataset(raw, rc.norm) : raw;

    require_input(rc.checkpoint_path, "checkpoint");
    const Model model = load_checkpoint(rc.checkpoint_path);
    if (model.head() != HeadKind::classifier) {
        throw BadInput("checkpoint " + rc.checkpoint_path + " has no classifier head");
    }

    const fs::path vocab_file = default_vocab_path(rc);
    require_input(vocab_file.string(), "vocabulary");
    const Vocabulary vocab = load_vocab(vocab_file);
    if (model.config().vocab_size != static_cast<int>(vocab.size())) {
        throw BadInput("checkpoint vocabulary size does not match vocabulary file");
    }

    const auto sequences = encode_dataset(prepped, vocab, rc.model.max_len);
    const auto preds = predict_dataset(model, sequences, rc.train.batch_size);

    const fs::path out_file = dir / "predictions.csv";
    write_predictions(raw.tweets, preds, out_file);
    return out_file;
}

EvalReport run_evaluate(const RunConfig& rc) {
    const Dataset gold = load_input_dataset(rc.gold_path, "gold corpus");
    if (!gold.labeled()) throw BadInput("gold corpus has unlabeled tweets: " + rc.gold_path);
    require_input(rc.predictions_path, "predictions");

    std::unordered_map<std::string, Sentiment> by_uid;
    for (const auto& [uid, label] : read_predictions(rc.predictions_path)) {
        by_uid.emplace(uid, label);
    }
    std::vector<Sentiment> y_true;
    std::vector<Sentiment> y_pred;
    for (const auto& tweet : gold.tweets) {
        const auto it = by_uid.find(tweet.uid);
        if (it == by_uid.end()) {
            throw BadInput("predictions file is missing uid '" + tweet.uid + "'");
        }
        y_true.push_back(*tweet.label);
        y_pred.push_back(it->second);
    }

    const EvalReport report = evaluate(y_true, y_pred);
    const fs::path dir = ensure_out_dir(rc);
    write_text(dir / "eval_report.txt", report.to_kv());
    return report;
}

std::vector<AblationRow> run_ablate(const RunConfig& rc) {
    const Dataset raw_train = load_input_dataset(rc.train_path, "training corpus");
    const Dataset raw_valid = load_input_dataset(rc.valid_path, "validation corpus");
    if (!raw_train.labeled()) throw UnlabeledData("ablate: training set has unlabeled tweets");
    if (!raw_valid.labeled()) throw UnlabeledData("ablate: validation set has unlabeled tweets");

    const Dataset prep_train = preprocess_dataset(raw_train, rc.norm);
    const Dataset prep_valid = preprocess_dataset(raw_valid, rc.norm);

    struct RowSpec {
        const char* name;
        bool preprocessing;
        bool ulmfit;
    };
    constexpr RowSpec kRows[] = {
        {"base", false, false},
        {"preprocessing", true, false},
        {"preprocessing_ulmfit", true, true},
    };

    // one vocabulary per preprocessing setting, shared across seeds
    const auto vocab_for = [&](bool preprocessing) {
        const Dataset& corpus = preprocessing ? prep_train : raw_train;
        return build_vocab(dataset_texts(corpus), static_cast<std::size_t>(rc.model.vocab_size),
                           rc.vocab_min_freq);
    };
    const Vocabulary vocab_raw = vocab_for(false);
    const Vocabulary vocab_prep = vocab_for(true);

    std::vector<AblationRow> rows;
    std::vector<std::vector<double>> per_seed(std::size(kRows));
    for (const std::uint64_t seed : rc.ablate_seeds) {
        // one pre-trained encoder per preprocessing setting per seed
        Model base_raw = pretrain_in_memory(
            [&] { RunConfig r = rc; r.preprocessing = false; return r; }(), raw_train, vocab_raw,
            seed, nullptr);
        Model base_prep = pretrain_in_memory(rc, prep_train, vocab_prep, seed, nullptr);

        for (std::size_t r = 0; r < std::size(kRows); ++r) {
            const RowSpec& row = kRows[r];
            Model model = row.preprocessing ? base_prep : base_raw;
            const Dataset& ft_train = row.preprocessing ? prep_train : raw_train;
            const Dataset& ft_valid = row.preprocessing ? prep_valid : raw_valid;
            const Vocabulary& vocab = row.preprocessing ? vocab_prep : vocab_raw;
            FinetuneResult result =
                finetune_in_memory(rc, model, ft_train, ft_valid, vocab, seed, row.ulmfit);
            if (result.epoch_reports.empty()) {
                throw BadInput("ablate requires a non-empty validation set");
            }
            per_seed[r].push_back(result.epoch_reports.back().weighted_f1);
        }
    }

    std::ostringstream csv;
    csv.precision(12);
    csv << "config,mean_weighted_f1\n";
    for (std::size_t r = 0; r < std::size(kRows); ++r) {
        double mean = 0.0;
        for (double f1 : per_seed[r]) mean += f1;
        mean /= static_cast<double>(per_seed[r].size());
        rows.push_back({kRows[r].name, mean});
        csv << kRows[r].name << ',' << mean << '\n';
    }
    const fs::path dir = ensure_out_dir(rc);
    write_text(dir / "ablation.csv", csv.str());
    return rows;
}

}  // namespace mixsent
