// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point for the code-mixed sentiment pipeline:
//   synth     generate a seeded synthetic code-mixed corpus
//   pretrain  build a vocabulary and pre-train the encoder with MLM
//   finetune  swap the head and fine-tune the classifier (ULMFiT regimen)
//   predict   write competition-format predictions for a dataset
//   evaluate  score a predictions file against a labeled dataset
//   ablate    preprocessing/ULMFiT ablation table over several seeds

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "mixsent/checkpoint.hpp"
#include "mixsent/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    long seed = -1;
    std::vector<std::string> overrides;
    std::string train, valid, test, vocab, checkpoint, gold, predictions;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "flat key=value config file");
    cmd->add_option("--seed", args.seed, "run seed (overrides train.seed)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--set", args.overrides, "override a config key, e.g. --set sched.lr_max=0.002");
    cmd->add_option("--train", args.train, "training corpus path");
    cmd->add_option("--valid", args.valid, "validation corpus path");
    cmd->add_option("--test", args.test, "test corpus path");
    cmd->add_option("--vocab", args.vocab, "vocabulary file path");
    cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path");
    cmd->add_option("--gold", args.gold, "labeled dataset for evaluate");
    cmd->add_option("--predictions", args.predictions, "predictions CSV for evaluate");
}

mixsent::RunConfig make_config(const CommonArgs& args) {
    mixsent::RunConfig rc = args.config_path.empty()
                                ? mixsent::RunConfig{}
                                : mixsent::RunConfig::from_file(args.config_path);
    for (const auto& assignment : args.overrides) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw mixsent::BadInput("--set expects key=value, got '" + assignment + "'");
        }
        rc.set(assignment.substr(0, eq), assignment.substr(eq + 1));
    }
    if (args.seed >= 0) rc.train.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out_dir.empty()) rc.out_dir = args.out_dir;
    if (!args.train.empty()) rc.train_path = args.train;
    if (!args.valid.empty()) rc.valid_path = args.valid;
    if (!args.test.empty()) rc.test_path = args.test;
    if (!args.vocab.empty()) rc.vocab_path = args.vocab;
    if (!args.checkpoint.empty()) rc.checkpoint_path = args.checkpoint;
    if (!args.gold.empty()) rc.gold_path = args.gold;
    if (!args.predictions.empty()) rc.predictions_path = args.predictions;
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"code-mixed (English-Spanish) sentiment classification pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    bool from_scratch = false;

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic train/valid/test corpora");
    CLI::App* pretrain = app.add_subcommand("pretrain", "MLM pre-training");
    CLI::App* finetune = app.add_subcommand("finetune", "classifier fine-tuning");
    finetune->add_flag("--from-scratch", from_scratch,
                       "initialize a fresh encoder instead of loading a checkpoint");
    CLI::App* predict = app.add_subcommand("predict", "write predictions CSV");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
    CLI::App* ablate = app.add_subcommand("ablate", "preprocessing/ULMFiT ablation table");
    for (CLI::App* cmd : {synth, pretrain, finetune, predict, evaluate, ablate}) {
        add_common(cmd, args);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        mixsent::RunConfig rc = make_config(args);
        if (from_scratch) rc.from_scratch = true;

        if (synth->parsed()) {
            const auto outcome = mixsent::run_synth(rc);
            std::cout << "train: " << outcome.train.string() << '\n'
                      << "valid: " << outcome.valid.string() << '\n'
                      << "test: " << outcome.test.string() << '\n';
        } else if (pretrain->parsed()) {
            const auto outcome = mixsent::run_pretrain(rc);
            std::cout << "checkpoint: " << outcome.checkpoint.string() << '\n'
                      << "vocab: " << outcome.vocab.string() << '\n'
                      << "history: " << outcome.history_csv.string() << '\n';
            if (!outcome.epoch_loss.empty()) {
                std::cout << "final epoch mlm loss: " << outcome.epoch_loss.back() << '\n';
            }
        } else if (finetune->parsed()) {
            const auto outcome = mixsent::run_finetune(rc);
            std::cout << "checkpoint: " << outcome.checkpoint.string() << '\n'
                      << "reports: " << outcome.reports_csv.string() << '\n';
            if (!outcome.epoch_reports.empty()) {
                std::cout << "final val weighted_f1: "
                          << outcome.epoch_reports.back().weighted_f1 << '\n';
            }
        } else if (predict->parsed()) {
            const auto path = mixsent::run_predict(rc);
            std::cout << "predictions: " << path.string() << '\n';
        } else if (evaluate->parsed()) {
            const auto report = mixsent::run_evaluate(rc);
            std::cout << report.to_kv();
        } else if (ablate->parsed()) {
            const auto rows = mixsent::run_ablate(rc);
            for (const auto& row : rows) {
                std::cout << row.name << ": " << row.mean_weighted_f1 << '\n';
            }
        }
        return 0;
    } catch (const mixsent::BadInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::BadMagic& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::VersionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::ChecksumMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::MalformedCheckpoint& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::UnlabeledData& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::EmptyDataset& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const mixsent::EmptyLexicon& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
