// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mixsent/metrics.hpp"
#include "mixsent/runconfig.hpp"

namespace mixsent {

// End-to-end command implementations shared by the CLI and the test
// harnesses. Every function is a deterministic function of (inputs, config,
// seed) and never mutates its input files.

struct SynthOutcome {
    std::filesystem::path train;
    std::filesystem::path valid;
    std::filesystem::path test;
};

SynthOutcome run_synth(const RunConfig& rc);

struct PretrainOutcome {
    std::filesystem::path checkpoint;
    std::filesystem::path vocab;
    std::filesystem::path history_csv;
    std::vector<double> epoch_loss;
};

PretrainOutcome run_pretrain(const RunConfig& rc);

struct FinetuneOutcome {
    std::filesystem::path checkpoint;
    std::filesystem::path history_csv;
    std::filesystem::path reports_csv;
    std::vector<EvalReport> epoch_reports;
};

FinetuneOutcome run_finetune(const RunConfig& rc);

std::filesystem::path run_predict(const RunConfig& rc);

EvalReport run_evaluate(const RunConfig& rc);

struct AblationRow {
    std::string name;
    double mean_weighted_f1 = 0.0;
};

// Three configurations (base / preprocessing / preprocessing+ulmfit), each
// pre-trained and fine-tuned per seed; writes ablation.csv under out/.
std::vector<AblationRow> run_ablate(const RunConfig& rc);

// Per-token normalization with empty results dropped; tags are preserved.
Dataset preprocess_dataset(const Dataset& dataset, const NormConfig& norm);

}  // namespace mixsent
