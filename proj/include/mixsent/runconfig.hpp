// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mixsent/model.hpp"
#include "mixsent/schedule.hpp"
#include "mixsent/synth.hpp"
#include "mixsent/textnorm.hpp"
#include "mixsent/train.hpp"

namespace mixsent {

// Thrown for problems with user-supplied inputs (missing files, malformed
// config values, incompatible checkpoints). The CLI maps it to exit code 2.
struct BadInput : std::runtime_error {
    explicit BadInput(const std::string& what) : std::runtime_error(what) {}
};

// Flat key=value run configuration; command-line flags override file values.
struct RunConfig {
    // paths
    std::string train_path;
    std::string valid_path;
    std::string test_path;
    std::string vocab_path;
    std::string checkpoint_path;
    std::string gold_path;
    std::string predictions_path;
    std::string out_dir = "out";

    NormConfig norm;
    ModelConfig model;
    TrainConfig train;
    ScheduleConfig sched;  // fine-tuning schedule

    double pretrain_lr_max = 1e-3;
    int pretrain_epochs = 4;
    std::size_t vocab_min_freq = 1;

    // ablation toggles
    bool preprocessing = true;
    bool ulmfit = true;
    bool from_scratch = false;

    // synthetic-corpus generation (balanced across the three classes)
    SynthConfig synth = SynthConfig::noisy_defaults();
    std::size_t synth_train = 2000;
    std::size_t synth_valid = 600;
    std::size_t synth_test = 600;

    std::vector<std::uint64_t> ablate_seeds = {0, 1, 2};

    static RunConfig from_file(const std::filesystem::path& path);

    // Applies one "key=value" assignment; throws BadInput on unknown keys
    // or unparsable values.
    void set(const std::string& key, const std::string& value);
};

}  // namespace mixsent
