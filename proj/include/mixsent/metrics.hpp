// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mixsent/corpus.hpp"

namespace mixsent {

struct LengthMismatch : std::runtime_error {
    explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyEval : std::runtime_error {
    EmptyEval() : std::runtime_error("evaluation requires at least one example") {}
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

// Confusion matrix (rows = true, cols = predicted, class order = the
// Sentiment total order) plus per-class and weighted scores.
struct EvalReport {
    std::array<std::array<std::size_t, 3>, 3> confusion{};
    std::array<ClassMetrics, 3> per_class{};
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t total = 0;

    // Flat key-value block, one "key=value" per line, for golden files.
    std::string to_kv() const;
};

std::array<std::array<std::size_t, 3>, 3> confusion_matrix(std::span<const Sentiment> y_true,
                                                           std::span<const Sentiment> y_pred);

// Zero-denominator precision/recall/f1 are defined as 0; weighted_f1 is the
// support-weighted mean of per-class f1 over all three classes.
EvalReport evaluate(std::span<const Sentiment> y_true, std::span<const Sentiment> y_pred);

double weighted_f1(std::span<const Sentiment> y_true, std::span<const Sentiment> y_pred);

// UTF-8 CSV "Uid,Sentiment", one row per tweet in input order.
void write_predictions(std::span<const Tweet> tweets, std::span<const Sentiment> preds,
                       const std::filesystem::path& path);

std::vector<std::pair<std::string, Sentiment>> read_predictions(const std::filesystem::path& path);

}  // namespace mixsent
