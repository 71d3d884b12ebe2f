// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixsent/corpus.hpp"

namespace mixsent {

struct EmptyLexicon : std::runtime_error {
    explicit EmptyLexicon(const std::string& which)
        : std::runtime_error("empty lexicon: " + which) {}
};

// Configuration for the seeded code-mixed corpus generator. Each tweet's
// label equals the majority polarity of its injected cue words (neutral
// when there are none); noise injection makes text normalization matter.
struct SynthConfig {
    std::size_t n_per_class = 0;
    std::size_t min_tokens = 5;
    std::size_t max_tokens = 12;

    // per-token noise rates, all in [0,1]
    double elongation_rate = 0.0;
    double uppercase_rate = 0.0;
    double accent_rate = 0.0;
    // per-tweet insertion rates
    double mention_rate = 0.0;
    double hashtag_rate = 0.0;

    std::vector<std::string> positive_en;
    std::vector<std::string> positive_es;
    std::vector<std::string> negative_en;
    std::vector<std::string> negative_es;
    std::vector<std::string> filler_en;
    std::vector<std::string> filler_es;

    // Built-in bilingual lexicons, zero noise. Callers dial noise in.
    static SynthConfig defaults(std::size_t n_per_class = 0);

    // defaults() with the noise rates used by the desk-scale experiments.
    static SynthConfig noisy_defaults(std::size_t n_per_class = 0);
};

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace mixsent
