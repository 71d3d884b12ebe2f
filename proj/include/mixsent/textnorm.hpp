// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace mixsent {

// Tweet text normalization: lowercase, accent stripping, mention/hashtag
// removal, repeated-character collapsing, whitespace squeezing. The whole
// pipeline is idempotent for any configuration.
struct NormConfig {
    // Minimal run length that gets collapsed to a single character.
    // 3 by default so Spanish digraphs ("ll", "rr") survive while
    // elongation noise ("holaaa") does not.
    int collapse_min_run = 3;
    bool collapse_repeats = true;
    bool remove_mentions = true;
    bool remove_hashtags = true;
    bool strip_marks = true;
    bool squeeze_whitespace = true;
};

// Unicode-aware lowercase over the Latin repertoire (ASCII, Latin-1
// Supplement, Latin Extended-A).
char32_t lower_codepoint(char32_t cp);

// Canonical decomposition base letter for precomposed Latin characters;
// returns the input unchanged when there is no canonical decomposition.
char32_t base_codepoint(char32_t cp);

bool is_combining_mark(char32_t cp);

// Canonical decomposition, combining marks removed, recomposed.
std::string strip_accents(std::string_view text);

// Every maximal run of one code point with length >= min_run collapses to a
// single occurrence. min_run must be >= 2.
std::string collapse_repeats(std::string_view text, int min_run);

std::string lowercase(std::string_view text);

// Applies, in order: lowercase; accent stripping; whole-token removal of
// "@"/"#"-initial tokens; run collapsing; whitespace squeeze + trim.
// Each stage is gated by its NormConfig toggle.
std::string normalize(std::string_view raw, const NormConfig& config);

}  // namespace mixsent
