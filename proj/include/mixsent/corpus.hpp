// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mixsent {

// Three-way polarity. The declaration order is the total order used for
// deterministic tie-breaking and for confusion-matrix axes.
enum class Sentiment { positive = 0, negative = 1, neutral = 2 };

constexpr std::array<Sentiment, 3> kAllSentiments = {Sentiment::positive, Sentiment::negative,
                                                     Sentiment::neutral};

std::string_view to_string(Sentiment s);
std::optional<Sentiment> sentiment_from_string(std::string_view text);

// Per-token language tag. The five named tags round-trip through their
// canonical spelling; anything else is preserved verbatim as `other`.
struct LangTag {
    enum class Kind { en, spa, hi, mixed, univ, other };

    Kind kind = Kind::other;
    std::string text;  // original spelling, set only for `other`

    static LangTag parse(std::string_view tag);
    std::string str() const;

    bool operator==(const LangTag&) const = default;

    static LangTag en() { return {Kind::en, {}}; }
    static LangTag spa() { return {Kind::spa, {}}; }
    static LangTag univ() { return {Kind::univ, {}}; }
};

struct Token {
    std::string surface;
    LangTag tag;

    bool operator==(const Token&) const = default;
};

struct Tweet {
    std::string uid;
    std::vector<Token> tokens;
    std::optional<Sentiment> label;

    bool operator==(const Tweet&) const = default;

    // Token surfaces joined by single spaces.
    std::string text() const;
};

struct Dataset {
    std::vector<Tweet> tweets;

    bool labeled() const;
    std::array<std::size_t, 3> label_counts() const;

    bool operator==(const Dataset&) const = default;
};

struct ParseError : std::runtime_error {
    enum class Kind { malformed_meta, malformed_token_line, duplicate_uid };

    ParseError(Kind k, std::size_t line_number, const std::string& message);

    Kind kind;
    std::size_t line;  // 1-based
};

// Record grammar: header line "meta<TAB><uid>[<TAB><sentiment>]", then one
// "<surface><TAB><tag>" line per token, blank-line terminated; the final
// record may omit the trailing blank line. Tag aliases lang1/lang2 map to
// en/spa.
std::vector<Tweet> parse_conllu(std::string_view text);

std::string serialize_conllu(std::span<const Tweet> tweets);

Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace mixsent
