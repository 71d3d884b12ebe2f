// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mixsent {

struct EmptyCorpus : std::runtime_error {
    EmptyCorpus() : std::runtime_error("cannot build a vocabulary from an empty corpus") {}
};

struct UnknownId : std::runtime_error {
    explicit UnknownId(int id)
        : std::runtime_error("id " + std::to_string(id) + " is not in the vocabulary") {}
};

// Subword inventory. Ids are dense, 0..size-1; the five specials always
// occupy ids 0-4. Continuation pieces carry a "##" prefix.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;
    static constexpr int kMask = 4;
    static constexpr std::array<std::string_view, 5> kSpecialNames = {"[PAD]", "[UNK]", "[CLS]",
                                                                      "[SEP]", "[MASK]"};

    Vocabulary();

    // Returns the id of a new or existing token.
    int add(std::string_view token);
    // -1 when absent.
    int lookup(std::string_view token) const;
    bool contains(std::string_view token) const { return lookup(token) >= 0; }

    const std::string& token(int id) const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> id_of_;
};

// Deterministic vocabulary construction: specials, then whole words ranked
// by (frequency desc, lexicographic asc) up to the target size, then
// continuation character n-grams on any leftover budget. Every single
// character observed in the corpus is always included (in both initial and
// continuation form), so encoding never fails catastrophically.
Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t target_size,
                       std::size_t min_freq);

struct TokenSequence {
    std::vector<int> ids;
    std::vector<int> attention_mask;  // 1 on real tokens, 0 on PAD

    std::size_t length() const { return ids.size(); }
    std::size_t real_length() const;

    bool operator==(const TokenSequence&) const = default;
};

// Greedy longest-match-first subword segmentation per whitespace word;
// unknown residue becomes UNK. CLS is prepended, SEP appended, truncation
// keeps the first max_len-2 subwords, PAD fills to max_len.
TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

// Drops specials, glues "##" pieces, joins words with single spaces.
std::string decode(std::span<const int> ids, const Vocabulary& vocab);

// One token per line; line number == id.
void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab(const std::filesystem::path& path);

}  // namespace mixsent
