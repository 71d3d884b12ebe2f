// SPDX-License-Identifier: Apache-2.0
#include "mixsent/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "mixsent/utf8.hpp"

namespace mixsent {

namespace {

constexpr std::size_t kMaxNgram = 4;

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) words.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

// (frequency desc, lexicographic asc)
struct RankedToken {
    std::string token;
    std::size_t freq;

    bool operator<(const RankedToken& other) const {
        if (freq != other.freq) return freq > other.freq;
        return token < other.token;
    }
};

}  // namespace

Vocabulary::Vocabulary() {
    for (auto name : kSpecialNames) add(name);
}

int Vocabulary::add(std::string_view token) {
    auto it = id_of_.find(std::string(token));
    if (it != id_of_.end()) return it->second;
    const int id = static_cast<int>(tokens_.size());
    tokens_.emplace_back(token);
    id_of_.emplace(tokens_.back(), id);
    return id;
}

int Vocabulary::lookup(std::string_view token) const {
    auto it = id_of_.find(std::string(token));
    return it == id_of_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw UnknownId(id);
    return tokens_[static_cast<std::size_t>(id)];
}

Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t target_size,
                       std::size_t min_freq) {
    if (corpus.empty()) throw EmptyCorpus();
    if (target_size < Vocabulary::kSpecialNames.size() + 1) {
        throw std::invalid_argument("build_vocab: target_size must be at least 6");
    }
    if (min_freq < 1) {
        throw std::invalid_argument("build_vocab: min_freq must be at least 1");
    }

    // std::map keeps iteration lexicographic, which makes ranking ties
    // deterministic without a second pass.
    std::map<std::string, std::size_t> word_freq;
    std::map<std::string, std::size_t> ngram_freq;  // continuation n-grams, n >= 2
    std::map<std::string, std::size_t> char_seen;   // single characters

    bool any_word = false;
    for (const auto& line : corpus) {
        for (const auto& word : split_words(line)) {
            any_word = true;
            word_freq[word]++;
            const auto cps = utf8_decode(word);
            for (std::size_t i = 0; i < cps.size(); ++i) {
                char_seen[utf8_encode(std::span(&cps[i], 1))]++;
                if (i == 0) continue;
                for (std::size_t n = 2; n <= kMaxNgram && i + n <= cps.size(); ++n) {
                    ngram_freq[utf8_encode(std::span(&cps[i], n))]++;
                }
            }
        }
    }
    if (!any_word) throw EmptyCorpus();

    Vocabulary vocab;

    std::vector<RankedToken> words;
    words.reserve(word_freq.size());
    for (const auto& [w, f] : word_freq) {
        if (f >= min_freq) words.push_back({w, f});
    }
    std::stable_sort(words.begin(), words.end());

    std::size_t budget = target_size - vocab.size();
    for (const auto& ranked : words) {
        if (budget == 0) break;
        if (vocab.contains(ranked.token)) continue;
        vocab.add(ranked.token);
        --budget;
    }

    if (budget > 0) {
        std::vector<RankedToken> grams;
        grams.reserve(ngram_freq.size());
        for (const auto& [g, f] : ngram_freq) {
            if (f >= min_freq) grams.push_back({"##" + g, f});
        }
        std::stable_sort(grams.begin(), grams.end());
        for (const auto& ranked : grams) {
            if (budget == 0) break;
            if (vocab.contains(ranked.token)) continue;
            vocab.add(ranked.token);
            --budget;
        }
    }

    // guarantee single-character coverage, even past the target size
    for (const auto& [c, f] : char_seen) {
        vocab.add(c);
        vocab.add("##" + c);
    }

    return vocab;
}

std::size_t TokenSequence::real_length() const {
    std::size_t n = 0;
    for (int m : attention_mask) n += static_cast<std::size_t>(m);
    return n;
}

TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
    if (max_len < 3) throw std::invalid_argument("encode: max_len must be at least 3");

    std::vector<int> pieces;
    for (const auto& word : split_words(text)) {
        const auto cps = utf8_decode(word);
        std::size_t i = 0;
        while (i < cps.size()) {
            int match = -1;
            std::size_t match_len = 0;
            for (std::size_t len = cps.size() - i; len >= 1; --len) {
                std::string cand;
                if (i > 0) cand = "##";
                cand += utf8_encode(std::span(&cps[i], len));
                const int id = vocab.lookup(cand);
                if (id >= 0) {
                    match = id;
                    match_len = len;
                    break;
                }
            }
            if (match < 0) {
                pieces.push_back(Vocabulary::kUnk);  // unknown residue
                break;
            }
            pieces.push_back(match);
            i += match_len;
        }
    }

    if (pieces.size() > max_len - 2) pieces.resize(max_len - 2);

    TokenSequence seq;
    seq.ids.reserve(max_len);
    seq.ids.push_back(Vocabulary::kCls);
    seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
    seq.ids.push_back(Vocabulary::kSep);
    seq.attention_mask.assign(seq.ids.size(), 1);
    seq.ids.resize(max_len, Vocabulary::kPad);
    seq.attention_mask.resize(max_len, 0);
    return seq;
}

std::string decode(std::span<const int> ids, const Vocabulary& vocab) {
    std::string out;
    for (int id : ids) {
        const std::string& tok = vocab.token(id);  // validates the id
        if (id < static_cast<int>(Vocabulary::kSpecialNames.size())) continue;
        if (tok.starts_with("##")) {
            out += tok.substr(2);
        } else {
            if (!out.empty()) out.push_back(' ');
            out += tok;
        }
    }
    return out;
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary file: " + path.string());
    for (const auto& tok : vocab.tokens()) out << tok << '\n';
}

Vocabulary load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path.string());
    Vocabulary vocab;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no < static_cast<int>(Vocabulary::kSpecialNames.size())) {
            if (line != Vocabulary::kSpecialNames[static_cast<std::size_t>(line_no)]) {
                throw std::runtime_error("vocabulary file " + path.string() +
                                         ": specials are not ids 0-4");
            }
        } else {
            const int id = vocab.add(line);
            if (id != line_no) {
                throw std::runtime_error("vocabulary file " + path.string() +
                                         ": duplicate token '" + line + "'");
            }
        }
        ++line_no;
    }
    if (line_no < static_cast<int>(Vocabulary::kSpecialNames.size())) {
        throw std::runtime_error("vocabulary file " + path.string() + ": truncated");
    }
    return vocab;
}

}  // namespace mixsent
