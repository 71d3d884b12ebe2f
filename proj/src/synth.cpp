// SPDX-License-Identifier: Apache-2.0
#include "mixsent/synth.hpp"

#include <algorithm>

#include "mixsent/rng.hpp"
#include "mixsent/utf8.hpp"

namespace mixsent {

namespace {

void require_rate(double rate, const char* name) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw std::invalid_argument(std::string("synth: rate out of [0,1]: ") + name);
    }
}

std::string elongate_last(const std::string& word, Rng& rng) {
    const auto cps = utf8_decode(word);
    if (cps.empty()) return word;
    const auto extra = rng.uniform_int(2, 4);  // total run of 3..5
    auto out = cps;
    out.insert(out.end(), extra, cps.back());
    return utf8_encode(out);
}

char32_t accented_vowel(char32_t cp) {
    switch (cp) {
        case U'a': return 0x00E1;
        case U'e': return 0x00E9;
        case U'i': return 0x00ED;
        case U'o': return 0x00F3;
        case U'u': return 0x00FA;
        case U'A': return 0x00C1;
        case U'E': return 0x00C9;
        case U'I': return 0x00CD;
        case U'O': return 0x00D3;
        case U'U': return 0x00DA;
        default: return cp;
    }
}

std::string inject_accent(const std::string& word, Rng& rng) {
    auto cps = utf8_decode(word);
    std::vector<std::size_t> vowel_positions;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (accented_vowel(cps[i]) != cps[i]) vowel_positions.push_back(i);
    }
    if (vowel_positions.empty()) return word;
    const auto pick = vowel_positions[static_cast<std::size_t>(
        rng.uniform_int(0, vowel_positions.size() - 1))];
    cps[pick] = accented_vowel(cps[pick]);
    return utf8_encode(cps);
}

std::string uppercase_word(const std::string& word, Rng& rng) {
    auto cps = utf8_decode(word);
    const bool whole = rng.bernoulli(0.5);
    const std::size_t limit = whole ? cps.size() : std::min<std::size_t>(1, cps.size());
    for (std::size_t i = 0; i < limit; ++i) {
        if (cps[i] >= U'a' && cps[i] <= U'z') cps[i] = cps[i] - 32;
    }
    return utf8_encode(cps);
}

struct LexView {
    const std::vector<std::string>* en;
    const std::vector<std::string>* es;

    bool empty() const { return en->empty() && es->empty(); }

    Token draw(Rng& rng) const {
        const bool use_en = es->empty() || (!en->empty() && rng.bernoulli(0.5));
        const auto& words = use_en ? *en : *es;
        return Token{rng.pick(words), use_en ? LangTag::en() : LangTag::spa()};
    }
};

}  // namespace

SynthConfig SynthConfig::defaults(std::size_t n_per_class) {
    SynthConfig c;
    c.n_per_class = n_per_class;
    c.positive_en = {"good", "great",   "happy", "love", "awesome", "nice",
                     "cool", "amazing", "win",   "fun",  "sweet",   "best"};
    c.positive_es = {"bueno", "feliz",     "genial", "lindo", "alegre", "increible",
                     "gusta", "hermoso",   "amor",  "mejor", "rico",   "bonito"};
    c.negative_en = {"bad",   "sad",   "hate",     "awful", "terrible", "angry",
                     "worst", "gross", "annoying", "ugly",  "fail",     "boring"};
    c.negative_es = {"malo", "triste", "odio",    "horrible", "feo",   "enojado",
                     "peor", "asco",   "molesto", "aburrido", "fatal", "pesimo"};
    c.filler_en = {"today", "tomorrow", "morning", "friend", "people", "weather",
                   "coffee", "school",  "music",   "movie",  "street", "house",
                   "phone",  "game",    "week",    "night",  "lunch",  "work"};
    c.filler_es = {"hoy",       "manana", "amigo",    "gente", "clima",  "cafe",
                   "escuela",   "musica", "pelicula", "calle", "casa",   "telefono",
                   "juego",     "semana", "noche",    "comida", "trabajo", "cosa"};
    return c;
}

SynthConfig SynthConfig::noisy_defaults(std::size_t n_per_class) {
    SynthConfig c = defaults(n_per_class);
    c.elongation_rate = 0.30;
    c.uppercase_rate = 0.35;
    c.accent_rate = 0.30;
    c.mention_rate = 0.60;
    c.hashtag_rate = 0.40;
    return c;
}

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
    require_rate(config.elongation_rate, "elongation_rate");
    require_rate(config.uppercase_rate, "uppercase_rate");
    require_rate(config.accent_rate, "accent_rate");
    require_rate(config.mention_rate, "mention_rate");
    require_rate(config.hashtag_rate, "hashtag_rate");
    if (config.min_tokens < 1 || config.max_tokens < config.min_tokens) {
        throw std::invalid_argument("synth: bad token count range");
    }

    Dataset dataset;
    if (config.n_per_class == 0) return dataset;

    const LexView positive{&config.positive_en, &config.positive_es};
    const LexView negative{&config.negative_en, &config.negative_es};
    const LexView filler{&config.filler_en, &config.filler_es};
    if (positive.empty()) throw EmptyLexicon("positive");
    if (negative.empty()) throw EmptyLexicon("negative");
    if (filler.empty()) throw EmptyLexicon("filler");

    Rng rng(seed);

    for (Sentiment label : kAllSentiments) {
        for (std::size_t i = 0; i < config.n_per_class; ++i) {
            const std::size_t n_tokens =
                static_cast<std::size_t>(rng.uniform_int(config.min_tokens, config.max_tokens));

            std::size_t n_major = 0;
            std::size_t n_minor = 0;
            if (label != Sentiment::neutral) {
                n_major = static_cast<std::size_t>(
                    rng.uniform_int(1, std::min<std::uint64_t>(3, n_tokens)));
                if (n_major >= 2 && rng.bernoulli(0.25)) {
                    n_minor = static_cast<std::size_t>(rng.uniform_int(1, n_major - 1));
                }
            }

            Tweet tweet;
            tweet.label = label;
            tweet.tokens.reserve(n_tokens + 2);
            for (std::size_t t = 0; t < n_tokens; ++t) {
                tweet.tokens.push_back(filler.draw(rng));
            }

            // overwrite distinct random positions with cue words
            std::vector<std::size_t> positions(n_tokens);
            for (std::size_t p = 0; p < n_tokens; ++p) positions[p] = p;
            rng.shuffle(positions);
            const LexView& major = (label == Sentiment::positive) ? positive : negative;
            const LexView& minor = (label == Sentiment::positive) ? negative : positive;
            std::size_t slot = 0;
            for (std::size_t c = 0; c < n_major; ++c) {
                tweet.tokens[positions[slot++]] = major.draw(rng);
            }
            for (std::size_t c = 0; c < n_minor; ++c) {
                tweet.tokens[positions[slot++]] = minor.draw(rng);
            }

            for (auto& token : tweet.tokens) {
                if (rng.bernoulli(config.accent_rate)) {
                    token.surface = inject_accent(token.surface, rng);
                }
                if (rng.bernoulli(config.uppercase_rate)) {
                    token.surface = uppercase_word(token.surface, rng);
                }
                if (rng.bernoulli(config.elongation_rate)) {
                    token.surface = elongate_last(token.surface, rng);
                }
            }

            if (rng.bernoulli(config.mention_rate)) {
                const auto pos = static_cast<std::size_t>(
                    rng.uniform_int(0, tweet.tokens.size()));
                Token mention{"@user" + std::to_string(rng.uniform_int(1, 99)), LangTag::univ()};
                tweet.tokens.insert(tweet.tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                                    std::move(mention));
            }
            if (rng.bernoulli(config.hashtag_rate)) {
                const auto pos = static_cast<std::size_t>(
                    rng.uniform_int(0, tweet.tokens.size()));
                Token hashtag{"#tema" + std::to_string(rng.uniform_int(1, 99)), LangTag::univ()};
                tweet.tokens.insert(tweet.tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                                    std::move(hashtag));
            }

            dataset.tweets.push_back(std::move(tweet));
        }
    }

    rng.shuffle(dataset.tweets);
    for (std::size_t i = 0; i < dataset.tweets.size(); ++i) {
        dataset.tweets[i].uid = std::to_string(i + 1);
    }
    return dataset;
}

}  // namespace mixsent
