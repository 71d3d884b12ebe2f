// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "mixsent/rng.hpp"
#include "mixsent/textnorm.hpp"
#include "mixsent/utf8.hpp"

using namespace mixsent;

namespace {

// Random tweet-like noise for the idempotence property.
std::string noisy_string(Rng& rng) {
    static const std::vector<std::string> pieces = {
        "Qué", "GRANDEEE", "@juan", "#wow", "feliiizzz", "año", "CAFÉ", "hola",
        "qué?!", "jajaja", "ñoño", "&&&", "aa", "a", "", "  ", "\t", "pingüino",
        "estooo", "NOOO!!!", "@u", "#", "mañana", "Ü", "x",
    };
    std::string out;
    const auto n = rng.uniform_int(0, 12);
    for (std::uint64_t i = 0; i < n; ++i) {
        out += pieces[static_cast<std::size_t>(rng.uniform_int(0, pieces.size() - 1))];
        if (rng.bernoulli(0.7)) out += ' ';
        if (rng.bernoulli(0.1)) out += "  ";
    }
    return out;
}

bool has_forbidden_token(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        if (i < text.size() && (text[i] == '@' || text[i] == '#')) return true;
        while (i < text.size() && text[i] != ' ') ++i;
    }
    return false;
}

}  // namespace

TEST_CASE("strip_accents examples") {
    CHECK(strip_accents("café") == "cafe");
    CHECK(strip_accents("abc") == "abc");
    CHECK(strip_accents("año") == "ano");
    CHECK(strip_accents("ü") == "u");
    CHECK(strip_accents("ÁÉÍÓÚÑ") == "AEIOUN");
    // combining mark form (e + U+0301)
    CHECK(strip_accents("e\xcc\x81") == "e");
    // no canonical decomposition: left alone
    CHECK(strip_accents("øß") == "øß");
    CHECK(strip_accents(strip_accents("café")) == strip_accents("café"));
}

TEST_CASE("strip_accents never grows the codepoint count") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const std::string s = noisy_string(rng);
        CHECK(utf8_decode(strip_accents(s)).size() <= utf8_decode(s).size());
    }
}

TEST_CASE("collapse_repeats examples") {
    CHECK(collapse_repeats("holaaa", 3) == "hola");
    CHECK(collapse_repeats("llama", 3) == "llama");
    CHECK(collapse_repeats("", 3) == "");
    CHECK(collapse_repeats("aaab", 2) == "ab");
    CHECK(collapse_repeats("NOOO!!!", 3) == "NO!");
    CHECK_THROWS_AS(collapse_repeats("x", 1), std::invalid_argument);
    // idempotence
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const std::string s = noisy_string(rng);
        const std::string once = collapse_repeats(s, 3);
        CHECK(collapse_repeats(once, 3) == once);
    }
}

TEST_CASE("normalize golden examples") {
    const NormConfig cfg;
    CHECK(normalize("Qué GRANDEEE @juan #wow", cfg) == "que grande");
    CHECK(normalize("Hoy estoy feliiiizzz", cfg) == "hoy estoy feliz");
    CHECK(normalize("ok", cfg) == "ok");
}

TEST_CASE("normalize output invariants") {
    const NormConfig cfg;
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const std::string s = noisy_string(rng);
        const std::string out = normalize(s, cfg);
        CHECK(normalize(out, cfg) == out);  // idempotent
        CHECK(!has_forbidden_token(out));
        CHECK(out.find("  ") == std::string::npos);
        for (char32_t cp : utf8_decode(out)) {
            CHECK(lower_codepoint(cp) == cp);  // no uppercase survives
        }
        // no runs >= min_run
        const auto cps = utf8_decode(out);
        std::size_t run = 1;
        for (std::size_t k = 1; k < cps.size(); ++k) {
            run = (cps[k] == cps[k - 1]) ? run + 1 : 1;
            CHECK(run < static_cast<std::size_t>(cfg.collapse_min_run));
        }
        if (!out.empty()) {
            CHECK(out.front() != ' ');
            CHECK(out.back() != ' ');
        }
    }
}

TEST_CASE("normalize with all toggles off is lowercase only") {
    NormConfig cfg;
    cfg.strip_marks = false;
    cfg.remove_mentions = false;
    cfg.remove_hashtags = false;
    cfg.collapse_repeats = false;
    cfg.squeeze_whitespace = false;
    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
        const std::string s = noisy_string(rng);
        CHECK(normalize(s, cfg) == lowercase(s));
    }
}

TEST_CASE("normalize applies token removal before collapsing") {
    NormConfig cfg;
    cfg.collapse_min_run = 2;
    // "@aa" removal must not leave a collapsed artifact behind
    CHECK(normalize("x @aa y", cfg) == "x y");
}
