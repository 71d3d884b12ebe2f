// SPDX-License-Identifier: Apache-2.0
#include "mixsent/textnorm.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "mixsent/utf8.hpp"

namespace mixsent {

namespace {

struct CpPair {
    char32_t from;
    char32_t to;
};

// Base letters for the canonically decomposable characters of Latin-1
// Supplement and Latin Extended-A. Characters without a canonical
// decomposition (e.g. ø, æ, ß, ł, œ) are intentionally absent.
constexpr CpPair kBaseTable[] = {
    // Latin-1 Supplement, uppercase
    {0x00C0, U'A'}, {0x00C1, U'A'}, {0x00C2, U'A'}, {0x00C3, U'A'}, {0x00C4, U'A'},
    {0x00C5, U'A'}, {0x00C7, U'C'}, {0x00C8, U'E'}, {0x00C9, U'E'}, {0x00CA, U'E'},
    {0x00CB, U'E'}, {0x00CC, U'I'}, {0x00CD, U'I'}, {0x00CE, U'I'}, {0x00CF, U'I'},
    {0x00D1, U'N'}, {0x00D2, U'O'}, {0x00D3, U'O'}, {0x00D4, U'O'}, {0x00D5, U'O'},
    {0x00D6, U'O'}, {0x00D9, U'U'}, {0x00DA, U'U'}, {0x00DB, U'U'}, {0x00DC, U'U'},
    {0x00DD, U'Y'},
    // Latin-1 Supplement, lowercase
    {0x00E0, U'a'}, {0x00E1, U'a'}, {0x00E2, U'a'}, {0x00E3, U'a'}, {0x00E4, U'a'},
    {0x00E5, U'a'}, {0x00E7, U'c'}, {0x00E8, U'e'}, {0x00E9, U'e'}, {0x00EA, U'e'},
    {0x00EB, U'e'}, {0x00EC, U'i'}, {0x00ED, U'i'}, {0x00EE, U'i'}, {0x00EF, U'i'},
    {0x00F1, U'n'}, {0x00F2, U'o'}, {0x00F3, U'o'}, {0x00F4, U'o'}, {0x00F5, U'o'},
    {0x00F6, U'o'}, {0x00F9, U'u'}, {0x00FA, U'u'}, {0x00FB, U'u'}, {0x00FC, U'u'},
    {0x00FD, U'y'}, {0x00FF, U'y'},
    // Latin Extended-A
    {0x0100, U'A'}, {0x0101, U'a'}, {0x0102, U'A'}, {0x0103, U'a'}, {0x0104, U'A'},
    {0x0105, U'a'}, {0x0106, U'C'}, {0x0107, U'c'}, {0x0108, U'C'}, {0x0109, U'c'},
    {0x010A, U'C'}, {0x010B, U'c'}, {0x010C, U'C'}, {0x010D, U'c'}, {0x010E, U'D'},
    {0x010F, U'd'}, {0x0112, U'E'}, {0x0113, U'e'}, {0x0114, U'E'}, {0x0115, U'e'},
    {0x0116, U'E'}, {0x0117, U'e'}, {0x0118, U'E'}, {0x0119, U'e'}, {0x011A, U'E'},
    {0x011B, U'e'}, {0x011C, U'G'}, {0x011D, U'g'}, {0x011E, U'G'}, {0x011F, U'g'},
    {0x0120, U'G'}, {0x0121, U'g'}, {0x0122, U'G'}, {0x0123, U'g'}, {0x0124, U'H'},
    {0x0125, U'h'}, {0x0128, U'I'}, {0x0129, U'i'}, {0x012A, U'I'}, {0x012B, U'i'},
    {0x012C, U'I'}, {0x012D, U'i'}, {0x012E, U'I'}, {0x012F, U'i'}, {0x0130, U'I'},
    {0x0134, U'J'}, {0x0135, U'j'}, {0x0136, U'K'}, {0x0137, U'k'}, {0x0139, U'L'},
    {0x013A, U'l'}, {0x013B, U'L'}, {0x013C, U'l'}, {0x013D, U'L'}, {0x013E, U'l'},
    {0x0143, U'N'}, {0x0144, U'n'}, {0x0145, U'N'}, {0x0146, U'n'}, {0x0147, U'N'},
    {0x0148, U'n'}, {0x014C, U'O'}, {0x014D, U'o'}, {0x014E, U'O'}, {0x014F, U'o'},
    {0x0150, U'O'}, {0x0151, U'o'}, {0x0154, U'R'}, {0x0155, U'r'}, {0x0156, U'R'},
    {0x0157, U'r'}, {0x0158, U'R'}, {0x0159, U'r'}, {0x015A, U'S'}, {0x015B, U's'},
    {0x015C, U'S'}, {0x015D, U's'}, {0x015E, U'S'}, {0x015F, U's'}, {0x0160, U'S'},
    {0x0161, U's'}, {0x0162, U'T'}, {0x0163, U't'}, {0x0164, U'T'}, {0x0165, U't'},
    {0x0168, U'U'}, {0x0169, U'u'}, {0x016A, U'U'}, {0x016B, U'u'}, {0x016C, U'U'},
    {0x016D, U'u'}, {0x016E, U'U'}, {0x016F, U'u'}, {0x0170, U'U'}, {0x0171, U'u'},
    {0x0172, U'U'}, {0x0173, U'u'}, {0x0174, U'W'}, {0x0175, U'w'}, {0x0176, U'Y'},
    {0x0177, U'y'}, {0x0178, U'Y'}, {0x0179, U'Z'}, {0x017A, U'z'}, {0x017B, U'Z'},
    {0x017C, U'z'}, {0x017D, U'Z'}, {0x017E, U'z'},
};

bool is_ascii_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v';
}

}  // namespace

char32_t lower_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;
    if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
    if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
    return cp;
}

char32_t base_codepoint(char32_t cp) {
    const auto* begin = std::begin(kBaseTable);
    const auto* end = std::end(kBaseTable);
    const auto* it = std::lower_bound(begin, end, cp,
                                      [](const CpPair& p, char32_t c) { return p.from < c; });
    if (it != end && it->from == cp) return it->to;
    return cp;
}

bool is_combining_mark(char32_t cp) {
    return cp >= 0x0300 && cp <= 0x036F;
}

std::string strip_accents(std::string_view text) {
    const auto cps = utf8_decode(text);
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (is_combining_mark(cp)) continue;
        out.push_back(base_codepoint(cp));
    }
    return utf8_encode(out);
}

std::string collapse_repeats(std::string_view text, int min_run) {
    if (min_run < 2) {
        throw std::invalid_argument("collapse_repeats: min_run must be >= 2");
    }
    const auto cps = utf8_decode(text);
    std::vector<char32_t> out;
    out.reserve(cps.size());
    std::size_t i = 0;
    while (i < cps.size()) {
        std::size_t j = i;
        while (j < cps.size() && cps[j] == cps[i]) ++j;
        const std::size_t run = j - i;
        const std::size_t keep = run >= static_cast<std::size_t>(min_run) ? 1 : run;
        out.insert(out.end(), keep, cps[i]);
        i = j;
    }
    return utf8_encode(out);
}

std::string lowercase(std::string_view text) {
    auto cps = utf8_decode(text);
    for (auto& cp : cps) cp = lower_codepoint(cp);
    return utf8_encode(cps);
}

std::string normalize(std::string_view raw, const NormConfig& config) {
    auto cps = utf8_decode(raw);
    for (auto& cp : cps) cp = lower_codepoint(cp);

    if (config.strip_marks) {
        std::vector<char32_t> stripped;
        stripped.reserve(cps.size());
        for (char32_t cp : cps) {
            if (is_combining_mark(cp)) continue;
            stripped.push_back(base_codepoint(cp));
        }
        cps = std::move(stripped);
    }

    if (config.remove_mentions || config.remove_hashtags) {
        std::vector<char32_t> kept;
        kept.reserve(cps.size());
        std::size_t i = 0;
        while (i < cps.size()) {
            if (is_ascii_space(cps[i])) {
                kept.push_back(cps[i]);
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < cps.size() && !is_ascii_space(cps[j])) ++j;
            const char32_t head = cps[i];
            const bool drop = (config.remove_mentions && head == U'@') ||
                              (config.remove_hashtags && head == U'#');
            if (!drop) kept.insert(kept.end(), cps.begin() + static_cast<std::ptrdiff_t>(i),
                                   cps.begin() + static_cast<std::ptrdiff_t>(j));
            i = j;
        }
        cps = std::move(kept);
    }

    if (config.collapse_repeats) {
        const auto min_run = static_cast<std::size_t>(std::max(config.collapse_min_run, 2));
        std::vector<char32_t> collapsed;
        collapsed.reserve(cps.size());
        std::size_t i = 0;
        while (i < cps.size()) {
            std::size_t j = i;
            while (j < cps.size() && cps[j] == cps[i]) ++j;
            const std::size_t keep = (j - i) >= min_run ? 1 : (j - i);
            collapsed.insert(collapsed.end(), keep, cps[i]);
            i = j;
        }
        cps = std::move(collapsed);
    }

    if (config.squeeze_whitespace) {
        std::vector<char32_t> squeezed;
        squeezed.reserve(cps.size());
        bool in_space = false;
        for (char32_t cp : cps) {
            if (is_ascii_space(cp)) {
                in_space = true;
                continue;
            }
            if (in_space && !squeezed.empty()) squeezed.push_back(U' ');
            in_space = false;
            squeezed.push_back(cp);
        }
        cps = std::move(squeezed);
    }

    return utf8_encode(cps);
}

}  // namespace mixsent
