// SPDX-License-Identifier: Apache-2.0
#include "mixsent/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mixsent {

std::string_view to_string(Sentiment s) {
    switch (s) {
        case Sentiment::positive: return "positive";
        case Sentiment::negative: return "negative";
        case Sentiment::neutral: return "neutral";
    }
    return "neutral";
}

std::optional<Sentiment> sentiment_from_string(std::string_view text) {
    if (text == "positive") return Sentiment::positive;
    if (text == "negative") return Sentiment::negative;
    if (text == "neutral") return Sentiment::neutral;
    return std::nullopt;
}

LangTag LangTag::parse(std::string_view tag) {
    if (tag == "en" || tag == "lang1") return {Kind::en, {}};
    if (tag == "spa" || tag == "lang2") return {Kind::spa, {}};
    if (tag == "hi") return {Kind::hi, {}};
    if (tag == "mixed") return {Kind::mixed, {}};
    if (tag == "univ") return {Kind::univ, {}};
    return {Kind::other, std::string(tag)};
}

std::string LangTag::str() const {
    switch (kind) {
        case Kind::en: return "en";
        case Kind::spa: return "spa";
        case Kind::hi: return "hi";
        case Kind::mixed: return "mixed";
        case Kind::univ: return "univ";
        case Kind::other: return text;
    }
    return text;
}

std::string Tweet::text() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i].surface;
    }
    return out;
}

bool Dataset::labeled() const {
    for (const auto& t : tweets) {
        if (!t.label) return false;
    }
    return true;
}

std::array<std::size_t, 3> Dataset::label_counts() const {
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (const auto& t : tweets) {
        if (t.label) counts[static_cast<std::size_t>(*t.label)]++;
    }
    return counts;
}

ParseError::ParseError(Kind k, std::size_t line_number, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
      kind(k),
      line(line_number) {}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

struct LineReader {
    std::string_view text;
    std::size_t offset = 0;
    std::size_t line_no = 0;

    bool eof() const { return offset >= text.size(); }

    // Returns the next line without its terminator; tolerates CRLF.
    std::string_view next() {
        const std::size_t pos = text.find('\n', offset);
        std::string_view line;
        if (pos == std::string_view::npos) {
            line = text.substr(offset);
            offset = text.size();
        } else {
            line = text.substr(offset, pos - offset);
            offset = pos + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        return line;
    }
};

}  // namespace

std::vector<Tweet> parse_conllu(std::string_view text) {
    std::vector<Tweet> tweets;
    std::unordered_set<std::string> seen_uids;
    LineReader reader{text};

    while (!reader.eof()) {
        std::string_view line = reader.next();
        if (line.empty()) continue;  // stray blank between records

        const std::size_t meta_line_no = reader.line_no;
        const auto meta = split_tabs(line);
        if (meta.size() < 2 || meta.size() > 3 || meta[0] != "meta") {
            throw ParseError(ParseError::Kind::malformed_meta, meta_line_no,
                             "expected 'meta<TAB>uid[<TAB>sentiment]'");
        }
        if (meta[1].empty()) {
            throw ParseError(ParseError::Kind::malformed_meta, meta_line_no,
                             "meta line without uid");
        }

        Tweet tweet;
        tweet.uid = std::string(meta[1]);
        if (meta.size() == 3) {
            const auto label = sentiment_from_string(meta[2]);
            if (!label) {
                throw ParseError(ParseError::Kind::malformed_meta, meta_line_no,
                                 "unknown sentiment '" + std::string(meta[2]) + "'");
            }
            tweet.label = label;
        }
        if (!seen_uids.insert(tweet.uid).second) {
            throw ParseError(ParseError::Kind::duplicate_uid, meta_line_no,
                             "duplicate uid '" + tweet.uid + "'");
        }

        while (!reader.eof()) {
            std::string_view token_line = reader.next();
            if (token_line.empty()) break;  // record terminator
            const auto fields = split_tabs(token_line);
            if (fields.size() != 2 || fields[0].empty()) {
                throw ParseError(ParseError::Kind::malformed_token_line, reader.line_no,
                                 "expected '<surface><TAB><tag>'");
            }
            tweet.tokens.push_back({std::string(fields[0]), LangTag::parse(fields[1])});
        }
        if (tweet.tokens.empty()) {
            throw ParseError(ParseError::Kind::malformed_token_line, reader.line_no + 1,
                             "record '" + tweet.uid + "' has no token lines");
        }
        tweets.push_back(std::move(tweet));
    }
    return tweets;
}

std::string serialize_conllu(std::span<const Tweet> tweets) {
    std::string out;
    for (const auto& tweet : tweets) {
        out += "meta\t";
        out += tweet.uid;
        if (tweet.label) {
            out.push_back('\t');
            out += to_string(*tweet.label);
        }
        out.push_back('\n');
        for (const auto& token : tweet.tokens) {
            out += token.surface;
            out.push_back('\t');
            out += token.tag.str();
            out.push_back('\n');
        }
        out.push_back('\n');
    }
    return out;
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return Dataset{parse_conllu(buf.str())};
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write dataset file: " + path.string());
    }
    out << serialize_conllu(dataset.tweets);
}

}  // namespace mixsent
