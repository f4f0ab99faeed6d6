#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "forge/errors.hpp"
#include "forge/hash.hpp"
#include "forge/stopwords_v1.hpp"

namespace forge {

using TokenSeq = std::vector<std::string>;

namespace detail {

// Minimal UTF-8 decoding. Invalid byte sequences decode to U+FFFD and act
// as token separators, so malformed input stays deterministic.
inline uint32_t decode_utf8(std::string_view s, size_t& i) {
    const auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    auto cont = [&](size_t k) { return k < s.size() && (byte(k) & 0xc0) == 0x80; };
    if ((b0 & 0xe0) == 0xc0 && cont(i + 1)) {
        uint32_t cp = (uint32_t(b0 & 0x1f) << 6) | (byte(i + 1) & 0x3f);
        i += 2;
        return cp >= 0x80 ? cp : 0xfffd;
    }
    if ((b0 & 0xf0) == 0xe0 && cont(i + 1) && cont(i + 2)) {
        uint32_t cp = (uint32_t(b0 & 0x0f) << 12) | (uint32_t(byte(i + 1) & 0x3f) << 6) |
                      (byte(i + 2) & 0x3f);
        i += 3;
        return cp >= 0x800 ? cp : 0xfffd;
    }
    if ((b0 & 0xf8) == 0xf0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        uint32_t cp = (uint32_t(b0 & 0x07) << 18) | (uint32_t(byte(i + 1) & 0x3f) << 12) |
                      (uint32_t(byte(i + 2) & 0x3f) << 6) | (byte(i + 3) & 0x3f);
        i += 4;
        return cp >= 0x10000 ? cp : 0xfffd;
    }
    i += 1;
    return 0xfffd;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline bool is_latin_word_cp(uint32_t cp) {
    if (cp >= '0' && cp <= '9') return true;
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z')) return true;
    if (cp >= 0xc0 && cp <= 0x24f) return cp != 0xd7 && cp != 0xf7;  // multiply/divide signs
    if (cp >= 0x1e00 && cp <= 0x1eff) return true;  // Latin Extended Additional
    return false;
}

// Letter/digit classification by block. Coarse on purpose: block-level
// ranges keep the tokenizer table-free while covering the scripts that
// actually show up in web text.
inline bool is_word_cp(uint32_t cp) {
    if (is_latin_word_cp(cp)) return true;
    if (cp >= 0x370 && cp <= 0x3ff) return true;    // Greek
    if (cp >= 0x400 && cp <= 0x52f) return true;    // Cyrillic
    if (cp >= 0x530 && cp <= 0x58f) return true;    // Armenian
    if (cp >= 0x590 && cp <= 0x5ff) return true;    // Hebrew
    if (cp >= 0x600 && cp <= 0x6ff) return true;    // Arabic
    if (cp >= 0x900 && cp <= 0x97f) return true;    // Devanagari
    if (cp >= 0xe00 && cp <= 0xe7f) return true;    // Thai
    if (cp >= 0x3040 && cp <= 0x30ff) return true;  // Hiragana/Katakana
    if (cp >= 0x3400 && cp <= 0x4dbf) return true;  // CJK ext A
    if (cp >= 0x4e00 && cp <= 0x9fff) return true;  // CJK
    if (cp >= 0xac00 && cp <= 0xd7af) return true;  // Hangul
    return false;
}

// ASCII and Latin-1 case folding only; other scripts pass through unchanged,
// which keeps tokenization idempotent.
inline uint32_t lower_cp(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
    return cp;
}

}  // namespace detail

// Lowercased maximal runs of letters/digits, split on everything else.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq tokens;
    std::string current;
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = detail::decode_utf8(text, i);
        if (detail::is_word_cp(cp)) {
            detail::append_utf8(current, detail::lower_cp(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

namespace detail {

inline const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbrev = {
        "dr",   "mr",  "mrs", "ms",  "prof", "st",  "jr",   "sr",     "vs",
        "etc",  "e.g", "i.e", "fig", "no",   "inc", "ltd",  "co",     "corp",
        "mt",   "rev", "gen", "col", "capt", "sgt", "lt",   "dept",   "univ",
        "approx", "est", "al", "cf", "ca",   "pp",  "vol",  "ed",     "eds",
    };
    return abbrev;
}

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 0x20);
    }
    return out;
}

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

// Splits on runs of . ! ? followed by whitespace or end of input. A period
// does not split when the preceding word is a known abbreviation or a single
// letter (initials).
inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    size_t start = 0;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        size_t punct_begin = i;
        bool only_dot = true;
        while (i < text.size() && (text[i] == '.' || text[i] == '!' || text[i] == '?')) {
            if (text[i] != '.') only_dot = false;
            ++i;
        }
        size_t punct_len = i - punct_begin;
        // Absorb a closing quote/bracket so it stays with its sentence.
        while (i < text.size() &&
               (text[i] == '"' || text[i] == '\'' || text[i] == ')' || text[i] == ']')) {
            ++i;
        }
        if (i < text.size() && !detail::is_space(text[i])) continue;
        if (only_dot && punct_len == 1) {
            size_t w_end = punct_begin;
            size_t w_begin = w_end;
            while (w_begin > start && !detail::is_space(text[w_begin - 1])) --w_begin;
            std::string word = detail::ascii_lower(text.substr(w_begin, w_end - w_begin));
            // Word may carry internal dots ("e.g") or be a bare initial ("J").
            if (detail::abbreviations().count(word) || word.size() == 1) continue;
        }
        std::string sentence = detail::trim(text.substr(start, i - start));
        if (!sentence.empty()) sentences.push_back(std::move(sentence));
        start = i;
    }
    std::string tail = detail::trim(text.substr(start));
    if (!tail.empty()) sentences.push_back(std::move(tail));
    return sentences;
}

// A sentence plus the index of the reference that supports it; mark 0 means
// the claim is unsupported (or common sense).
struct MarkedSentence {
    std::string text;
    TokenSeq tokens;
    int mark = 0;

    bool operator==(const MarkedSentence& other) const {
        return text == other.text && tokens == other.tokens && mark == other.mark;
    }
};

inline MarkedSentence make_marked(std::string text, int mark) {
    MarkedSentence s;
    s.tokens = tokenize(text);
    s.text = std::move(text);
    s.mark = mark;
    return s;
}

namespace detail {

// Locates "[k]" at position i when followed by whitespace or end of input.
// Returns mark value and its end position, or k = -1 when not a mark.
inline std::pair<int, size_t> match_mark(std::string_view text, size_t i) {
    if (text[i] != '[') return {-1, i};
    size_t j = i + 1;
    size_t digits = 0;
    long value = 0;
    while (j < text.size() && text[j] >= '0' && text[j] <= '9') {
        value = value * 10 + (text[j] - '0');
        if (value > 1'000'000) return {-1, i};
        ++j;
        ++digits;
    }
    if (digits == 0 || j >= text.size() || text[j] != ']') return {-1, i};
    ++j;
    if (j < text.size() && !is_space(text[j])) return {-1, i};
    return {static_cast<int>(value), j};
}

}  // namespace detail

// Splits text into sentences, stripping each trailing "[k]" into the mark
// field. Sentences without a trailing mark get mark 0. A mark applies to the
// sentence it terminates; preceding unmarked sentences in the same span
// stay at 0.
inline std::vector<MarkedSentence> parse_marks(std::string_view text, int max_ref) {
    std::vector<MarkedSentence> out;
    auto emit_segment = [&](std::string_view segment, int mark) {
        auto sentences = split_sentences(segment);
        for (size_t k = 0; k < sentences.size(); ++k) {
            bool last = (k + 1 == sentences.size());
            out.push_back(make_marked(std::move(sentences[k]), last ? mark : 0));
        }
    };
    size_t start = 0;
    size_t i = 0;
    while (i < text.size()) {
        auto [mark, end] = detail::match_mark(text, i);
        if (mark < 0) {
            ++i;
            continue;
        }
        if (mark > max_ref) {
            throw Error(ErrorCode::MarkOutOfRange,
                        "mark [" + std::to_string(mark) + "] exceeds max_ref " +
                            std::to_string(max_ref));
        }
        emit_segment(text.substr(start, i - start), mark);
        start = end;
        i = end;
    }
    if (start < text.size()) emit_segment(text.substr(start), 0);
    return out;
}

// Inverse of parse_marks on well-formed input: every sentence ends with its
// explicit mark token, including "[0]".
inline std::string serialize_marked(const std::vector<MarkedSentence>& sentences) {
    std::string out;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (i) out.push_back(' ');
        out += sentences[i].text;
        out.push_back('[');
        out += std::to_string(sentences[i].mark);
        out.push_back(']');
    }
    return out;
}

struct StopwordSet {
    std::unordered_set<std::string> words;
    std::string version;

    bool contains(const std::string& w) const { return words.count(w) > 0; }
};

inline StopwordSet stopwords_v1() {
    StopwordSet s;
    s.version = "v1";
    s.words.reserve(detail::kStopwordsV1.size());
    for (auto w : detail::kStopwordsV1) s.words.emplace(w);
    return s;
}

// One token per line; blank lines ignored. The version string is derived
// from the content so scores stay comparable only within the same file.
inline StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open stopword file " + path);
    StopwordSet s;
    std::string line;
    std::string digest;
    while (std::getline(in, line)) {
        std::string w = detail::trim(line);
        if (w.empty()) continue;
        digest += w;
        digest.push_back('\n');
        s.words.insert(std::move(w));
    }
    if (s.words.empty()) throw Error(ErrorCode::EmptyInput, "stopword file is empty: " + path);
    s.version = "file-" + to_hex(fnv1a64(digest)).substr(0, 8);
    return s;
}

// Deduplicated tokens with stopwords removed. Ordered set so every
// downstream iteration is deterministic.
inline std::set<std::string> term_set(const TokenSeq& tokens, const StopwordSet& stop) {
    std::set<std::string> terms;
    for (const auto& t : tokens) {
        if (!stop.contains(t)) terms.insert(t);
    }
    return terms;
}

}  // namespace forge
