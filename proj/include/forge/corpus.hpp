#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/errors.hpp"
#include "forge/rng.hpp"
#include "forge/text.hpp"

namespace forge {

// A page title (the query), its first-section target text as marked
// sentences, and the ids of the documents it cites.
struct WikiRecord {
    std::string id;
    std::string title;
    std::string first_section;
    std::vector<MarkedSentence> sentences;
    std::vector<std::string> citations;
};

enum class RejectReason { TooShort, NonEnglish, EmptyAfterCleaning };

inline const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::TooShort: return "TooShort";
        case RejectReason::NonEnglish: return "NonEnglish";
        case RejectReason::EmptyAfterCleaning: return "EmptyAfterCleaning";
    }
    return "Unknown";
}

struct ReferenceDoc {
    std::string id;
    std::string url;
    std::string raw_text;
    std::optional<std::string> cleaned_text;
    std::optional<RejectReason> rejection;
};

// A sentence-aligned window over a cleaned reference, with its term-recall
// score against the citing context once scored.
struct PassageCandidate {
    std::string doc_id;
    size_t begin_sentence = 0;
    size_t end_sentence = 0;  // exclusive
    TokenSeq tokens;
    std::string text;
    double pst = 0.0;
};

struct RetrievalExample {
    std::string query;
    std::string positive_id;
    std::vector<std::string> negative_ids;
    std::vector<int> negative_ranks;  // 1-based ranks in the mined ranking
};

struct GenerationExample {
    std::string query;
    std::vector<PassageCandidate> refs;  // citation order, at most max_refs
    std::vector<MarkedSentence> target;
    std::vector<std::string> fid_inputs;
};

struct WarmupPair {
    std::string query;
    std::string ref_id;
    std::string ref_text;
    std::string sentence;
};

namespace detail {

inline std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

// Removes {{...}} blocks, tracking nesting; an unclosed block is dropped
// through end of input.
inline std::string strip_templates(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    int depth = 0;
    size_t i = 0;
    while (i < s.size()) {
        if (i + 1 < s.size() && s[i] == '{' && s[i + 1] == '{') {
            ++depth;
            i += 2;
            continue;
        }
        if (depth > 0 && i + 1 < s.size() && s[i] == '}' && s[i + 1] == '}') {
            --depth;
            i += 2;
            continue;
        }
        if (depth == 0) out.push_back(s[i]);
        ++i;
    }
    return out;
}

inline bool has_prefix_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        char a = s[i], b = prefix[i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a + 0x20);
        if (b >= 'A' && b <= 'Z') b = static_cast<char>(b + 0x20);
        if (a != b) return false;
    }
    return true;
}

// [[File:...]] and [[Image:...]] blocks are dropped whole (captions may nest
// further [[...]]); other [[target|label]] links keep the label, [[target]]
// keeps the target.
inline std::string strip_wiki_links(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (i + 1 < s.size() && s[i] == '[' && s[i + 1] == '[') {
            size_t j = i + 2;
            int depth = 1;
            size_t inner_end = std::string_view::npos;
            while (j < s.size()) {
                if (j + 1 < s.size() && s[j] == '[' && s[j + 1] == '[') {
                    depth += 1;
                    j += 2;
                } else if (j + 1 < s.size() && s[j] == ']' && s[j + 1] == ']') {
                    depth -= 1;
                    j += 2;
                    if (depth == 0) {
                        inner_end = j - 2;
                        break;
                    }
                } else {
                    ++j;
                }
            }
            std::string_view inner = inner_end == std::string_view::npos
                                         ? s.substr(i + 2)
                                         : s.substr(i + 2, inner_end - (i + 2));
            if (has_prefix_ci(inner, "file:") || has_prefix_ci(inner, "image:")) {
                i = j;
                continue;
            }
            size_t bar = inner.rfind('|');
            std::string_view kept = bar == std::string_view::npos ? inner : inner.substr(bar + 1);
            out += strip_wiki_links(kept);
            i = j;
            continue;
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

// Control characters and decorative symbol runs ("====", "-----", "***")
// become spaces.
inline std::string strip_symbol_noise(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c < 0x20 && c != '\n' && c != '\t') {
            out.push_back(' ');
            ++i;
            continue;
        }
        bool symbol = c < 0x80 && !std::isalnum(c) && !is_space(static_cast<char>(c));
        if (symbol) {
            size_t run = 1;
            while (i + run < s.size() && s[i + run] == static_cast<char>(c)) ++run;
            if (run >= 3) {
                out.push_back(' ');
                i += run;
                continue;
            }
        }
        out.push_back(s[i]);
        ++i;
    }
    return out;
}

inline bool is_pure_markup_line(std::string_view line) {
    size_t i = 0;
    bool saw_tag = false;
    while (i < line.size()) {
        if (is_space(line[i])) {
            ++i;
            continue;
        }
        if (line[i] != '<') return false;
        size_t close = line.find('>', i);
        if (close == std::string_view::npos) return false;
        saw_tag = true;
        i = close + 1;
    }
    return saw_tag;
}

inline bool is_table_line(std::string_view line) {
    size_t separators = 0;
    for (char c : line) {
        if (c == '|' || c == '\t') ++separators;
    }
    return separators >= 3;
}

inline bool is_url_word(std::string_view w) {
    return has_prefix_ci(w, "http://") || has_prefix_ci(w, "https://") ||
           has_prefix_ci(w, "www.");
}

inline std::string strip_url_words(std::string_view line) {
    std::string out;
    size_t i = 0;
    while (i < line.size()) {
        if (is_space(line[i])) {
            out.push_back(line[i]);
            ++i;
            continue;
        }
        size_t j = i;
        while (j < line.size() && !is_space(line[j])) ++j;
        std::string_view word = line.substr(i, j - i);
        if (!is_url_word(word)) out += word;
        i = j;
    }
    return out;
}

inline bool token_is_latin(std::string_view token) {
    size_t i = 0;
    while (i < token.size()) {
        uint32_t cp = decode_utf8(token, i);
        if (!is_latin_word_cp(cp)) return false;
    }
    return true;
}

}  // namespace detail

inline const std::vector<std::string>& default_boilerplate() {
    static const std::vector<std::string> phrases = {
        "You can help Wikipedia by expanding it",
        "This article is a stub",
        "may refer to:",
    };
    return phrases;
}

// Page-side cleaning: template blocks, file/image links, control and
// symbol-art noise, boilerplate sentences; whitespace collapsed to single
// spaces.
inline std::string clean_wiki(std::string_view raw,
                              const std::vector<std::string>& boilerplate = default_boilerplate()) {
    std::string text = detail::strip_templates(raw);
    text = detail::strip_wiki_links(text);
    text = detail::strip_symbol_noise(text);
    text = detail::normalize_ws(text);
    auto sentences = split_sentences(text);
    std::string out;
    for (auto& sentence : sentences) {
        bool drop = false;
        for (const auto& phrase : boilerplate) {
            if (sentence.find(phrase) != std::string::npos) {
                drop = true;
                break;
            }
        }
        if (drop) continue;
        if (!out.empty()) out.push_back(' ');
        out += sentence;
    }
    return out;
}

struct CleanResult {
    std::optional<std::string> text;
    std::optional<RejectReason> rejection;

    bool ok() const { return text.has_value(); }
};

inline constexpr size_t kMinReferenceWords = 16;
inline constexpr double kMaxNonEnglishRatio = 0.3;
inline constexpr size_t kMaxSentenceTokens = 256;

// Reference-side cleaning. Rejects short or mostly non-English documents,
// then strips markup-only lines, table-like lines, bare URLs, and over-long
// sentences; rejects again if too little text survives.
inline CleanResult clean_reference(std::string_view raw) {
    TokenSeq tokens = tokenize(raw);
    if (tokens.size() < kMinReferenceWords) {
        return {std::nullopt, RejectReason::TooShort};
    }
    size_t non_english = 0;
    for (const auto& t : tokens) {
        if (!detail::token_is_latin(t)) ++non_english;
    }
    if (static_cast<double>(non_english) / static_cast<double>(tokens.size()) >
        kMaxNonEnglishRatio) {
        return {std::nullopt, RejectReason::NonEnglish};
    }

    std::string kept_lines;
    size_t pos = 0;
    std::string_view sv(raw);
    while (pos <= sv.size()) {
        size_t nl = sv.find('\n', pos);
        std::string_view line = sv.substr(pos, nl == std::string_view::npos ? sv.size() - pos
                                                                            : nl - pos);
        if (!detail::is_pure_markup_line(line) && !detail::is_table_line(line)) {
            kept_lines += detail::strip_url_words(line);
            kept_lines.push_back(' ');
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }

    std::string normalized = detail::normalize_ws(kept_lines);
    std::string out;
    for (auto& sentence : split_sentences(normalized)) {
        if (tokenize(sentence).size() > kMaxSentenceTokens) continue;
        if (!out.empty()) out.push_back(' ');
        out += sentence;
    }
    if (tokenize(out).size() < kMinReferenceWords) {
        return {std::nullopt, RejectReason::EmptyAfterCleaning};
    }
    return {std::move(out), std::nullopt};
}

inline ReferenceDoc clean_doc(ReferenceDoc doc) {
    CleanResult r = clean_reference(doc.raw_text);
    doc.cleaned_text = std::move(r.text);
    doc.rejection = r.rejection;
    return doc;
}

using TermSet = std::set<std::string>;

// Term recall of a reference: |((Q u T) n V) - S| / |T - S|. May exceed 1
// because query terms outside T can enter the numerator.
inline double compute_pst(const TermSet& query_terms, const TermSet& sentence_terms,
                          const TermSet& reference_terms, const StopwordSet& stop) {
    size_t denom = 0;
    for (const auto& t : sentence_terms) {
        if (!stop.contains(t)) ++denom;
    }
    if (denom == 0) {
        throw Error(ErrorCode::DegenerateSentence, "sentence has no non-stopword terms");
    }
    size_t numer = 0;
    for (const auto& v : reference_terms) {
        if (stop.contains(v)) continue;
        if (query_terms.count(v) || sentence_terms.count(v)) ++numer;
    }
    return static_cast<double>(numer) / static_cast<double>(denom);
}

inline constexpr size_t kDefaultMaxPassageTokens = 256;

// Sentence-aligned sliding windows, one starting at every sentence index;
// each extends greedily while the token budget holds. A single over-long
// sentence is truncated to the budget.
inline std::vector<PassageCandidate> window_passages(const ReferenceDoc& doc,
                                                     size_t max_tokens = kDefaultMaxPassageTokens) {
    std::vector<PassageCandidate> windows;
    if (!doc.cleaned_text) return windows;
    auto sentences = split_sentences(*doc.cleaned_text);
    if (sentences.empty()) return windows;

    std::vector<TokenSeq> sentence_tokens(sentences.size());
    for (size_t i = 0; i < sentences.size(); ++i) sentence_tokens[i] = tokenize(sentences[i]);

    for (size_t start = 0; start < sentences.size(); ++start) {
        PassageCandidate w;
        w.doc_id = doc.id;
        w.begin_sentence = start;
        size_t total = 0;
        size_t end = start;
        while (end < sentences.size() && total + sentence_tokens[end].size() <= max_tokens) {
            total += sentence_tokens[end].size();
            ++end;
        }
        if (end == start) {
            // Over-long first sentence: truncate.
            end = start + 1;
            const TokenSeq& toks = sentence_tokens[start];
            w.tokens.assign(toks.begin(), toks.begin() + static_cast<long>(max_tokens));
            w.text = join_tokens(w.tokens);
        } else {
            for (size_t i = start; i < end; ++i) {
                w.tokens.insert(w.tokens.end(), sentence_tokens[i].begin(),
                                sentence_tokens[i].end());
                if (!w.text.empty()) w.text.push_back(' ');
                w.text += sentences[i];
            }
        }
        w.end_sentence = end;
        windows.push_back(std::move(w));
    }
    return windows;
}

// Scores every window of a cleaned reference against the union of the
// citing sentences' terms and returns the argmax; ties break toward the
// earliest start.
inline PassageCandidate select_supporting_passage(const TokenSeq& query_tokens,
                                                  const std::vector<TokenSeq>& citing_sentences,
                                                  const ReferenceDoc& doc,
                                                  const StopwordSet& stop,
                                                  size_t max_tokens = kDefaultMaxPassageTokens) {
    auto windows = window_passages(doc, max_tokens);
    if (windows.empty()) {
        throw Error(ErrorCode::NoValidPassage, "reference has no passages: " + doc.id);
    }
    TermSet query_terms = term_set(query_tokens, stop);
    TermSet sentence_terms;
    for (const auto& s : citing_sentences) {
        for (const auto& t : term_set(s, stop)) sentence_terms.insert(t);
    }
    if (sentence_terms.empty()) {
        throw Error(ErrorCode::NoValidPassage,
                    "all citing sentences are stopword-only for doc " + doc.id);
    }
    size_t best = 0;
    double best_pst = -1.0;
    for (size_t i = 0; i < windows.size(); ++i) {
        TermSet v = term_set(windows[i].tokens, stop);
        double pst = compute_pst(query_terms, sentence_terms, v, stop);
        windows[i].pst = pst;
        if (pst > best_pst) {
            best_pst = pst;
            best = i;
        }
    }
    return windows[best];
}

// Retrospective mark assignment: every unmarked sentence gets the 1-based
// mark of the highest-P_ST passage when that score clears rho, else stays
// at 0. Non-zero marks are never changed.
inline std::vector<MarkedSentence> assign_marks(const TokenSeq& query_tokens,
                                                const std::vector<MarkedSentence>& sentences,
                                                const std::vector<PassageCandidate>& passages,
                                                const StopwordSet& stop, double rho) {
    TermSet query_terms = term_set(query_tokens, stop);
    std::vector<TermSet> passage_terms(passages.size());
    for (size_t k = 0; k < passages.size(); ++k) {
        passage_terms[k] = term_set(passages[k].tokens, stop);
    }
    std::vector<MarkedSentence> out = sentences;
    for (auto& sentence : out) {
        if (sentence.mark != 0) continue;
        TermSet t = term_set(sentence.tokens, stop);
        if (t.empty()) continue;  // degenerate: keep mark 0
        int best_mark = 0;
        double best_pst = -1.0;
        for (size_t k = 0; k < passages.size(); ++k) {
            double pst = compute_pst(query_terms, t, passage_terms[k], stop);
            if (pst > best_pst) {
                best_pst = pst;
                best_mark = static_cast<int>(k) + 1;
            }
        }
        if (best_mark != 0 && best_pst > rho) sentence.mark = best_mark;
    }
    return out;
}

inline constexpr int kNegativeRankLow = 30;   // 1-based, inclusive
inline constexpr int kNegativeRankHigh = 50;  // 1-based, inclusive
inline constexpr size_t kNumNegatives = 4;

// Mines distinct negatives from a 1-based rank band of a BM25 ranking,
// sampling uniformly without replacement under the given seed. When the band
// holds too few candidates, tops up deterministically from just below it.
inline RetrievalExample build_retrieval_example(const std::string& query,
                                                const std::string& positive_id,
                                                const std::vector<std::string>& bm25_ranking,
                                                uint64_t seed,
                                                int rank_low = kNegativeRankLow,
                                                int rank_high = kNegativeRankHigh,
                                                size_t num_negatives = kNumNegatives) {
    std::vector<std::string> ranking;
    ranking.reserve(bm25_ranking.size());
    for (const auto& id : bm25_ranking) {
        if (id != positive_id) ranking.push_back(id);
    }
    if (ranking.size() < num_negatives) {
        throw Error(ErrorCode::InsufficientCandidates,
                    "only " + std::to_string(ranking.size()) + " non-positive candidates");
    }

    RetrievalExample out;
    out.query = query;
    out.positive_id = positive_id;

    const size_t lo = static_cast<size_t>(rank_low) - 1;
    const size_t hi = std::min(static_cast<size_t>(rank_high), ranking.size());
    std::vector<size_t> band;
    for (size_t i = lo; i < hi; ++i) band.push_back(i);

    std::vector<size_t> picked;
    if (band.size() >= num_negatives) {
        SplitMix64 rng(seed);
        for (size_t j : sample_without_replacement(rng, band.size(), num_negatives)) {
            picked.push_back(band[j]);
        }
    } else {
        picked = band;
        for (size_t r = std::min(static_cast<size_t>(rank_low) - 1, ranking.size());
             r > 0 && picked.size() < num_negatives; --r) {
            picked.push_back(r - 1);
        }
    }
    for (size_t idx : picked) {
        out.negative_ids.push_back(ranking[idx]);
        out.negative_ranks.push_back(static_cast<int>(idx) + 1);
    }
    return out;
}

// Per-reference generator inputs: "[query] q [ref_i] v_i" with 1-based i.
inline std::vector<std::string> format_fid_inputs(const std::string& query,
                                                  const std::vector<std::string>& ref_texts) {
    std::vector<std::string> out;
    out.reserve(ref_texts.size());
    for (size_t i = 0; i < ref_texts.size(); ++i) {
        out.push_back("[query] " + query + " [ref_" + std::to_string(i + 1) + "] " +
                      ref_texts[i]);
    }
    return out;
}

struct FidInput {
    std::string query;
    int ref_index = 0;  // 1-based
    std::string ref_text;
};

inline FidInput parse_fid_input(std::string_view s) {
    constexpr std::string_view query_tag = "[query] ";
    if (s.substr(0, query_tag.size()) != query_tag) {
        throw Error(ErrorCode::SchemaError, "fid input missing [query] tag");
    }
    size_t ref_tag = s.find(" [ref_", query_tag.size());
    if (ref_tag == std::string_view::npos) {
        throw Error(ErrorCode::SchemaError, "fid input missing [ref_i] tag");
    }
    size_t idx_begin = ref_tag + 6;
    size_t idx_end = idx_begin;
    while (idx_end < s.size() && s[idx_end] >= '0' && s[idx_end] <= '9') ++idx_end;
    if (idx_end == idx_begin || idx_end + 1 >= s.size() || s[idx_end] != ']' ||
        s[idx_end + 1] != ' ') {
        throw Error(ErrorCode::SchemaError, "fid input has malformed [ref_i] tag");
    }
    FidInput out;
    out.query = std::string(s.substr(query_tag.size(), ref_tag - query_tag.size()));
    out.ref_index = std::stoi(std::string(s.substr(idx_begin, idx_end - idx_begin)));
    out.ref_text = std::string(s.substr(idx_end + 2));
    return out;
}

inline constexpr size_t kMaxRefs = 5;

// Assembles a generation example from a record and the per-citation selected
// passages (absent = reference was rejected or had no valid passage). Keeps
// at most max_refs passages in citation order; marks pointing at dropped or
// truncated citations are zeroed before retrospective assignment.
inline GenerationExample build_generation_example(
    const WikiRecord& record, const std::vector<std::optional<PassageCandidate>>& per_citation,
    const StopwordSet& stop, double rho, size_t max_refs = kMaxRefs) {
    GenerationExample out;
    out.query = record.title;

    std::vector<int> remap(per_citation.size() + 1, 0);
    for (size_t c = 0; c < per_citation.size(); ++c) {
        if (!per_citation[c]) continue;
        if (out.refs.size() >= max_refs) break;
        out.refs.push_back(*per_citation[c]);
        remap[c + 1] = static_cast<int>(out.refs.size());
    }

    std::vector<MarkedSentence> remapped = record.sentences;
    for (auto& s : remapped) {
        if (s.mark > 0) {
            s.mark = s.mark <= static_cast<int>(per_citation.size()) ? remap[s.mark] : 0;
        }
    }
    TokenSeq query_tokens = tokenize(record.title);
    out.target = assign_marks(query_tokens, remapped, out.refs, stop, rho);

    std::vector<std::string> ref_texts;
    for (const auto& r : out.refs) ref_texts.push_back(r.text);
    out.fid_inputs = format_fid_inputs(out.query, ref_texts);
    return out;
}

// One (query, reference, sentence) pair per target sentence whose mark is
// non-zero.
inline std::vector<WarmupPair> build_warmup_pairs(const GenerationExample& example) {
    std::vector<WarmupPair> out;
    for (const auto& s : example.target) {
        if (s.mark == 0) continue;
        const auto& ref = example.refs[static_cast<size_t>(s.mark) - 1];
        out.push_back(WarmupPair{example.query, ref.doc_id, ref.text, s.text});
    }
    return out;
}

}  // namespace forge
