#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/text.hpp"

namespace forge {

// Generated (or target) text whose sentences carry reference marks, paired
// with the 1-based reference passages the marks point at.
struct CitedText {
    std::vector<MarkedSentence> sentences;
    std::vector<TokenSeq> refs;
};

struct ReferScoreReport {
    std::vector<std::pair<size_t, double>> per_sentence;  // (sentence index, ratio)
    std::optional<double> mean;
    size_t n = 0;  // scored sentences
};

// |(T n V) - S| / |V - S|: how much of the reference's content the sentence
// actually quotes.
inline double overlap_ratio(const TokenSeq& sentence, const TokenSeq& reference,
                            const StopwordSet& stop) {
    auto t = term_set(sentence, stop);
    auto v = term_set(reference, stop);
    if (v.empty()) {
        throw Error(ErrorCode::DegenerateReference, "reference has no non-stopword terms");
    }
    size_t hit = 0;
    for (const auto& term : v) {
        if (t.count(term)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(v.size());
}

namespace detail {

inline bool ref_degenerate(const TokenSeq& reference, const StopwordSet& stop) {
    return term_set(reference, stop).empty();
}

}  // namespace detail

// Mean overlap ratio over sentences with a non-zero mark, each scored
// against its marked reference. Sentences whose marked reference is
// degenerate (all stopwords) are skipped and excluded from n.
inline ReferScoreReport refer_score(const CitedText& text, const StopwordSet& stop) {
    ReferScoreReport report;
    double sum = 0.0;
    for (size_t i = 0; i < text.sentences.size(); ++i) {
        const auto& s = text.sentences[i];
        if (s.mark == 0) continue;
        const auto& ref = text.refs.at(static_cast<size_t>(s.mark) - 1);
        if (detail::ref_degenerate(ref, stop)) continue;
        double ratio = overlap_ratio(s.tokens, ref, stop);
        report.per_sentence.emplace_back(i, ratio);
        sum += ratio;
        report.n += 1;
    }
    if (report.n > 0) report.mean = sum / static_cast<double>(report.n);
    return report;
}

// Relabels every marked sentence to the reference with the largest overlap
// ratio. Ties keep the original mark when it attains the max, otherwise the
// lowest reference id wins. Zero marks and sentences whose marked reference
// is degenerate are left untouched.
inline CitedText red_relabel(const CitedText& text, const StopwordSet& stop) {
    if (text.refs.empty()) {
        throw Error(ErrorCode::EmptyInput, "red_relabel requires at least one reference");
    }
    CitedText out = text;
    for (auto& s : out.sentences) {
        if (s.mark == 0) continue;
        if (detail::ref_degenerate(text.refs.at(static_cast<size_t>(s.mark) - 1), stop)) continue;
        int best_mark = 0;
        double best_ratio = -1.0;
        for (size_t r = 0; r < text.refs.size(); ++r) {
            if (detail::ref_degenerate(text.refs[r], stop)) continue;
            double ratio = overlap_ratio(s.tokens, text.refs[r], stop);
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_mark = static_cast<int>(r) + 1;
            } else if (ratio == best_ratio && static_cast<int>(r) + 1 == s.mark) {
                best_mark = s.mark;
            }
        }
        if (best_mark != 0) s.mark = best_mark;
    }
    return out;
}

}  // namespace forge
