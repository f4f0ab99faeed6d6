#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/text.hpp"

namespace forge {

struct QrelSet {
    std::map<std::string, std::set<std::string>> relevant;
};

struct MetricReport {
    std::map<std::string, double> values;
    size_t query_count = 0;
};

// Macro-averaged R@k, P@1, MRR, and MAP over ranked runs.
inline MetricReport retrieval_metrics(const std::map<std::string, std::vector<std::string>>& runs,
                                      const QrelSet& qrels,
                                      const std::vector<size_t>& cutoffs = {1, 5, 10, 20}) {
    std::string missing;
    for (const auto& [qid, ranking] : runs) {
        auto it = qrels.relevant.find(qid);
        if (it == qrels.relevant.end() || it->second.empty()) {
            if (!missing.empty()) missing += ", ";
            missing += qid;
        }
    }
    if (!missing.empty()) {
        throw Error(ErrorCode::MissingQrels, missing);
    }
    if (runs.empty()) {
        throw Error(ErrorCode::EmptyInput, "no queries to score");
    }

    MetricReport report;
    report.query_count = runs.size();
    std::map<size_t, double> recall_sums;
    double p1_sum = 0.0, mrr_sum = 0.0, map_sum = 0.0;

    for (const auto& [qid, ranking] : runs) {
        const auto& rel = qrels.relevant.at(qid);
        double rel_count = static_cast<double>(rel.size());

        for (size_t k : cutoffs) {
            size_t found = 0;
            for (size_t i = 0; i < ranking.size() && i < k; ++i) {
                if (rel.count(ranking[i])) ++found;
            }
            recall_sums[k] += static_cast<double>(found) / rel_count;
        }
        if (!ranking.empty() && rel.count(ranking[0])) p1_sum += 1.0;

        double ap = 0.0;
        size_t found = 0;
        for (size_t i = 0; i < ranking.size(); ++i) {
            if (!rel.count(ranking[i])) continue;
            ++found;
            if (found == 1) mrr_sum += 1.0 / static_cast<double>(i + 1);
            ap += static_cast<double>(found) / static_cast<double>(i + 1);
        }
        map_sum += ap / rel_count;
    }

    const double n = static_cast<double>(report.query_count);
    for (size_t k : cutoffs) {
        report.values["R@" + std::to_string(k)] = recall_sums[k] / n;
    }
    report.values["P@1"] = p1_sum / n;
    report.values["MRR"] = mrr_sum / n;
    report.values["MAP"] = map_sum / n;
    return report;
}

namespace detail {

inline std::map<std::vector<std::string>, size_t> ngram_counts(const TokenSeq& tokens, size_t n) {
    std::map<std::vector<std::string>, size_t> counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                        tokens.begin() + static_cast<long>(i + n))] += 1;
    }
    return counts;
}

}  // namespace detail

// Sentence BLEU: geometric mean of clipped n-gram precisions up to max_n
// with brevity penalty; +1/+1 smoothing on numerator and denominator for
// n >= 2.
inline double bleu(const TokenSeq& candidate, const std::vector<TokenSeq>& references,
                   size_t max_n = 4) {
    if (candidate.empty()) {
        throw Error(ErrorCode::EmptyCandidate, "BLEU candidate is empty");
    }
    if (references.empty()) {
        throw Error(ErrorCode::EmptyInput, "BLEU needs at least one reference");
    }

    double log_precision_sum = 0.0;
    for (size_t n = 1; n <= max_n; ++n) {
        auto cand_counts = detail::ngram_counts(candidate, n);
        size_t total = 0;
        for (const auto& [gram, c] : cand_counts) total += c;

        size_t matched = 0;
        for (const auto& [gram, c] : cand_counts) {
            size_t best_ref = 0;
            for (const auto& ref : references) {
                auto ref_counts = detail::ngram_counts(ref, n);
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) best_ref = std::max(best_ref, it->second);
            }
            matched += std::min(c, best_ref);
        }

        double p;
        if (n == 1) {
            if (matched == 0) return 0.0;
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        }
        log_precision_sum += std::log(p);
    }

    // Closest reference length; ties go to the shorter one.
    size_t c = candidate.size();
    size_t r = references[0].size();
    for (const auto& ref : references) {
        size_t d_new = ref.size() > c ? ref.size() - c : c - ref.size();
        size_t d_old = r > c ? r - c : c - r;
        if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
    }
    double bp = c >= r ? 1.0
                       : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_precision_sum / static_cast<double>(max_n));
}

inline size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

struct RougeL {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// LCS-based ROUGE-L with symmetric F (beta = 1); zeros on empty input.
inline RougeL rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    RougeL out;
    if (candidate.empty() || reference.empty()) return out;
    double lcs = static_cast<double>(lcs_length(candidate, reference));
    out.precision = lcs / static_cast<double>(candidate.size());
    out.recall = lcs / static_cast<double>(reference.size());
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

}  // namespace forge
