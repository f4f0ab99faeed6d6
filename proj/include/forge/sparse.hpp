#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "forge/errors.hpp"
#include "forge/hash.hpp"
#include "forge/text.hpp"

namespace forge {

// Dense token -> id map. Mutable while the corpus vocabulary is being
// collected (single writer), frozen before any concurrent use.
class Vocabulary {
public:
    uint32_t add(const std::string& token) {
        auto it = ids_.find(token);
        if (it != ids_.end()) return it->second;
        if (frozen_) {
            throw Error(ErrorCode::UnknownToken, "'" + token + "' not in frozen vocabulary");
        }
        uint32_t id = static_cast<uint32_t>(tokens_.size());
        ids_.emplace(token, id);
        tokens_.push_back(token);
        return id;
    }

    std::optional<uint32_t> lookup(const std::string& token) const {
        auto it = ids_.find(token);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    size_t size() const { return tokens_.size(); }
    const std::string& token(uint32_t id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    uint64_t content_hash() const {
        uint64_t h = kFnvOffset;
        for (const auto& t : tokens_) {
            h = fnv1a64(t, h);
            h = fnv1a64("\n", h);
        }
        return h;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write vocabulary " + path);
        for (const auto& t : tokens_) out << t << '\n';
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::IoError, "cannot open vocabulary " + path);
        Vocabulary v;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            v.add(line);
        }
        v.freeze();
        return v;
    }

private:
    std::unordered_map<std::string, uint32_t> ids_;
    std::vector<std::string> tokens_;
    bool frozen_ = false;
};

// Vocabulary-indexed map of strictly positive weights, stored sorted by id.
class SparseVector {
public:
    using Entry = std::pair<uint32_t, double>;

    SparseVector() = default;

    // Entries must be unique by id; zero and negative weights are dropped.
    static SparseVector from_entries(std::vector<Entry> entries) {
        SparseVector v;
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        for (const auto& [id, w] : entries) {
            if (w <= 0.0) continue;
            if (!v.entries_.empty() && v.entries_.back().first == id) {
                throw Error(ErrorCode::SchemaError,
                            "duplicate id " + std::to_string(id) + " in sparse vector");
            }
            v.entries_.emplace_back(id, w);
        }
        return v;
    }

    void push_back_sorted(uint32_t id, double weight) {
        if (weight <= 0.0) return;
        if (!entries_.empty() && entries_.back().first >= id) {
            throw Error(ErrorCode::SchemaError, "sparse vector ids must ascend");
        }
        entries_.emplace_back(id, weight);
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    size_t nnz() const { return entries_.size(); }

    double max_weight() const {
        double m = 0.0;
        for (const auto& [id, w] : entries_) m = std::max(m, w);
        return m;
    }

    bool operator==(const SparseVector& other) const { return entries_ == other.entries_; }

private:
    std::vector<Entry> entries_;
};

// Per-token importance rows over the vocabulary; values may be signed.
struct ImportanceMatrix {
    size_t vocab_size = 0;
    std::vector<std::vector<std::pair<uint32_t, double>>> rows;

    size_t row_count() const { return rows.size(); }
};

// Max-pooled log-saturated positive importance: s_j = max_i log(1 + relu(w_ij)).
// Coordinates that pool to zero are not stored.
inline SparseVector pool_sparse(const ImportanceMatrix& m) {
    if (m.rows.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot pool an empty importance matrix");
    }
    std::map<uint32_t, double> pooled;
    for (const auto& row : m.rows) {
        for (const auto& [id, w] : row) {
            if (id >= m.vocab_size) {
                throw Error(ErrorCode::SchemaError,
                            "importance id " + std::to_string(id) + " >= vocab size " +
                                std::to_string(m.vocab_size));
            }
            if (w <= 0.0) continue;
            double v = std::log1p(w);
            auto [it, inserted] = pooled.emplace(id, v);
            if (!inserted && v > it->second) it->second = v;
        }
    }
    SparseVector out;
    for (const auto& [id, v] : pooled) out.push_back_sorted(id, v);
    return out;
}

inline double dot_score(const SparseVector& q, const SparseVector& d) {
    const auto& a = q.entries();
    const auto& b = d.entries();
    double sum = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (a[i].first > b[j].first) {
            ++j;
        } else {
            sum += a[i].second * b[j].second;
            ++i;
            ++j;
        }
    }
    return sum;
}

// Softmax probability of the positive among positive + negatives, computed
// with max subtraction.
inline double rank_probability(double score_pos, const std::vector<double>& scores_neg) {
    if (scores_neg.empty()) return 1.0;
    double m = score_pos;
    for (double s : scores_neg) m = std::max(m, s);
    double denom = std::exp(score_pos - m);
    for (double s : scores_neg) denom += std::exp(s - m);
    return std::exp(score_pos - m) / denom;
}

inline double l1_norm(const SparseVector& v) {
    double sum = 0.0;
    for (const auto& [id, w] : v.entries()) sum += std::fabs(w);
    return sum;
}

inline double l1_norm(const ImportanceMatrix& m) {
    double sum = 0.0;
    for (const auto& row : m.rows) {
        for (const auto& [id, w] : row) sum += std::fabs(w);
    }
    return sum;
}

// Batch mean of per-vector L1 mass.
inline double l1_mean(const std::vector<SparseVector>& batch) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "l1_mean over empty batch");
    double sum = 0.0;
    for (const auto& v : batch) sum += l1_norm(v);
    return sum / static_cast<double>(batch.size());
}

// FLOPS regularizer: sum over vocabulary of squared mean activation across
// the batch. Accumulation runs in ascending id order for reproducibility.
inline double flops_reg(const std::vector<SparseVector>& batch) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "flops_reg over empty batch");
    std::map<uint32_t, double> sums;
    for (const auto& v : batch) {
        for (const auto& [id, w] : v.entries()) sums[id] += w;
    }
    const double n = static_cast<double>(batch.size());
    double out = 0.0;
    for (const auto& [id, s] : sums) {
        double mean = s / n;
        out += mean * mean;
    }
    return out;
}

inline constexpr double kDefaultLambdaQ = 5e-4;
inline constexpr double kDefaultLambdaD = 5e-3;

struct LossBreakdown {
    double rank = 0.0;
    double l1_query = 0.0;
    double flops_doc = 0.0;
    double total = 0.0;
    double lambda_q = kDefaultLambdaQ;
    double lambda_d = kDefaultLambdaD;
};

// One training item: encoded query, its positive, and its explicit negative
// list (mined and/or in-batch; composition is the caller's policy).
struct LossItem {
    SparseVector query;
    SparseVector positive;
    std::vector<SparseVector> negatives;
};

// Contrastive rank loss plus asymmetric sparsity: light L1 on queries, FLOPS
// on documents (positives and negatives together).
inline LossBreakdown loss_breakdown(const std::vector<LossItem>& batch,
                                    double lambda_q = kDefaultLambdaQ,
                                    double lambda_d = kDefaultLambdaD) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "loss_breakdown over empty batch");
    LossBreakdown out;
    out.lambda_q = lambda_q;
    out.lambda_d = lambda_d;

    std::vector<SparseVector> queries;
    std::vector<SparseVector> docs;
    double rank_sum = 0.0;
    for (const auto& item : batch) {
        if (item.negatives.empty()) {
            throw Error(ErrorCode::EmptyBatch, "loss item has no negatives");
        }
        double pos = dot_score(item.query, item.positive);
        std::vector<double> negs;
        negs.reserve(item.negatives.size());
        for (const auto& d : item.negatives) negs.push_back(dot_score(item.query, d));
        rank_sum += -std::log(rank_probability(pos, negs));
        queries.push_back(item.query);
        docs.push_back(item.positive);
        for (const auto& d : item.negatives) docs.push_back(d);
    }
    out.rank = rank_sum / static_cast<double>(batch.size());
    out.l1_query = l1_mean(queries);
    out.flops_doc = flops_reg(docs);
    out.total = out.rank + lambda_q * out.l1_query + lambda_d * out.flops_doc;
    return out;
}

// Document frequencies and length statistics backing the surrogate encoder.
struct CorpusStats {
    size_t doc_count = 0;
    double avg_len = 0.0;
    std::unordered_map<std::string, size_t> df;

    size_t df_of(const std::string& token) const {
        auto it = df.find(token);
        return it == df.end() ? 0 : it->second;
    }
};

// Lucene-style idf; strictly positive for any df <= N.
inline double idf_lucene(size_t doc_count, size_t df) {
    double n = static_cast<double>(doc_count);
    double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

enum class OnUnknown { Allocate, Skip, Error };

// Non-neural stand-in for a learned importance head: each token's row puts
// idf(t) * tf/(tf+1) on the token's own id. Not a trained model; it exists
// so the full retrieval pipeline runs without one.
inline ImportanceMatrix encode_surrogate(const TokenSeq& tokens, const CorpusStats& stats,
                                         Vocabulary& vocab,
                                         OnUnknown on_unknown = OnUnknown::Allocate) {
    std::unordered_map<std::string, size_t> tf;
    for (const auto& t : tokens) ++tf[t];

    ImportanceMatrix m;
    m.rows.reserve(tokens.size());
    for (const auto& t : tokens) {
        std::vector<std::pair<uint32_t, double>> row;
        std::optional<uint32_t> id;
        switch (on_unknown) {
            case OnUnknown::Allocate:
                id = vocab.add(t);
                break;
            case OnUnknown::Skip:
                id = vocab.lookup(t);
                break;
            case OnUnknown::Error:
                id = vocab.lookup(t);
                if (!id) {
                    throw Error(ErrorCode::UnknownToken, "'" + t + "' not in vocabulary");
                }
                break;
        }
        if (id) {
            double sat = static_cast<double>(tf[t]) / (static_cast<double>(tf[t]) + 1.0);
            row.emplace_back(*id, idf_lucene(stats.doc_count, stats.df_of(t)) * sat);
        }
        m.rows.push_back(std::move(row));
    }
    m.vocab_size = vocab.size();
    return m;
}

// Importance rows from JSONL, one {"row": i, "entries": [[id, value], ...]}
// object per line; rows must be contiguous from 0 and every id < vocab_size.
inline ImportanceMatrix import_importance(std::istream& in, size_t vocab_size) {
    ImportanceMatrix m;
    m.vocab_size = vocab_size;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("row") || !j.contains("entries")) {
            throw Error(ErrorCode::SchemaError,
                        "line " + std::to_string(line_no) + ": expected {row, entries}");
        }
        if (j["row"].get<long long>() != static_cast<long long>(m.rows.size())) {
            throw Error(ErrorCode::SchemaError,
                        "line " + std::to_string(line_no) + ": rows must be contiguous from 0");
        }
        std::vector<std::pair<uint32_t, double>> row;
        for (const auto& e : j["entries"]) {
            if (!e.is_array() || e.size() != 2) {
                throw Error(ErrorCode::SchemaError,
                            "line " + std::to_string(line_no) + ": entry must be [id, value]");
            }
            long long id = e[0].get<long long>();
            if (id < 0 || static_cast<size_t>(id) >= vocab_size) {
                throw Error(ErrorCode::SchemaError,
                            "line " + std::to_string(line_no) + ": id " + std::to_string(id) +
                                " out of range for vocab size " + std::to_string(vocab_size));
            }
            row.emplace_back(static_cast<uint32_t>(id), e[1].get<double>());
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

inline ImportanceMatrix import_importance(const std::string& path, size_t vocab_size) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open importance file " + path);
    return import_importance(in, vocab_size);
}

}  // namespace forge
