#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/parallel.hpp"
#include "forge/sparse.hpp"

namespace forge {

enum class IndexMode : uint8_t {
    TermFrequency = 0,  // postings hold raw counts; BM25 scoring
    PooledWeights = 1,  // postings hold pooled sparse weights; dot scoring
};

struct Posting {
    uint32_t doc_id;
    double weight;

    bool operator==(const Posting& other) const {
        return doc_id == other.doc_id && weight == other.weight;
    }
};

struct SearchHit {
    uint32_t doc_id = 0;
    double score = 0.0;
    int rank = 0;  // 1-based
};

struct BM25Params {
    double k1 = 0.9;
    double b = 0.4;
};

inline constexpr uint32_t kIndexFormatVersion = 1;

// Immutable after build/load; concurrent searches need no synchronization.
class InvertedIndex {
public:
    IndexMode mode() const { return mode_; }
    size_t doc_count() const { return doc_lengths_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    uint32_t doc_length(uint32_t doc) const { return doc_lengths_.at(doc); }
    const Vocabulary& vocab() const { return vocab_; }
    size_t term_count() const { return postings_.size(); }
    const std::vector<Posting>& postings(uint32_t term) const { return postings_.at(term); }
    size_t df(uint32_t term) const { return postings_.at(term).size(); }

    bool has_external_ids() const { return !external_ids_.empty(); }
    const std::string& external_id(uint32_t doc) const { return external_ids_.at(doc); }
    const std::vector<std::string>& external_ids() const { return external_ids_; }

    size_t posting_entry_count() const {
        size_t n = 0;
        for (const auto& p : postings_) n += p.size();
        return n;
    }

    // Reassembles the stored sparse vector of one document.
    SparseVector doc_vector(uint32_t doc) const;

    friend InvertedIndex build_index(const std::vector<std::pair<uint32_t, SparseVector>>& docs,
                                     IndexMode mode, Vocabulary vocab,
                                     std::vector<std::string> external_ids, size_t threads);
    friend void save_index(const InvertedIndex& index, const std::string& path);
    friend InvertedIndex load_index(const std::string& path);

private:
    IndexMode mode_ = IndexMode::TermFrequency;
    std::vector<uint32_t> doc_lengths_;
    double avg_doc_len_ = 0.0;
    Vocabulary vocab_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::string> external_ids_;
};

inline SparseVector InvertedIndex::doc_vector(uint32_t doc) const {
    std::vector<SparseVector::Entry> entries;
    for (uint32_t t = 0; t < postings_.size(); ++t) {
        const auto& list = postings_[t];
        auto it = std::lower_bound(list.begin(), list.end(), doc,
                                   [](const Posting& p, uint32_t d) { return p.doc_id < d; });
        if (it != list.end() && it->doc_id == doc) entries.emplace_back(t, it->weight);
    }
    return SparseVector::from_entries(std::move(entries));
}

// Builds the index from (doc_id, vector) pairs. Doc ids must be unique and
// dense in [0, N). Sharded over contiguous id ranges and merged in shard
// order, so the layout is identical for any thread count.
inline InvertedIndex build_index(const std::vector<std::pair<uint32_t, SparseVector>>& docs,
                                 IndexMode mode, Vocabulary vocab,
                                 std::vector<std::string> external_ids = {}, size_t threads = 0) {
    const size_t n = docs.size();
    if (!external_ids.empty() && external_ids.size() != n) {
        throw Error(ErrorCode::InvalidDocId, "external id table size does not match doc count");
    }

    std::vector<const SparseVector*> by_id(n, nullptr);
    for (const auto& [id, vec] : docs) {
        if (id >= n) {
            throw Error(ErrorCode::InvalidDocId,
                        "doc id " + std::to_string(id) + " not dense in [0, " +
                            std::to_string(n) + ")");
        }
        if (by_id[id] != nullptr) {
            throw Error(ErrorCode::DuplicateDocId, "doc id " + std::to_string(id));
        }
        if (!vec.entries().empty() && vec.entries().back().first >= vocab.size()) {
            throw Error(ErrorCode::SchemaError,
                        "term id " + std::to_string(vec.entries().back().first) +
                            " outside vocabulary");
        }
        by_id[id] = &vec;
    }

    InvertedIndex index;
    index.mode_ = mode;
    index.vocab_ = std::move(vocab);
    index.external_ids_ = std::move(external_ids);
    index.doc_lengths_.assign(n, 0);
    index.postings_.assign(index.vocab_.size(), {});

    if (threads == 0) threads = thread_budget();
    threads = std::max<size_t>(1, std::min(threads, std::max<size_t>(n, 1)));
    const size_t chunk = n == 0 ? 1 : (n + threads - 1) / threads;
    const size_t shards = n == 0 ? 0 : (n + chunk - 1) / chunk;

    std::vector<std::vector<std::vector<Posting>>> shard_postings(
        shards, std::vector<std::vector<Posting>>(index.vocab_.size()));
    parallel_for(
        shards,
        [&](size_t s) {
            size_t lo = s * chunk;
            size_t hi = std::min(n, lo + chunk);
            for (size_t d = lo; d < hi; ++d) {
                const SparseVector& v = *by_id[d];
                double mass = 0.0;
                for (const auto& [term, w] : v.entries()) {
                    shard_postings[s][term].push_back(
                        Posting{static_cast<uint32_t>(d), w});
                    mass += w;
                }
                index.doc_lengths_[d] =
                    mode == IndexMode::TermFrequency
                        ? static_cast<uint32_t>(std::llround(mass))
                        : static_cast<uint32_t>(v.nnz());
            }
        },
        threads);

    // Contiguous ascending shards concatenate into doc-id-sorted lists.
    for (size_t term = 0; term < index.postings_.size(); ++term) {
        size_t total = 0;
        for (size_t s = 0; s < shards; ++s) total += shard_postings[s][term].size();
        index.postings_[term].reserve(total);
        for (size_t s = 0; s < shards; ++s) {
            auto& src = shard_postings[s][term];
            index.postings_[term].insert(index.postings_[term].end(), src.begin(), src.end());
            src.clear();
            src.shrink_to_fit();
        }
    }

    uint64_t total_len = 0;
    for (uint32_t l : index.doc_lengths_) total_len += l;
    index.avg_doc_len_ = n == 0 ? 0.0 : static_cast<double>(total_len) / static_cast<double>(n);
    return index;
}

namespace detail {

// Bounded top-k holder ordered by (score desc, doc_id asc).
class TopK {
public:
    explicit TopK(size_t k) : k_(k) {}

    void offer(uint32_t doc_id, double score) {
        if (k_ == 0) return;
        if (heap_.size() < k_) {
            heap_.push_back({doc_id, score});
            std::push_heap(heap_.begin(), heap_.end(), worse_first);
            return;
        }
        const auto& worst = heap_.front();
        if (score > worst.score || (score == worst.score && doc_id < worst.doc_id)) {
            std::pop_heap(heap_.begin(), heap_.end(), worse_first);
            heap_.back() = {doc_id, score};
            std::push_heap(heap_.begin(), heap_.end(), worse_first);
        }
    }

    std::vector<SearchHit> take() {
        std::sort(heap_.begin(), heap_.end(), [](const SearchHit& a, const SearchHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        for (size_t i = 0; i < heap_.size(); ++i) heap_[i].rank = static_cast<int>(i) + 1;
        return std::move(heap_);
    }

private:
    // Max-heap whose top is the currently worst hit.
    static bool worse_first(const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    }

    size_t k_;
    std::vector<SearchHit> heap_;
};

// Document-at-a-time merge over the query's posting lists. scorer(doc) is
// called once per candidate document with per-list cursors parked on it.
template <typename Scorer>
std::vector<SearchHit> daat_search(const std::vector<const std::vector<Posting>*>& lists,
                                   size_t k, Scorer&& scorer) {
    TopK top(k);
    std::vector<size_t> cursor(lists.size(), 0);
    for (;;) {
        uint32_t doc = UINT32_MAX;
        for (size_t i = 0; i < lists.size(); ++i) {
            if (cursor[i] < lists[i]->size()) doc = std::min(doc, (*lists[i])[cursor[i]].doc_id);
        }
        if (doc == UINT32_MAX) break;
        double score = scorer(doc, cursor);
        top.offer(doc, score);
        for (size_t i = 0; i < lists.size(); ++i) {
            if (cursor[i] < lists[i]->size() && (*lists[i])[cursor[i]].doc_id == doc) ++cursor[i];
        }
    }
    return top.take();
}

}  // namespace detail

// Exact top-k by dot product, ties broken by ascending doc id; equivalent to
// brute-force scoring of every document.
inline std::vector<SearchHit> search(const InvertedIndex& index, const SparseVector& query,
                                     size_t k) {
    if (k == 0 || query.empty()) return {};
    std::vector<const std::vector<Posting>*> lists;
    std::vector<double> weights;
    for (const auto& [term, w] : query.entries()) {
        if (term >= index.term_count()) continue;
        const auto& list = index.postings(term);
        if (list.empty()) continue;
        lists.push_back(&list);
        weights.push_back(w);
    }
    return detail::daat_search(lists, k, [&](uint32_t doc, const std::vector<size_t>& cursor) {
        double score = 0.0;
        for (size_t i = 0; i < lists.size(); ++i) {
            size_t c = cursor[i];
            if (c < lists[i]->size() && (*lists[i])[c].doc_id == doc) {
                score += weights[i] * (*lists[i])[c].weight;
            }
        }
        return score;
    });
}

// BM25 over a term-frequency index:
//   score(q, d) = sum_t qtf(t) * idf(t) * tf / (tf + k1 * (1 - b + b * len/avglen))
// with idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
inline std::vector<SearchHit> search_bm25(const InvertedIndex& index, const TokenSeq& query,
                                          size_t k, const BM25Params& params = {}) {
    if (index.mode() != IndexMode::TermFrequency) {
        throw Error(ErrorCode::WrongIndexMode, "BM25 requires a term-frequency index");
    }
    if (k == 0) return {};

    // Distinct query terms in ascending id order; occurrences weight the sum.
    std::map<uint32_t, double> qtf;
    for (const auto& t : query) {
        if (auto id = index.vocab().lookup(t)) qtf[*id] += 1.0;
    }
    std::vector<const std::vector<Posting>*> lists;
    std::vector<double> multipliers;  // qtf * idf per list
    for (const auto& [term, count] : qtf) {
        const auto& list = index.postings(term);
        if (list.empty()) continue;
        lists.push_back(&list);
        multipliers.push_back(count * idf_lucene(index.doc_count(), list.size()));
    }

    const double k1 = params.k1;
    const double b = params.b;
    const double avg = index.avg_doc_len();
    return detail::daat_search(lists, k, [&](uint32_t doc, const std::vector<size_t>& cursor) {
        double len_norm = avg > 0.0 ? static_cast<double>(index.doc_length(doc)) / avg : 0.0;
        double score = 0.0;
        for (size_t i = 0; i < lists.size(); ++i) {
            size_t c = cursor[i];
            if (c < lists[i]->size() && (*lists[i])[c].doc_id == doc) {
                double tf = (*lists[i])[c].weight;
                score += multipliers[i] * tf / (tf + k1 * (1.0 - b + b * len_norm));
            }
        }
        return score;
    });
}

namespace detail {

struct ByteWriter {
    std::string bytes;

    void u8(uint8_t v) { bytes.push_back(static_cast<char>(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes += s;
    }
};

struct ByteReader {
    const std::string& bytes;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > bytes.size()) {
            throw Error(ErrorCode::CorruptFile, "index file truncated");
        }
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(bytes[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

inline constexpr char kIndexMagic[8] = {'F', 'O', 'R', 'G', 'E', 'I', 'D', 'X'};

}  // namespace detail

// Binary layout: magic, version, mode, vocabulary hash, doc stats, external
// id table, length-prefixed posting lists, trailing FNV-1a checksum. The
// vocabulary itself lives next to the index as "<path>.vocab" (one token per
// line) and is bound to the binary through the stored hash.
inline void save_index(const InvertedIndex& index, const std::string& path) {
    detail::ByteWriter w;
    w.bytes.append(detail::kIndexMagic, sizeof(detail::kIndexMagic));
    w.u32(kIndexFormatVersion);
    w.u8(static_cast<uint8_t>(index.mode_));
    w.u64(index.vocab_.content_hash());
    w.u64(index.doc_lengths_.size());
    w.f64(index.avg_doc_len_);
    for (uint32_t l : index.doc_lengths_) w.u32(l);
    w.u8(index.external_ids_.empty() ? 0 : 1);
    for (const auto& id : index.external_ids_) w.str(id);
    w.u64(index.postings_.size());
    for (const auto& list : index.postings_) {
        w.u64(list.size());
        for (const auto& p : list) {
            w.u32(p.doc_id);
            w.f64(p.weight);
        }
    }
    w.u64(fnv1a64_bytes(w.bytes.data(), w.bytes.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write index " + path);
    out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
    out.close();

    index.vocab_.save(path + ".vocab");
}

inline InvertedIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open index " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < sizeof(detail::kIndexMagic) + 8 ||
        std::memcmp(bytes.data(), detail::kIndexMagic, sizeof(detail::kIndexMagic)) != 0) {
        throw Error(ErrorCode::CorruptFile, "bad magic in " + path);
    }
    uint64_t stored_checksum = 0;
    for (int i = 0; i < 8; ++i) {
        stored_checksum |=
            uint64_t(static_cast<unsigned char>(bytes[bytes.size() - 8 + i])) << (8 * i);
    }
    if (fnv1a64_bytes(bytes.data(), bytes.size() - 8) != stored_checksum) {
        throw Error(ErrorCode::CorruptFile, "checksum mismatch in " + path);
    }

    detail::ByteReader r{bytes, sizeof(detail::kIndexMagic)};
    uint32_t version = r.u32();
    if (version != kIndexFormatVersion) {
        throw Error(ErrorCode::VersionMismatch,
                    "index format version " + std::to_string(version) + ", expected " +
                        std::to_string(kIndexFormatVersion));
    }

    InvertedIndex index;
    index.mode_ = static_cast<IndexMode>(r.u8());
    uint64_t vocab_hash = r.u64();
    uint64_t doc_count = r.u64();
    index.avg_doc_len_ = r.f64();
    index.doc_lengths_.resize(doc_count);
    for (auto& l : index.doc_lengths_) l = r.u32();
    if (r.u8() == 1) {
        index.external_ids_.reserve(doc_count);
        for (uint64_t i = 0; i < doc_count; ++i) index.external_ids_.push_back(r.str());
    }
    uint64_t terms = r.u64();
    index.postings_.resize(terms);
    for (auto& list : index.postings_) {
        uint64_t n = r.u64();
        list.resize(n);
        for (auto& p : list) {
            p.doc_id = r.u32();
            p.weight = r.f64();
        }
    }

    index.vocab_ = Vocabulary::load(path + ".vocab");
    if (index.vocab_.content_hash() != vocab_hash) {
        throw Error(ErrorCode::CorruptFile, "vocabulary hash mismatch for " + path);
    }
    if (index.vocab_.size() != terms) {
        throw Error(ErrorCode::CorruptFile, "vocabulary size does not match posting table");
    }
    return index;
}

// Stats view used by the surrogate encoder at query time.
inline CorpusStats stats_from_index(const InvertedIndex& index) {
    CorpusStats stats;
    stats.doc_count = index.doc_count();
    stats.avg_len = index.avg_doc_len();
    for (uint32_t t = 0; t < index.term_count(); ++t) {
        size_t df = index.df(t);
        if (df > 0) stats.df.emplace(index.vocab().token(t), df);
    }
    return stats;
}

}  // namespace forge
