#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/sparse.hpp"

namespace forge {

// Thresholded support of a sparse representation; the unit of topic
// comparison.
struct BinarySignature {
    std::set<uint32_t> active;
    double mu = 0.0;
};

// active = { j : v_j > mu }, strictly.
inline BinarySignature binarize(const SparseVector& v, double mu) {
    BinarySignature sig;
    sig.mu = mu;
    for (const auto& [id, w] : v.entries()) {
        if (w > mu) sig.active.insert(id);
    }
    return sig;
}

// Normalized symmetric difference |a ^ b| / (|a| + |b|): 0 for identical
// supports, 1 for disjoint non-empty ones. Two empty signatures compare as
// redundant (distance 0).
inline double topic_distance(const BinarySignature& a, const BinarySignature& b) {
    if (a.mu != b.mu) {
        throw Error(ErrorCode::MuMismatch, "signatures built with different thresholds");
    }
    if (a.active.empty() && b.active.empty()) return 0.0;
    size_t common = 0;
    auto ia = a.active.begin();
    auto ib = b.active.begin();
    while (ia != a.active.end() && ib != b.active.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    size_t sym_diff = a.active.size() + b.active.size() - 2 * common;
    return static_cast<double>(sym_diff) /
           static_cast<double>(a.active.size() + b.active.size());
}

struct FilterConfig {
    double mu = 0.0;       // signature threshold actually used (informational)
    double upper = 0.9;    // drop d_i when d_T(d_1, d_i) > upper
    double lower = 0.1;    // drop d_i when d_T(d_i, kept d_j) < lower
};

enum class DropReason { Irrelevant, Redundant };

inline const char* drop_reason_name(DropReason r) {
    return r == DropReason::Irrelevant ? "irrelevant" : "redundant";
}

struct FilterResult {
    std::vector<size_t> kept;                             // indices, rank order
    std::vector<std::pair<size_t, DropReason>> dropped;   // indices, rank order
};

// Two passes over a ranked list: first drop documents topically unrelated to
// the top hit (distance > upper), then drop documents redundant to any
// already-kept fore-rank document (distance < lower). The top hit is always
// kept and relative order never changes.
inline FilterResult consistency_filter(const std::vector<BinarySignature>& hits,
                                       const FilterConfig& cfg) {
    FilterResult out;
    if (hits.empty()) return out;

    std::vector<size_t> survivors;
    survivors.push_back(0);
    for (size_t i = 1; i < hits.size(); ++i) {
        if (topic_distance(hits[0], hits[i]) > cfg.upper) {
            out.dropped.emplace_back(i, DropReason::Irrelevant);
        } else {
            survivors.push_back(i);
        }
    }

    for (size_t pos = 0; pos < survivors.size(); ++pos) {
        size_t i = survivors[pos];
        if (pos == 0) {
            out.kept.push_back(i);
            continue;
        }
        bool redundant = false;
        for (size_t j : out.kept) {
            if (topic_distance(hits[i], hits[j]) < cfg.lower) {
                redundant = true;
                break;
            }
        }
        if (redundant) {
            out.dropped.emplace_back(i, DropReason::Redundant);
        } else {
            out.kept.push_back(i);
        }
    }
    std::sort(out.dropped.begin(), out.dropped.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

// Default threshold when none is configured: a fraction of the largest
// pooled weight seen across the hit set.
inline double default_mu(const std::vector<SparseVector>& hit_vectors, double fraction = 0.25) {
    double max_w = 0.0;
    for (const auto& v : hit_vectors) max_w = std::max(max_w, v.max_weight());
    return fraction * max_w;
}

}  // namespace forge
