#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "forge/errors.hpp"
#include "forge/sparse.hpp"

namespace forge {

// Row-major dense matrix; sized for toy-scale experiments, not BLAS work.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
};

// Linear importance head: w_i = E^T (W h_i) + b. W and b train; E (embedding
// table) and the per-token features H are fixed inputs.
struct ToyEncoderParams {
    size_t dim = 0;
    size_t vocab_size = 0;
    Matrix W;               // dim x dim
    std::vector<double> b;  // vocab_size
    Matrix E;               // dim x vocab_size
};

struct ToyBatchItem {
    Matrix query_features;                 // n_tokens x dim
    Matrix positive_features;              // n_tokens x dim
    std::vector<Matrix> negative_features;  // each n_tokens x dim
};

struct EncodedInput {
    Matrix importance;    // n_tokens x vocab_size
    SparseVector pooled;  // s = max_i log1p(relu(w_i))
    // Per stored coordinate of `pooled`: the row the max routed through
    // (first row on ties, matching the subgradient convention).
    std::vector<uint32_t> argmax_row;
};

inline EncodedInput toy_encode(const ToyEncoderParams& p, const Matrix& features) {
    const size_t n = features.rows;
    const size_t dim = p.dim;
    const size_t vs = p.vocab_size;
    EncodedInput out;
    out.importance = Matrix(n, vs);

    std::vector<double> a(dim);
    for (size_t i = 0; i < n; ++i) {
        for (size_t r = 0; r < dim; ++r) {
            double sum = 0.0;
            for (size_t c = 0; c < dim; ++c) sum += p.W.at(r, c) * features.at(i, c);
            a[r] = sum;
        }
        for (size_t j = 0; j < vs; ++j) {
            double sum = p.b[j];
            for (size_t r = 0; r < dim; ++r) sum += p.E.at(r, j) * a[r];
            out.importance.at(i, j) = sum;
        }
    }

    for (size_t j = 0; j < vs; ++j) {
        double best = 0.0;
        uint32_t best_row = 0;
        bool stored = false;
        for (size_t i = 0; i < n; ++i) {
            double w = out.importance.at(i, j);
            double g = w > 0.0 ? std::log1p(w) : 0.0;
            if (g > best) {
                best = g;
                best_row = static_cast<uint32_t>(i);
                stored = true;
            }
        }
        if (stored) {
            out.pooled.push_back_sorted(static_cast<uint32_t>(j), best);
            out.argmax_row.push_back(best_row);
        }
    }
    return out;
}

struct ToyEncoderGrad {
    Matrix grad_W;
    std::vector<double> grad_b;
    LossBreakdown loss;
};

namespace detail {

inline double sparse_at(const SparseVector& v, uint32_t id) {
    const auto& e = v.entries();
    auto it = std::lower_bound(e.begin(), e.end(), id,
                               [](const auto& entry, uint32_t key) { return entry.first < key; });
    return (it != e.end() && it->first == id) ? it->second : 0.0;
}

}  // namespace detail

// Analytic gradient of loss_breakdown(total) w.r.t. W and b by the chain
// rule. The pooling max routes gradient to the first argmax row; ReLU gates
// it to zero at w <= 0, with d/dw log1p(w) = 1/(1+w) elsewhere.
inline ToyEncoderGrad toy_encoder_grad(const ToyEncoderParams& p,
                                       const std::vector<ToyBatchItem>& batch,
                                       double lambda_q = kDefaultLambdaQ,
                                       double lambda_d = kDefaultLambdaD) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "toy_encoder_grad over empty batch");

    struct ItemEnc {
        EncodedInput query;
        EncodedInput positive;
        std::vector<EncodedInput> negatives;
    };
    std::vector<ItemEnc> enc(batch.size());
    std::vector<LossItem> loss_items(batch.size());
    size_t doc_count = 0;
    for (size_t t = 0; t < batch.size(); ++t) {
        enc[t].query = toy_encode(p, batch[t].query_features);
        enc[t].positive = toy_encode(p, batch[t].positive_features);
        for (const auto& nf : batch[t].negative_features) {
            enc[t].negatives.push_back(toy_encode(p, nf));
        }
        loss_items[t].query = enc[t].query.pooled;
        loss_items[t].positive = enc[t].positive.pooled;
        for (const auto& ne : enc[t].negatives) loss_items[t].negatives.push_back(ne.pooled);
        doc_count += 1 + enc[t].negatives.size();
    }

    ToyEncoderGrad out;
    out.loss = loss_breakdown(loss_items, lambda_q, lambda_d);
    out.grad_W = Matrix(p.dim, p.dim);
    out.grad_b.assign(p.vocab_size, 0.0);

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    const double inv_docs = 1.0 / static_cast<double>(doc_count);

    // Mean document activation per id, for the FLOPS term.
    std::map<uint32_t, double> doc_mean;
    for (const auto& it : enc) {
        for (const auto& [id, w] : it.positive.pooled.entries()) doc_mean[id] += w;
        for (const auto& ne : it.negatives) {
            for (const auto& [id, w] : ne.pooled.entries()) doc_mean[id] += w;
        }
    }
    for (auto& [id, s] : doc_mean) s *= inv_docs;

    // Backprop from d(total)/d(pooled coordinate) into W and b through the
    // argmax row of the coordinate's input.
    auto backprop = [&](const EncodedInput& e, const Matrix& features,
                        const std::vector<double>& dLds) {
        const auto& entries = e.pooled.entries();
        for (size_t k = 0; k < entries.size(); ++k) {
            double d = dLds[k];
            if (d == 0.0) continue;
            uint32_t j = entries[k].first;
            uint32_t row = e.argmax_row[k];
            double w = e.importance.at(row, j);
            double delta = d / (1.0 + w);
            out.grad_b[j] += delta;
            for (size_t r = 0; r < p.dim; ++r) {
                double ej = p.E.at(r, j);
                for (size_t c = 0; c < p.dim; ++c) {
                    out.grad_W.at(r, c) += delta * ej * features.at(row, c);
                }
            }
        }
    };

    for (size_t t = 0; t < batch.size(); ++t) {
        const auto& q = enc[t].query.pooled;
        const auto& pos = enc[t].positive.pooled;
        double f_pos = dot_score(q, pos);
        std::vector<double> f_neg;
        for (const auto& ne : enc[t].negatives) f_neg.push_back(dot_score(q, ne.pooled));

        // Softmax over [pos, negs] with max shift.
        double m = f_pos;
        for (double f : f_neg) m = std::max(m, f);
        double z = std::exp(f_pos - m);
        for (double f : f_neg) z += std::exp(f - m);
        double sigma_pos = std::exp(f_pos - m) / z;
        std::vector<double> sigma_neg;
        for (double f : f_neg) sigma_neg.push_back(std::exp(f - m) / z);

        // Query vector: rank term plus L1 (all pooled weights are positive,
        // so the L1 subgradient on the support is 1).
        {
            const auto& entries = q.entries();
            std::vector<double> dLds(entries.size(), 0.0);
            for (size_t k = 0; k < entries.size(); ++k) {
                uint32_t id = entries[k].first;
                double g = (sigma_pos - 1.0) * detail::sparse_at(pos, id);
                for (size_t mi = 0; mi < sigma_neg.size(); ++mi) {
                    g += sigma_neg[mi] * detail::sparse_at(enc[t].negatives[mi].pooled, id);
                }
                dLds[k] = inv_batch * g + lambda_q * inv_batch;
            }
            backprop(enc[t].query, batch[t].query_features, dLds);
        }
        // Positive document: rank term plus FLOPS.
        {
            const auto& entries = pos.entries();
            std::vector<double> dLds(entries.size(), 0.0);
            for (size_t k = 0; k < entries.size(); ++k) {
                uint32_t id = entries[k].first;
                dLds[k] = inv_batch * (sigma_pos - 1.0) * detail::sparse_at(q, id) +
                          lambda_d * 2.0 * doc_mean[id] * inv_docs;
            }
            backprop(enc[t].positive, batch[t].positive_features, dLds);
        }
        // Negative documents: rank term plus FLOPS.
        for (size_t mi = 0; mi < enc[t].negatives.size(); ++mi) {
            const auto& entries = enc[t].negatives[mi].pooled.entries();
            std::vector<double> dLds(entries.size(), 0.0);
            for (size_t k = 0; k < entries.size(); ++k) {
                uint32_t id = entries[k].first;
                dLds[k] = inv_batch * sigma_neg[mi] * detail::sparse_at(q, id) +
                          lambda_d * 2.0 * doc_mean[id] * inv_docs;
            }
            backprop(enc[t].negatives[mi], batch[t].negative_features[mi], dLds);
        }
    }
    return out;
}

}  // namespace forge
