#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "forge/encoder.hpp"
#include "forge/rng.hpp"

namespace forge {

// Verification harness: compares the analytic encoder gradient against
// central finite differences of the forward loss. The finite-difference side
// only ever calls toy_encode + loss_breakdown, never the analytic gradient,
// so the two routes stay independent.

struct GradcheckConfig {
    size_t instances = 50;
    size_t dim = 4;
    size_t vocab_size = 8;
    size_t batch_size = 2;
    uint64_t seed = 2024;
    double step = 1e-5;
    double kink_margin = 1e-3;
    double lambda_q = kDefaultLambdaQ;
    double lambda_d = kDefaultLambdaD;
    double tolerance = 1e-4;
};

struct GradcheckReport {
    size_t instances_run = 0;
    size_t coords_checked = 0;
    size_t coords_skipped = 0;
    double max_rel_err = 0.0;
    bool passed = false;
};

namespace detail {

inline Matrix random_matrix(SplitMix64& rng, size_t rows, size_t cols, double scale) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.next_gaussian() * scale;
    return m;
}

// A coordinate sits in a kink neighborhood when some importance value it can
// influence is near the ReLU corner, or a pooled column's top-2 margin is
// near a max tie. b_j only touches column j; W entries touch everything.
struct KinkMap {
    std::vector<bool> column_kinky;  // per vocab id
    bool any_kinky = false;
};

inline KinkMap find_kinks(const ToyEncoderParams& p, const std::vector<ToyBatchItem>& batch,
                          double margin) {
    KinkMap km;
    km.column_kinky.assign(p.vocab_size, false);
    auto scan = [&](const Matrix& features) {
        EncodedInput e = toy_encode(p, features);
        for (size_t j = 0; j < p.vocab_size; ++j) {
            double best = 0.0, second = 0.0;
            for (size_t i = 0; i < features.rows; ++i) {
                double w = e.importance.at(i, j);
                if (std::fabs(w) < margin) km.column_kinky[j] = true;
                double g = w > 0.0 ? std::log1p(w) : 0.0;
                if (g > best) {
                    second = best;
                    best = g;
                } else if (g > second) {
                    second = g;
                }
            }
            if (best > 0.0 && best - second < margin) km.column_kinky[j] = true;
        }
    };
    for (const auto& item : batch) {
        scan(item.query_features);
        scan(item.positive_features);
        for (const auto& nf : item.negative_features) scan(nf);
    }
    for (bool k : km.column_kinky) km.any_kinky = km.any_kinky || k;
    return km;
}

inline double forward_total(const ToyEncoderParams& p, const std::vector<ToyBatchItem>& batch,
                            double lambda_q, double lambda_d) {
    std::vector<LossItem> items(batch.size());
    for (size_t t = 0; t < batch.size(); ++t) {
        items[t].query = toy_encode(p, batch[t].query_features).pooled;
        items[t].positive = toy_encode(p, batch[t].positive_features).pooled;
        for (const auto& nf : batch[t].negative_features) {
            items[t].negatives.push_back(toy_encode(p, nf).pooled);
        }
    }
    return loss_breakdown(items, lambda_q, lambda_d).total;
}

}  // namespace detail

inline GradcheckReport run_gradcheck(const GradcheckConfig& cfg = {}) {
    GradcheckReport report;
    SplitMix64 rng(cfg.seed);

    for (size_t inst = 0; inst < cfg.instances; ++inst) {
        ToyEncoderParams p;
        p.dim = cfg.dim;
        p.vocab_size = cfg.vocab_size;
        p.W = detail::random_matrix(rng, cfg.dim, cfg.dim, 0.7);
        p.E = detail::random_matrix(rng, cfg.dim, cfg.vocab_size, 0.7);
        p.b.resize(cfg.vocab_size);
        for (auto& v : p.b) v = rng.next_gaussian() * 0.5;

        std::vector<ToyBatchItem> batch(cfg.batch_size);
        for (auto& item : batch) {
            size_t nq = 2 + rng.next_below(2);
            size_t nd = 2 + rng.next_below(2);
            item.query_features = detail::random_matrix(rng, nq, cfg.dim, 1.0);
            item.positive_features = detail::random_matrix(rng, nd, cfg.dim, 1.0);
            size_t negs = 1 + rng.next_below(2);
            for (size_t i = 0; i < negs; ++i) {
                item.negative_features.push_back(
                    detail::random_matrix(rng, 2 + rng.next_below(2), cfg.dim, 1.0));
            }
        }

        auto kinks = detail::find_kinks(p, batch, cfg.kink_margin);
        ToyEncoderGrad analytic = toy_encoder_grad(p, batch, cfg.lambda_q, cfg.lambda_d);
        report.instances_run += 1;

        auto check = [&](double got, double* param) {
            double keep = *param;
            *param = keep + cfg.step;
            double up = detail::forward_total(p, batch, cfg.lambda_q, cfg.lambda_d);
            *param = keep - cfg.step;
            double down = detail::forward_total(p, batch, cfg.lambda_q, cfg.lambda_d);
            *param = keep;
            double fd = (up - down) / (2.0 * cfg.step);
            double rel = std::fabs(got - fd) / std::max({std::fabs(got), std::fabs(fd), 1e-6});
            report.max_rel_err = std::max(report.max_rel_err, rel);
            report.coords_checked += 1;
        };

        // W entries influence every importance value; a kink anywhere skips
        // the whole matrix for this instance.
        if (!kinks.any_kinky) {
            for (size_t r = 0; r < cfg.dim; ++r) {
                for (size_t c = 0; c < cfg.dim; ++c) {
                    check(analytic.grad_W.at(r, c), &p.W.at(r, c));
                }
            }
        } else {
            report.coords_skipped += cfg.dim * cfg.dim;
        }
        for (size_t j = 0; j < cfg.vocab_size; ++j) {
            if (kinks.column_kinky[j]) {
                report.coords_skipped += 1;
                continue;
            }
            check(analytic.grad_b[j], &p.b[j]);
        }
    }
    report.passed = report.max_rel_err < cfg.tolerance && report.coords_checked > 0;
    return report;
}

}  // namespace forge
