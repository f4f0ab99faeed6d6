#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "forge/encoder.hpp"
#include "forge/gradcheck.hpp"

using namespace forge;
using Catch::Approx;

namespace {

Matrix fill(size_t r, size_t c, std::vector<double> values) {
    Matrix m(r, c);
    m.data = std::move(values);
    return m;
}

}  // namespace

TEST_CASE("toy_encode pools importance through log1p(relu)") {
    ToyEncoderParams p;
    p.dim = 1;
    p.vocab_size = 2;
    p.W = fill(1, 1, {1.0});
    p.E = fill(1, 2, {1.0, -1.0});
    p.b = {0.0, 0.0};

    // Two tokens with features 1 and 3: w = E^T h = [h, -h].
    Matrix h = fill(2, 1, {1.0, 3.0});
    auto enc = toy_encode(p, h);
    REQUIRE(enc.pooled.nnz() == 1);
    CHECK(enc.pooled.entries()[0].first == 0);
    CHECK(enc.pooled.entries()[0].second == Approx(std::log1p(3.0)).epsilon(1e-12));
    CHECK(enc.argmax_row[0] == 1);
}

TEST_CASE("all-negative importance gives zero gradient") {
    ToyEncoderParams p;
    p.dim = 2;
    p.vocab_size = 3;
    p.W = fill(2, 2, {1.0, 0.0, 0.0, 1.0});
    p.E = fill(2, 3, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    p.b = {-100.0, -100.0, -100.0};  // ReLU dead everywhere

    ToyBatchItem item;
    item.query_features = fill(1, 2, {0.5, 0.5});
    item.positive_features = fill(1, 2, {0.5, -0.5});
    item.negative_features = {fill(1, 2, {-0.5, 0.5})};

    auto g = toy_encoder_grad(p, {item});
    for (double v : g.grad_W.data) CHECK(v == 0.0);
    for (double v : g.grad_b) CHECK(v == 0.0);
    CHECK(g.loss.rank == Approx(std::log(2.0)));  // all scores zero
}

TEST_CASE("zero lambdas reduce to the pure rank gradient") {
    GradcheckConfig cfg;
    cfg.instances = 1;
    cfg.seed = 99;
    SplitMix64 rng(cfg.seed);
    ToyEncoderParams p;
    p.dim = 3;
    p.vocab_size = 5;
    p.W = detail::random_matrix(rng, 3, 3, 0.7);
    p.E = detail::random_matrix(rng, 3, 5, 0.7);
    p.b.resize(5);
    for (auto& v : p.b) v = rng.next_gaussian() * 0.5;

    ToyBatchItem item;
    item.query_features = detail::random_matrix(rng, 2, 3, 1.0);
    item.positive_features = detail::random_matrix(rng, 2, 3, 1.0);
    item.negative_features = {detail::random_matrix(rng, 2, 3, 1.0)};

    auto with_reg = toy_encoder_grad(p, {item}, 0.0, 0.0);
    CHECK(with_reg.loss.total == with_reg.loss.rank);
}

TEST_CASE("analytic gradient matches finite differences (smoke)") {
    GradcheckConfig cfg;
    cfg.instances = 5;
    cfg.seed = 7;
    auto report = run_gradcheck(cfg);
    CHECK(report.instances_run == 5);
    CHECK(report.coords_checked > 0);
    CHECK(report.max_rel_err < cfg.tolerance);
    CHECK(report.passed);
}
