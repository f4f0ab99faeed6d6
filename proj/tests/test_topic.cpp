#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "forge/rng.hpp"
#include "forge/topic.hpp"

using namespace forge;
using Catch::Approx;

namespace {

BinarySignature sig(std::set<uint32_t> active, double mu = 0.5) {
    BinarySignature s;
    s.active = std::move(active);
    s.mu = mu;
    return s;
}

// Direct restatement of the two passes, kept deliberately naive.
std::vector<size_t> brute_filter(const std::vector<BinarySignature>& hits,
                                 const FilterConfig& cfg) {
    if (hits.empty()) return {};
    std::vector<size_t> after_pass1 = {0};
    for (size_t i = 1; i < hits.size(); ++i) {
        if (!(topic_distance(hits[0], hits[i]) > cfg.upper)) after_pass1.push_back(i);
    }
    std::vector<size_t> kept;
    for (size_t i : after_pass1) {
        bool drop = false;
        for (size_t j : kept) {
            if (topic_distance(hits[i], hits[j]) < cfg.lower) drop = true;
        }
        if (!drop || i == 0) kept.push_back(i);
    }
    return kept;
}

}  // namespace

TEST_CASE("binarize keeps strictly-above-threshold ids") {
    auto v = SparseVector::from_entries({{0, 0.2}, {1, 0.8}});
    CHECK(binarize(v, 0.5).active == std::set<uint32_t>{1});
    CHECK(binarize(v, 1e18).active.empty());
    auto exact = SparseVector::from_entries({{3, 0.5}});
    CHECK(binarize(exact, 0.5).active.empty());  // strict >
}

TEST_CASE("topic_distance matches the worked examples") {
    CHECK(topic_distance(sig({1, 2}), sig({1, 2})) == 0.0);
    CHECK(topic_distance(sig({0}), sig({1, 2})) == 1.0);
    CHECK(topic_distance(sig({0, 1}), sig({1, 2})) == 0.5);
    CHECK(topic_distance(sig({}), sig({})) == 0.0);
    CHECK_THROWS_AS(topic_distance(sig({0}, 0.1), sig({0}, 0.2)), Error);
}

TEST_CASE("topic_distance is a symmetric [0,1] measure") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<uint32_t> a, b;
        for (uint32_t id = 0; id < 12; ++id) {
            if (rng.next_below(2)) a.insert(id);
            if (rng.next_below(2)) b.insert(id);
        }
        auto sa = sig(a), sb = sig(b);
        double d = topic_distance(sa, sb);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(topic_distance(sb, sa) == d);
        CHECK(topic_distance(sa, sa) == 0.0);
        bool disjoint = true;
        for (uint32_t id : a) {
            if (b.count(id)) disjoint = false;
        }
        bool expect_one = disjoint && !(a.empty() && b.empty());
        CHECK((d == 1.0) == expect_one);
    }
}

TEST_CASE("consistency_filter applies both passes") {
    FilterConfig cfg;
    // Pass 1: disjoint from the top hit (d_T = 1.0 > 0.9).
    auto r1 = consistency_filter({sig({0, 1}), sig({5, 6})}, cfg);
    CHECK(r1.kept == std::vector<size_t>{0});
    REQUIRE(r1.dropped.size() == 1);
    CHECK(r1.dropped[0].second == DropReason::Irrelevant);

    // Pass 2: identical to the top hit (d_T = 0.0 < 0.1).
    auto r2 = consistency_filter({sig({0, 1}), sig({0, 1})}, cfg);
    CHECK(r2.kept == std::vector<size_t>{0});
    REQUIRE(r2.dropped.size() == 1);
    CHECK(r2.dropped[0].second == DropReason::Redundant);

    auto r3 = consistency_filter({sig({0, 1})}, cfg);
    CHECK(r3.kept == std::vector<size_t>{0});
    CHECK(r3.dropped.empty());
}

TEST_CASE("consistency_filter equals the brute-force reference") {
    SplitMix64 rng(1234);
    FilterConfig cfg;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<BinarySignature> hits;
        size_t n = 1 + rng.next_below(10);
        for (size_t i = 0; i < n; ++i) {
            std::set<uint32_t> active;
            for (uint32_t id = 0; id < 8; ++id) {
                if (rng.next_below(3) == 0) active.insert(id);
            }
            hits.push_back(sig(active));
        }
        auto got = consistency_filter(hits, cfg);
        auto want = brute_filter(hits, cfg);
        CHECK(got.kept == want);

        // Postconditions: top hit kept, order preserved, bounds hold.
        REQUIRE(!got.kept.empty());
        CHECK(got.kept[0] == 0);
        for (size_t k = 1; k < got.kept.size(); ++k) {
            CHECK(got.kept[k] > got.kept[k - 1]);
            CHECK(topic_distance(hits[0], hits[got.kept[k]]) <= cfg.upper);
            for (size_t j = 0; j < k; ++j) {
                CHECK(topic_distance(hits[got.kept[k]], hits[got.kept[j]]) >= cfg.lower);
            }
        }
        CHECK(got.kept.size() + got.dropped.size() == n);
    }
}

TEST_CASE("default_mu scales with the largest pooled weight") {
    auto v1 = SparseVector::from_entries({{0, 0.4}});
    auto v2 = SparseVector::from_entries({{1, 2.0}});
    CHECK(default_mu({v1, v2}) == Approx(0.5));
    CHECK(default_mu({}) == 0.0);
}
