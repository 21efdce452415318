#include <cmath>

#include "doctest.h"
#include "fsel/core.hpp"
#include "fsel/rng.hpp"

using namespace fsel;

TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity({3.0, -1.0, 2.0}, {3.0, -1.0, 2.0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
    // hand arithmetic: (1*2 + 2*1) / (sqrt(5) * sqrt(5)) = 4/5
    CHECK(cosine_similarity({1.0, 2.0}, {2.0, 1.0}) == doctest::Approx(0.8));

    CHECK_THROWS_AS(cosine_similarity({0.0, 0.0}, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(cosine_similarity({1.0}, {1.0, 0.0}), ShapeError);
}

TEST_CASE("cosine similarity is scale invariant") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec v = rng.gaussian_vector(8);
        const double c = 0.01 + 10.0 * rng.uniform();
        Vec scaled = v;
        for (auto& x : scaled) x *= c;
        CHECK(cosine_similarity(v, scaled) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("softmax closed forms") {
    const Vec uniform = softmax({0.0, 0.0, 0.0});
    for (double w : uniform) CHECK(w == doctest::Approx(1.0 / 3.0));

    CHECK(softmax({42.0}, 7.0) == Vec{1.0});

    const Vec two = softmax({std::log(2.0), 0.0});
    CHECK(two[0] == doctest::Approx(2.0 / 3.0));
    CHECK(two[1] == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(softmax({}), ShapeError);
    CHECK_THROWS_AS(softmax({1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(softmax({1.0}, -1.0), DomainError);
}

TEST_CASE("softmax sums to one and keeps the argmax") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Vec logits = rng.gaussian_vector(1 + trial % 17);
        const bool wild = trial % 3 == 0;
        // wild inputs stress the max-subtraction; entries that underflow to
        // zero there are expected, so strict positivity is only asserted in
        // the score-vector range (bounded logits, moderate temperature)
        for (auto& x : logits) x *= wild ? 50.0 : 1.0;
        const double temp = wild ? 0.1 + 5.0 * rng.uniform() : 0.5 + 5.0 * rng.uniform();
        const Vec w = softmax(logits, temp);

        double sum = 0.0;
        std::size_t argmax_w = 0, argmax_l = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(w[i] >= 0.0);
            if (!wild) CHECK(w[i] > 0.0);
            sum += w[i];
            if (w[i] > w[argmax_w]) argmax_w = i;
            if (logits[i] > logits[argmax_l]) argmax_l = i;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(argmax_w == argmax_l);
    }
}

TEST_CASE("mean pool") {
    CHECK(mean_pool({{1.0, 1.0}}) == Vec{1.0, 1.0});
    CHECK(mean_pool({{0.0, 2.0}, {2.0, 0.0}}) == Vec{1.0, 1.0});

    const Vec m = mean_pool({{1.0, 0.0}, {0.0, 1.0}, {2.0, 2.0}});
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(mean_pool({}), ShapeError);
}

TEST_CASE("weighted pool") {
    SUBCASE("equal scores reduce to the mean") {
        const Vec w = weighted_pool({{0.0, 2.0}, {2.0, 0.0}}, {0.7, 0.7});
        CHECK(w[0] == doctest::Approx(1.0));
        CHECK(w[1] == doctest::Approx(1.0));
    }
    SUBCASE("saturated softmax keeps only the dominant frame") {
        const Vec w = weighted_pool({{1.0, 0.0}, {0.0, 1.0}}, {50.0, 0.0});
        CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(w[1] == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("hand arithmetic") {
        // softmax([ln 2, 0]) = [2/3, 1/3]; 2/3*(3,0) + 1/3*(0,3) = (2,1)
        const Vec w = weighted_pool({{3.0, 0.0}, {0.0, 3.0}}, {std::log(2.0), 0.0});
        CHECK(w[0] == doctest::Approx(2.0));
        CHECK(w[1] == doctest::Approx(1.0));
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(weighted_pool({{1.0}}, {1.0, 2.0}), ShapeError);
    }
}

TEST_CASE("weighted pool with constant scores equals mean pool") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t k = 1 + trial % 6;
        Mat rows;
        for (std::size_t i = 0; i < k; ++i) rows.push_back(rng.gaussian_vector(4));
        const double c = rng.normal();
        const Vec a = weighted_pool(rows, Vec(k, c));
        const Vec b = mean_pool(rows);
        for (std::size_t j = 0; j < 4; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
    }
}

TEST_CASE("scaled dot attention") {
    SUBCASE("single row") {
        const auto r = scaled_dot_attention({1.0, 2.0}, {{3.0, 4.0}}, {{5.0, 6.0}});
        CHECK(r.weights == Vec{1.0});
        CHECK(r.fused == Vec{5.0, 6.0});
    }
    SUBCASE("orthogonal query gives uniform weights and the row mean") {
        const auto r = scaled_dot_attention({0.0, 0.0, 1.0},
                                            {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}},
                                            {{2.0, 0.0, 0.0}, {0.0, 4.0, 0.0}});
        CHECK(r.weights[0] == doctest::Approx(0.5));
        CHECK(r.weights[1] == doctest::Approx(0.5));
        CHECK(r.fused[0] == doctest::Approx(1.0));
        CHECK(r.fused[1] == doctest::Approx(2.0));
    }
    SUBCASE("one-dimensional closed form") {
        const auto r = scaled_dot_attention({2.0}, {{1.0}, {0.0}}, {{1.0}, {0.0}});
        const double e2 = std::exp(2.0);
        CHECK(r.weights[0] == doctest::Approx(e2 / (e2 + 1.0)));
        CHECK(r.weights[1] == doctest::Approx(1.0 / (e2 + 1.0)));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(scaled_dot_attention({1.0, 2.0}, {{1.0}}, {{1.0}}), ShapeError);
        CHECK_THROWS_AS(scaled_dot_attention({1.0}, {{1.0}, {2.0}}, {{1.0}}), ShapeError);
    }
}

TEST_CASE("scaled dot attention is permutation equivariant") {
    Rng rng(7);
    const std::size_t n = 6, d = 5;
    Mat keys, values;
    for (std::size_t i = 0; i < n; ++i) {
        keys.push_back(rng.gaussian_vector(d));
        values.push_back(rng.gaussian_vector(d));
    }
    const Vec q = rng.gaussian_vector(d);
    const auto base = scaled_dot_attention(q, keys, values);

    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    Mat pkeys(n), pvalues(n);
    for (std::size_t i = 0; i < n; ++i) {
        pkeys[i] = keys[perm[i]];
        pvalues[i] = values[perm[i]];
    }
    const auto permuted = scaled_dot_attention(q, pkeys, pvalues);

    for (std::size_t i = 0; i < n; ++i)
        CHECK(permuted.weights[i] == doctest::Approx(base.weights[perm[i]]).epsilon(1e-9));
    for (std::size_t j = 0; j < d; ++j)
        CHECK(permuted.fused[j] == doctest::Approx(base.fused[j]).epsilon(1e-9));
}
