#include <cmath>

#include "doctest.h"
#include "fsel/clustering.hpp"
#include "fsel/core.hpp"
#include "fsel/rng.hpp"

using namespace fsel;

namespace {

// Two well-separated planted 2-D clusters around fixed directions.
Mat planted_two_clusters(std::uint64_t seed, std::size_t per_cluster, double spread) {
    Rng rng(seed);
    Mat points;
    const double centers[2] = {0.0, M_PI / 2.0};
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < per_cluster; ++i) {
            const double a = centers[c] + spread * (rng.uniform() - 0.5);
            points.push_back({std::cos(a), std::sin(a)});
        }
    return points;
}

}  // namespace

TEST_CASE("kmedoids with K = N is the identity clustering") {
    Rng rng(2);
    Mat points;
    for (int i = 0; i < 7; ++i) points.push_back(rng.gaussian_vector(3));
    const auto out = kmedoids(points, 7, 123);
    CHECK(out.medoid_indices == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
    CHECK(out.cost == doctest::Approx(0.0));
    CHECK(out.iterations == 1);
    for (int i = 0; i < 7; ++i) CHECK(out.assignment[i] == i);
}

TEST_CASE("kmedoids K=1 tie-break picks the lowest index") {
    // candidates 0 and 1 tie at cost 1 (the orthogonal member costs 1 - cos = 1)
    const Mat points{{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto out = kmedoids(points, 1, seed);
        CHECK(out.medoid_indices == std::vector<int>{0});
        CHECK(out.cost == doctest::Approx(1.0));
    }
}

TEST_CASE("kmedoids equals brute force on well separated 2-D clusters") {
    const Mat points = planted_two_clusters(99, 5, 0.2);
    const auto exact = brute_force_medoids(points, 2);
    const auto heur = kmedoids(points, 2, 4);
    CHECK(heur.medoid_indices == exact.medoid_indices);
    CHECK(heur.cost == doctest::Approx(exact.cost).epsilon(1e-12));
}

TEST_CASE("kmedoids input validation") {
    const Mat points{{1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(kmedoids(points, 0, 1), DomainError);
    CHECK_THROWS_AS(kmedoids(points, 3, 1), DomainError);
    CHECK_THROWS_AS(kmedoids({{1.0, 0.0}, {0.0, 0.0}}, 1, 1), DomainError);
}

TEST_CASE("clustering cost") {
    SUBCASE("identical points cost zero") {
        const Mat points{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
        CHECK(clustering_cost(points, {0}, {0, 0, 0}) == doctest::Approx(0.0));
    }
    SUBCASE("orthogonal pair, one medoid") {
        const Mat points{{1.0, 0.0}, {0.0, 1.0}};
        CHECK(clustering_cost(points, {0}, {0, 0}) == doctest::Approx(1.0));
    }
    SUBCASE("hand-built three point assignment") {
        const Mat points{{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
        // cluster 0 = {0, 1} with medoid 0, cluster 1 = {2} with medoid 2
        const double expected = (1.0 - std::cos(M_PI / 4.0)) + 0.0 + 0.0;
        CHECK(clustering_cost(points, {0, 2}, {0, 0, 1}) == doctest::Approx(expected));
    }
    SUBCASE("bad indices") {
        const Mat points{{1.0, 0.0}, {0.0, 1.0}};
        CHECK_THROWS_AS(clustering_cost(points, {5}, {0, 0}), ShapeError);
        CHECK_THROWS_AS(clustering_cost(points, {0}, {0, 3}), ShapeError);
        CHECK_THROWS_AS(clustering_cost(points, {0}, {0}), ShapeError);
    }
}

TEST_CASE("brute force medoids") {
    SUBCASE("K = N selects everything at cost zero") {
        Rng rng(8);
        Mat points;
        for (int i = 0; i < 5; ++i) points.push_back(rng.gaussian_vector(3));
        const auto out = brute_force_medoids(points, 5);
        CHECK(out.medoid_indices == std::vector<int>{0, 1, 2, 3, 4});
        CHECK(out.cost == doctest::Approx(0.0));
    }
    SUBCASE("K = 1 finds the set medoid") {
        const Mat points{{1.0, 0.0}, {1.0, 0.1}, {0.0, 1.0}};
        const auto out = brute_force_medoids(points, 1);
        // candidate 1 (the middle direction) minimizes the distance sum
        double best = 1e9;
        int best_idx = -1;
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int i = 0; i < 3; ++i) sum += 1.0 - cosine_similarity(points[c], points[i]);
            if (sum < best) {
                best = sum;
                best_idx = c;
            }
        }
        CHECK(out.medoid_indices == std::vector<int>{best_idx});
        CHECK(out.cost == doctest::Approx(best));
    }
    SUBCASE("combinatorial bound enforced") {
        Rng rng(9);
        Mat points;
        for (int i = 0; i < 50; ++i) points.push_back(rng.gaussian_vector(2));
        CHECK_THROWS_AS(brute_force_medoids(points, 10), DomainError);
    }
}

TEST_CASE("brute force dominates the heuristic on random instances") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        Mat points;
        for (int i = 0; i < 8; ++i) points.push_back(rng.gaussian_vector(4));
        const auto exact = brute_force_medoids(points, 2);
        const auto heur = kmedoids(points, 2, 1000 + trial);
        CHECK(exact.cost <= heur.cost + 1e-12);
    }
}

TEST_CASE("kmedoids cost trace is non-increasing and runs are deterministic") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Mat points;
        const int n = 6 + trial % 7;
        for (int i = 0; i < n; ++i) points.push_back(rng.gaussian_vector(3));
        const int k = 1 + trial % 3;

        const auto a = kmedoids(points, k, trial);
        const auto b = kmedoids(points, k, trial);
        CHECK(a.medoid_indices == b.medoid_indices);
        CHECK(a.assignment == b.assignment);
        CHECK(a.cost == b.cost);

        for (std::size_t i = 1; i < a.cost_trace.size(); ++i)
            CHECK(a.cost_trace[i] <= a.cost_trace[i - 1] + 1e-12);

        // reported cost must match its own recomputation
        CHECK(a.cost ==
              doctest::Approx(clustering_cost(points, a.medoid_indices, a.assignment))
                  .epsilon(1e-9));

        // medoids belong to their own clusters
        for (std::size_t c = 0; c < a.medoid_indices.size(); ++c)
            CHECK(a.assignment[static_cast<std::size_t>(a.medoid_indices[c])] ==
                  static_cast<int>(c));
    }
}

TEST_CASE("converged medoids are locally optimal within their clusters") {
    Rng rng(31);
    Mat points;
    for (int i = 0; i < 12; ++i) points.push_back(rng.gaussian_vector(3));
    const auto out = kmedoids(points, 3, 77);

    for (std::size_t c = 0; c < out.medoid_indices.size(); ++c) {
        std::vector<int> members;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (out.assignment[i] == static_cast<int>(c)) members.push_back(static_cast<int>(i));

        const auto within_sum = [&](int medoid) {
            double sum = 0.0;
            for (int m : members)
                sum += 1.0 - cosine_similarity(points[static_cast<std::size_t>(medoid)],
                                               points[static_cast<std::size_t>(m)]);
            return sum;
        };
        const double current = within_sum(out.medoid_indices[c]);
        for (int m : members) CHECK(within_sum(m) >= current - 1e-12);
    }
}
