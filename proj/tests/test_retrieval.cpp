#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "fsel/corpus.hpp"
#include "fsel/core.hpp"
#include "fsel/retrieval.hpp"
#include "fsel/rng.hpp"

using namespace fsel;

namespace {

// Independent full-sort ranking oracle: stable order by (score desc, index
// asc), 1-based position of the target.
int oracle_rank(const Vec& row, int target) {
    std::vector<int> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (row[static_cast<std::size_t>(a)] != row[static_cast<std::size_t>(b)])
            return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
        return a < b;
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        if (order[pos] == target) return static_cast<int>(pos) + 1;
    return -1;
}

Mat random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    Rng rng(seed);
    Mat m(rows, Vec(cols));
    for (auto& row : m)
        for (auto& x : row) x = rng.normal();
    return m;
}

SynthSpec eval_spec() {
    SynthSpec spec;
    spec.video_count = 40;
    spec.frames_per_video = 8;
    spec.planted_clusters = 4;
    spec.dim = 32;
    spec.cluster_separation = 6.0;
    spec.query_noise_scale = 0.1;
    spec.seed = 55;
    return spec;
}

}  // namespace

TEST_CASE("similarity matrix") {
    SUBCASE("a query equal to one orthonormal video") {
        Mat videos{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
        const Mat s = similarity_matrix(videos, {videos[1]});
        CHECK(s[0][0] == doctest::Approx(0.0));
        CHECK(s[0][1] == doctest::Approx(1.0));
        CHECK(s[0][2] == doctest::Approx(0.0));
    }
    SUBCASE("invariant under positive row scaling") {
        Mat videos = random_matrix(1, 4, 5);
        Mat queries = random_matrix(2, 3, 5);
        const Mat base = similarity_matrix(videos, queries);
        for (auto& x : videos[2]) x *= 9.0;
        for (auto& x : queries[0]) x *= 0.25;
        const Mat scaled = similarity_matrix(videos, queries);
        for (std::size_t t = 0; t < base.size(); ++t)
            for (std::size_t v = 0; v < base[t].size(); ++v)
                CHECK(scaled[t][v] == doctest::Approx(base[t][v]).epsilon(1e-12));
    }
    SUBCASE("matches entrywise recomputation") {
        const Mat videos = random_matrix(3, 4, 6);
        const Mat queries = random_matrix(4, 4, 6);
        const Mat s = similarity_matrix(videos, queries);
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t v = 0; v < 4; ++v)
                CHECK(s[t][v] ==
                      doctest::Approx(cosine_similarity(queries[t], videos[v])).epsilon(1e-12));
    }
}

TEST_CASE("shortlist") {
    CHECK(shortlist({0.1, 0.9, 0.5}, 2) == std::vector<int>{1, 2});
    CHECK(shortlist({0.1, 0.9, 0.5}, 10) == std::vector<int>{1, 2, 0});
    CHECK_THROWS_AS(shortlist({0.1}, 0), DomainError);

    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        Vec row(200);
        for (auto& x : row) x = rng.normal();
        const auto cut = shortlist(row, 128);
        std::vector<int> order(row.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
        });
        order.resize(128);
        CHECK(cut == order);
    }
}

TEST_CASE("rank metrics closed forms") {
    SUBCASE("dominant diagonal") {
        const Mat s{{0.9, 0.1, 0.1}, {0.1, 0.9, 0.1}, {0.1, 0.1, 0.9}};
        const RankingReport r = rank_metrics(s, {0, 1, 2});
        CHECK(r.r_at_1 == doctest::Approx(100.0));
        CHECK(r.r_at_5 == doctest::Approx(100.0));
        CHECK(r.r_at_10 == doctest::Approx(100.0));
        CHECK(r.mdr == doctest::Approx(1.0));
        CHECK(r.r_sum == doctest::Approx(300.0));
    }
    SUBCASE("ranks one and six") {
        Mat s(2, Vec(12, 0.0));
        s[0][3] = 1.0;                                  // pair of query 0 ranks first
        for (int v = 0; v < 5; ++v) s[1][v] = 0.9;      // five rivals above
        s[1][7] = 0.5;                                  // pair of query 1 ranks sixth
        const RankingReport r = rank_metrics(s, {3, 7});
        CHECK(r.ranks == std::vector<int>{1, 6});
        CHECK(r.r_at_1 == doctest::Approx(50.0));
        CHECK(r.r_at_5 == doctest::Approx(50.0));
        CHECK(r.r_at_10 == doctest::Approx(100.0));
        CHECK(r.mdr == doctest::Approx(3.5));
    }
    SUBCASE("pessimistic tie handling") {
        const Mat s{{0.5, 0.7, 0.5, 0.2}};
        // pair at column 2 ties with column 0: the lower-index rival wins
        CHECK(rank_metrics(s, {2}).ranks == std::vector<int>{3});
        // but a higher-index equal rival does not push the pair down
        CHECK(rank_metrics(s, {0}).ranks == std::vector<int>{2});
    }
    SUBCASE("invalid ground truth") {
        const Mat s{{0.1, 0.2}};
        CHECK_THROWS_AS(rank_metrics(s, {2}), DomainError);
        CHECK_THROWS_AS(rank_metrics(s, {-1}), DomainError);
    }
}

TEST_CASE("rank metrics equal the full-sort oracle on random instances") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Mat s = random_matrix(seed, 20, 20);
        std::vector<int> gt(20);
        Rng rng(seed + 1000);
        for (auto& g : gt) g = static_cast<int>(rng.uniform_int(20));
        const RankingReport r = rank_metrics(s, gt);
        for (std::size_t t = 0; t < 20; ++t) CHECK(r.ranks[t] == oracle_rank(s[t], gt[t]));
        CHECK(r.r_at_1 <= r.r_at_5);
        CHECK(r.r_at_5 <= r.r_at_10);
        CHECK(r.r_sum == doctest::Approx(r.r_at_1 + r.r_at_5 + r.r_at_10).epsilon(1e-9));
    }
}

TEST_CASE("shortlist of the whole gallery composes to a no-op") {
    const Mat s = random_matrix(7, 10, 30);
    std::vector<int> gt(10);
    Rng rng(77);
    for (auto& g : gt) g = static_cast<int>(rng.uniform_int(30));

    const Rescorer identity = [&](std::size_t t, const std::vector<int>& candidates) {
        Vec scores;
        for (int c : candidates) scores.push_back(s[t][static_cast<std::size_t>(c)]);
        return scores;
    };
    const RankingReport full = rank_metrics(s, gt);
    const RankingReport cut = rank_metrics(s, gt, &identity, 30);
    CHECK(full.ranks == cut.ranks);
}

TEST_CASE("a pair outside the shortlist gets the sentinel rank") {
    Mat s(1, Vec(6, 0.0));
    s[0][0] = 0.9;
    s[0][1] = 0.8;
    s[0][2] = 0.7;
    s[0][5] = 0.1;  // the pair, below the cut of 3
    const Rescorer identity = [&](std::size_t, const std::vector<int>& candidates) {
        Vec scores;
        for (int c : candidates) scores.push_back(s[0][static_cast<std::size_t>(c)]);
        return scores;
    };
    const RankingReport r = rank_metrics(s, {5}, &identity, 3);
    CHECK(r.ranks == std::vector<int>{4});
}

TEST_CASE("evaluate_policy on the synthetic benchmark") {
    const Corpus corpus = generate_synthetic(eval_spec());

    SelectorConfig base;
    base.policy = Policy::Uniform;
    base.k = 8;  // K = N: no selection
    const RankingReport base_report = evaluate_policy(corpus, base);

    SUBCASE("base protocol regression value") {
        // measured once on this seeded corpus, frozen as the baseline row
        CHECK(base_report.r_at_1 == doctest::Approx(95.0).epsilon(1e-9));
        CHECK(base_report.r_at_5 == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(base_report.r_at_10 == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(base_report.mdr == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(base_report.r_sum == doctest::Approx(295.0).epsilon(1e-9));
        // well above chance for this query noise level
        CHECK(base_report.r_at_1 >= 90.0);
    }
    SUBCASE("uniform K = N is exactly the base protocol") {
        const RankingReport again = evaluate_policy(corpus, base);
        CHECK(again.ranks == base_report.ranks);
        CHECK(again.r_sum == base_report.r_sum);
    }
    SUBCASE("evaluation is deterministic for the stochastic policies") {
        SelectorConfig config;
        config.policy = Policy::Random;
        config.k = 4;
        config.seed = 5;
        const RankingReport a = evaluate_policy(corpus, config);
        const RankingReport b = evaluate_policy(corpus, config);
        CHECK(a.ranks == b.ranks);

        config.policy = Policy::RedundancyAware;
        const RankingReport c = evaluate_policy(corpus, config);
        const RankingReport d = evaluate_policy(corpus, config);
        CHECK(c.ranks == d.ranks);
    }
    SUBCASE("text-guided evaluation produces a report") {
        SelectorConfig config;
        config.policy = Policy::NonInteractive;
        config.k = 4;
        const RankingReport r = evaluate_policy(corpus, config);
        CHECK(r.query_count == corpus.queries.size());
        CHECK(r.r_at_1 >= 90.0);  // queries aim straight at their target frame
    }
    SUBCASE("combination evaluation carries the policy echo") {
        SelectorConfig redun;
        redun.policy = Policy::RedundancyAware;
        redun.k = 4;
        redun.z = 4;
        SelectorConfig nint;
        nint.policy = Policy::NonInteractive;
        nint.k = 4;
        const RankingReport r = evaluate_combination(corpus, {redun, nint}, 4);
        CHECK(r.policy == "redun+nint");
        CHECK(r.query_count == corpus.queries.size());
    }
}

TEST_CASE("report serialization") {
    RankingReport r;
    r.policy = "uni";
    r.k = 4;
    r.r_at_1 = 50.0;
    r.r_at_5 = 75.0;
    r.r_at_10 = 100.0;
    r.r_sum = 225.0;
    r.mdr = 1.5;
    r.query_count = 2;
    r.ranks = {1, 6};
    const std::string json = ranking_report_json(r);
    CHECK(json.find("\"policy\": \"uni\"") != std::string::npos);
    const std::string table = ranking_table({r});
    CHECK(table.find("uni") != std::string::npos);
    CHECK(table.find("R@sum") != std::string::npos);
}
