#include "doctest.h"
#include "fsel/bench.hpp"
#include "fsel/corpus.hpp"

using namespace fsel;

TEST_CASE("interaction op counts scale exactly with K") {
    const auto base = count_interaction_ops(Policy::Uniform, 16, 16, 64, 1000);
    const auto k12 = count_interaction_ops(Policy::Uniform, 16, 12, 64, 1000);
    const auto k8 = count_interaction_ops(Policy::Uniform, 16, 8, 64, 1000);
    const auto k6 = count_interaction_ops(Policy::Uniform, 16, 6, 64, 1000);

    CHECK(base.interaction_ops == 1000ULL * 16 * 64);
    CHECK(static_cast<double>(k12.interaction_ops) / static_cast<double>(base.interaction_ops) ==
          doctest::Approx(0.75));
    CHECK(k8.interaction_ops * 2 == base.interaction_ops);
    CHECK(static_cast<double>(k6.interaction_ops) / static_cast<double>(base.interaction_ops) ==
          doctest::Approx(0.375));
    CHECK(base.pooled_similarity_ops == 1000ULL * 64);

    CHECK_THROWS_AS(count_interaction_ops(Policy::Uniform, 0, 1, 1, 1), DomainError);
}

TEST_CASE("selection op counts follow the policy cost model") {
    OpCountOptions opts;
    opts.kmedoids_iterations = 4;
    const auto redun = count_interaction_ops(Policy::RedundancyAware, 16, 6, 64, 100, opts);
    CHECK(redun.selection_ops == 100ULL * 4 * 16 * 6 * 64);
    CHECK(redun.selection_cached);

    const auto lq = count_interaction_ops(Policy::LowQualityAware, 16, 6, 64, 100);
    CHECK(lq.selection_ops == 100ULL * 16 * 64);

    opts = OpCountOptions{};
    opts.proj_dim = 32;
    const auto inter = count_interaction_ops(Policy::Interactive, 16, 6, 64, 100, opts);
    CHECK(inter.selection_ops == 100ULL * (3 * 16 * 64 * 32 + 16 * 32));
    CHECK_FALSE(inter.selection_cached);

    const auto uni = count_interaction_ops(Policy::Uniform, 16, 6, 64, 100);
    CHECK(uni.selection_ops == 0);
}

TEST_CASE("time_policy validates and reports") {
    SynthSpec spec;
    spec.video_count = 30;
    spec.frames_per_video = 8;
    spec.planted_clusters = 2;
    spec.dim = 16;
    spec.seed = 4;
    const Corpus corpus = generate_synthetic(spec);

    SelectorConfig config;
    config.policy = Policy::Uniform;
    config.k = 4;

    CHECK_THROWS_AS(time_policy(corpus, config, 2), DomainError);

    const EfficiencyReport report = time_policy(corpus, config, 3);
    CHECK(report.repetitions == 3);
    CHECK(report.per_rep_ms_per_query.size() == 3);
    for (double ms : report.per_rep_ms_per_query) CHECK(ms > 0.0);
    // median at or below mean, allowing 20% jitter
    CHECK(report.median_ms_per_query <= report.mean_ms_per_query * 1.2);
    CHECK(report.ops.interaction_ops == 30ULL * 4 * 16);
    CHECK(report.ops.selection_cached);

    // K = N dominates every smaller K in op count
    const auto full = count_interaction_ops(Policy::Uniform, 8, 8, 16, 30);
    for (int k = 1; k <= 8; ++k)
        CHECK(count_interaction_ops(Policy::Uniform, 8, k, 16, 30).interaction_ops <=
              full.interaction_ops);

    const std::string json = efficiency_report_json(report);
    CHECK(json.find("\"interaction_ops\"") != std::string::npos);
    const std::string table = efficiency_table({report});
    CHECK(table.find("uni") != std::string::npos);
}
