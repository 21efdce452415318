#include "fsel/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "fsel/clustering.hpp"
#include "fsel/core.hpp"
#include "fsel/rng.hpp"
#include "json.hpp"

namespace fsel {

OpCounts count_interaction_ops(Policy policy, int n, int k, int d, int video_count,
                               const OpCountOptions& options) {
    if (n < 1 || k < 1 || d < 1 || video_count < 1)
        throw DomainError("count_interaction_ops: arguments must be positive");

    const auto un = static_cast<std::uint64_t>(n);
    const auto uk = static_cast<std::uint64_t>(k);
    const auto ud = static_cast<std::uint64_t>(d);
    const auto uv = static_cast<std::uint64_t>(video_count);
    const auto udp = static_cast<std::uint64_t>(options.proj_dim > 0 ? options.proj_dim : d);

    OpCounts ops;
    ops.interaction_ops = uv * uk * ud;
    ops.pooled_similarity_ops = uv * ud;
    ops.selection_cached = !policy_is_text_guided(policy);
    switch (policy) {
        case Policy::Uniform:
        case Policy::Random:
            ops.selection_ops = 0;
            break;
        case Policy::RedundancyAware:
            ops.selection_ops = uv * options.kmedoids_iterations * un * uk * ud;
            break;
        case Policy::LowQualityAware:
            ops.selection_ops = uv * un * ud;
            break;
        case Policy::NonInteractive:
            ops.selection_ops = uv * un * ud;
            break;
        case Policy::Interactive:
            ops.selection_ops = uv * (3 * un * ud * udp + un * udp);
            break;
    }
    return ops;
}

namespace {

// The timed kernel mirrors the count model: K query-frame dot products plus
// one query-pooled dot product per video.
double interaction_pass(const Vec& query, const Mat& frames, const std::vector<int>& indices,
                        const Vec& pooled) {
    double sink = 0.0;
    for (int idx : indices) sink += dot(query, frames[static_cast<std::size_t>(idx)]);
    sink += dot(query, pooled);
    return sink;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

EfficiencyReport time_policy(const Corpus& corpus, const SelectorConfig& config,
                             int repetitions) {
    if (repetitions < 3) throw DomainError("time_policy: repetitions must be >= 3");
    if (corpus.videos.empty() || corpus.queries.empty())
        throw DomainError("time_policy: corpus needs videos and queries");

    const bool text_guided = policy_is_text_guided(config.policy);
    const std::size_t video_count = corpus.videos.size();

    EfficiencyReport report;
    report.policy = policy_name(config.policy);
    report.k = config.k;
    report.n = static_cast<int>(corpus.videos.front().frame_count());
    report.dim = static_cast<int>(corpus.dim);
    report.video_count = video_count;
    report.query_count = corpus.queries.size();
    report.repetitions = repetitions;
    report.note = text_guided
                      ? "selection runs inside the timed per-query loop"
                      : "text-free selection cached per video before timing";

    // Cached selections for the text-free policies (and actual k-medoids
    // iteration counts for the analytic selection cost).
    std::vector<std::vector<int>> cached_indices(video_count);
    Mat cached_pooled(video_count);
    std::uint64_t total_kmedoids_iterations = 0;
    if (!text_guided) {
        for (std::size_t v = 0; v < video_count; ++v) {
            if (config.policy == Policy::RedundancyAware) {
                const ClusterOutcome clusters =
                    kmedoids(corpus.videos[v].frames, config.k,
                             mix_seed(config.seed, corpus.videos[v].video_id));
                total_kmedoids_iterations += static_cast<std::uint64_t>(clusters.iterations);
                cached_indices[v] = clusters.medoid_indices;
                Mat rows;
                for (int i : cached_indices[v])
                    rows.push_back(corpus.videos[v].frames[static_cast<std::size_t>(i)]);
                cached_pooled[v] = mean_pool(rows);
            } else {
                const SelectionResult sel = run_selector(corpus.videos[v].frames, nullptr, config,
                                                         corpus.videos[v].video_id);
                cached_indices[v] = sel.indices;
                cached_pooled[v] = sel.pooled;
            }
        }
    }

    volatile double sink = 0.0;
    const auto run_pass = [&]() {
        double acc = 0.0;
        for (const auto& query : corpus.queries) {
            for (std::size_t v = 0; v < video_count; ++v) {
                const Mat& frames = corpus.videos[v].frames;
                if (text_guided) {
                    const SelectionResult sel = run_selector(frames, &query.embedding, config,
                                                             corpus.videos[v].video_id);
                    acc += interaction_pass(query.embedding, frames, sel.indices, sel.pooled);
                } else {
                    acc += interaction_pass(query.embedding, frames, cached_indices[v],
                                            cached_pooled[v]);
                }
            }
        }
        return acc;
    };

    sink = sink + run_pass();  // warm-up, excluded from timing

    using clock = std::chrono::steady_clock;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto t0 = clock::now();
        sink = sink + run_pass();
        const auto t1 = clock::now();
        const double total_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.per_rep_ms_per_query.push_back(total_ms /
                                              static_cast<double>(corpus.queries.size()));
    }

    report.median_ms_per_query = median(report.per_rep_ms_per_query);
    report.mean_ms_per_query = 0.0;
    for (double ms : report.per_rep_ms_per_query) report.mean_ms_per_query += ms;
    report.mean_ms_per_query /= static_cast<double>(report.per_rep_ms_per_query.size());

    OpCountOptions opts;
    if (config.policy == Policy::RedundancyAware && video_count > 0)
        opts.kmedoids_iterations =
            std::max<std::uint64_t>(1, total_kmedoids_iterations / video_count);
    if (config.policy == Policy::Interactive && config.attention)
        opts.proj_dim = static_cast<int>(config.attention->proj_dim());
    report.ops = count_interaction_ops(config.policy, report.n, config.k, report.dim,
                                       static_cast<int>(video_count), opts);
    return report;
}

std::string efficiency_report_json(const EfficiencyReport& report) {
    nlohmann::json j;
    j["policy"] = report.policy;
    j["k"] = report.k;
    j["n"] = report.n;
    j["dim"] = report.dim;
    j["video_count"] = report.video_count;
    j["query_count"] = report.query_count;
    j["repetitions"] = report.repetitions;
    j["interaction_ops"] = report.ops.interaction_ops;
    j["pooled_similarity_ops"] = report.ops.pooled_similarity_ops;
    j["selection_ops"] = report.ops.selection_ops;
    j["selection_cached"] = report.ops.selection_cached;
    j["note"] = report.note;
    j["wall_clock"] = {
        {"median_ms_per_query", report.median_ms_per_query},
        {"mean_ms_per_query", report.mean_ms_per_query},
        {"per_rep_ms_per_query", report.per_rep_ms_per_query},
    };
    return j.dump(2) + "\n";
}

std::string efficiency_table(const std::vector<EfficiencyReport>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "policy" << std::right << std::setw(6) << "K"
        << std::setw(6) << "N" << std::setw(16) << "interact_ops" << std::setw(16)
        << "selection_ops" << std::setw(14) << "median_ms" << std::setw(14) << "mean_ms"
        << "\n";
    out << std::string(82, '-') << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(10) << r.policy << std::right << std::setw(6) << r.k
            << std::setw(6) << r.n << std::setw(16) << r.ops.interaction_ops << std::setw(16)
            << r.ops.selection_ops << std::fixed << std::setprecision(4) << std::setw(14)
            << r.median_ms_per_query << std::setw(14) << r.mean_ms_per_query << "\n";
        out.unsetf(std::ios::fixed);
    }
    return out.str();
}

}  // namespace fsel
