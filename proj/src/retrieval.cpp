#include "fsel/retrieval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "fsel/core.hpp"
#include "json.hpp"

namespace fsel {
namespace {

int worker_threads() {
    const char* env = std::getenv("FSEL_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0, count); results must go into preallocated slots so
// the outcome is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int threads = std::min<int>(worker_threads(), static_cast<int>(count ? count : 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

int rank_in_row(const Vec& row, int target) {
    int rank = 1;
    const double target_score = row[static_cast<std::size_t>(target)];
    for (std::size_t v = 0; v < row.size(); ++v) {
        if (static_cast<int>(v) == target) continue;
        if (row[v] > target_score) ++rank;
        else if (row[v] == target_score && static_cast<int>(v) < target) ++rank;
    }
    return rank;
}

double median_of(std::vector<int> ranks) {
    std::sort(ranks.begin(), ranks.end());
    const std::size_t n = ranks.size();
    if (n % 2 == 1) return static_cast<double>(ranks[n / 2]);
    return 0.5 * (static_cast<double>(ranks[n / 2 - 1]) + static_cast<double>(ranks[n / 2]));
}

}  // namespace

Mat similarity_matrix(const Mat& pooled_videos, const Mat& queries) {
    Mat s(queries.size(), Vec(pooled_videos.size()));
    parallel_for(queries.size(), [&](std::size_t t) {
        for (std::size_t v = 0; v < pooled_videos.size(); ++v)
            s[t][v] = cosine_similarity(queries[t], pooled_videos[v]);
    });
    return s;
}

std::vector<int> shortlist(const Vec& similarity_row, int c) {
    if (c < 1) throw DomainError("shortlist: cut must be >= 1");
    const int cut = std::min<int>(c, static_cast<int>(similarity_row.size()));
    std::vector<int> order(similarity_row.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = similarity_row[static_cast<std::size_t>(a)];
        const double sb = similarity_row[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    order.resize(static_cast<std::size_t>(cut));
    return order;
}

RankingReport rank_metrics(const Mat& similarity, const std::vector<int>& ground_truth_cols,
                           const Rescorer* rescorer, int shortlist_size) {
    if (similarity.size() != ground_truth_cols.size())
        throw ShapeError("rank_metrics: one ground-truth column per query required");
    if (similarity.empty()) throw ShapeError("rank_metrics: empty similarity matrix");

    RankingReport report;
    report.query_count = similarity.size();
    report.ranks.resize(similarity.size());

    for (std::size_t t = 0; t < similarity.size(); ++t) {
        const Vec& row = similarity[t];
        const int target = ground_truth_cols[t];
        if (target < 0 || static_cast<std::size_t>(target) >= row.size())
            throw DomainError("rank_metrics: ground-truth id outside the video set");

        if (!rescorer) {
            report.ranks[t] = rank_in_row(row, target);
            continue;
        }

        const std::vector<int> candidates = shortlist(row, shortlist_size);
        const auto where = std::find(candidates.begin(), candidates.end(), target);
        if (where == candidates.end()) {
            report.ranks[t] = static_cast<int>(candidates.size()) + 1;
            continue;
        }
        const Vec rescored = (*rescorer)(t, candidates);
        if (rescored.size() != candidates.size())
            throw ShapeError("rank_metrics: rescorer must return one score per candidate");
        const std::size_t pos = static_cast<std::size_t>(where - candidates.begin());
        int rank = 1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (i == pos) continue;
            if (rescored[i] > rescored[pos]) ++rank;
            else if (rescored[i] == rescored[pos] && candidates[i] < candidates[pos]) ++rank;
        }
        report.ranks[t] = rank;
    }

    const double total = static_cast<double>(report.query_count);
    std::size_t hit1 = 0, hit5 = 0, hit10 = 0;
    for (int r : report.ranks) {
        hit1 += r <= 1;
        hit5 += r <= 5;
        hit10 += r <= 10;
    }
    report.r_at_1 = 100.0 * static_cast<double>(hit1) / total;
    report.r_at_5 = 100.0 * static_cast<double>(hit5) / total;
    report.r_at_10 = 100.0 * static_cast<double>(hit10) / total;
    report.r_sum = report.r_at_1 + report.r_at_5 + report.r_at_10;
    report.mdr = median_of(report.ranks);
    return report;
}

namespace {

std::vector<int> ground_truth_columns(const Corpus& corpus) {
    std::vector<int> cols(corpus.queries.size());
    for (std::size_t t = 0; t < corpus.queries.size(); ++t) {
        int col = -1;
        for (std::size_t v = 0; v < corpus.videos.size(); ++v)
            if (corpus.videos[v].video_id == corpus.queries[t].paired_video_id) {
                col = static_cast<int>(v);
                break;
            }
        if (col < 0) throw DomainError("evaluate: query pairs a missing video");
        cols[t] = col;
    }
    return cols;
}

}  // namespace

RankingReport evaluate_policy(const Corpus& corpus, const SelectorConfig& config) {
    if (corpus.videos.empty() || corpus.queries.empty())
        throw DomainError("evaluate_policy: corpus needs videos and queries");
    const std::vector<int> gt = ground_truth_columns(corpus);

    Mat similarity(corpus.queries.size(), Vec(corpus.videos.size()));
    if (!policy_is_text_guided(config.policy)) {
        Mat pooled(corpus.videos.size());
        parallel_for(corpus.videos.size(), [&](std::size_t v) {
            pooled[v] = run_selector(corpus.videos[v].frames, nullptr, config,
                                     corpus.videos[v].video_id).pooled;
        });
        Mat queries(corpus.queries.size());
        for (std::size_t t = 0; t < corpus.queries.size(); ++t)
            queries[t] = corpus.queries[t].embedding;
        similarity = similarity_matrix(pooled, queries);
    } else {
        // A text-guided selection depends on the query, so every matrix entry
        // gets its own per-query pooled embedding.
        parallel_for(corpus.queries.size(), [&](std::size_t t) {
            const Vec& query = corpus.queries[t].embedding;
            for (std::size_t v = 0; v < corpus.videos.size(); ++v) {
                const SelectionResult sel = run_selector(corpus.videos[v].frames, &query, config,
                                                         corpus.videos[v].video_id);
                similarity[t][v] = cosine_similarity(query, sel.pooled);
            }
        });
    }

    RankingReport report = rank_metrics(similarity, gt);
    report.policy = policy_name(config.policy);
    report.k = config.k;
    return report;
}

RankingReport evaluate_combination(const Corpus& corpus, const std::vector<SelectorConfig>& parts,
                                   int k) {
    if (parts.empty()) throw DomainError("evaluate_combination: no policies given");
    if (corpus.videos.empty() || corpus.queries.empty())
        throw DomainError("evaluate_combination: corpus needs videos and queries");
    const std::vector<int> gt = ground_truth_columns(corpus);

    bool text_guided = false;
    for (const auto& p : parts) text_guided = text_guided || policy_is_text_guided(p.policy);

    std::string echo;
    for (const auto& p : parts) {
        if (!echo.empty()) echo += "+";
        echo += policy_name(p.policy);
    }

    Mat similarity(corpus.queries.size(), Vec(corpus.videos.size()));
    if (!text_guided) {
        Mat pooled(corpus.videos.size());
        parallel_for(corpus.videos.size(), [&](std::size_t v) {
            const Mat& frames = corpus.videos[v].frames;
            std::vector<Vec> vectors;
            vectors.reserve(parts.size());
            for (const auto& p : parts)
                vectors.push_back(policy_scores(frames, nullptr, p, corpus.videos[v].video_id));
            pooled[v] = combine_select(vectors, k, frames).pooled;
        });
        Mat queries(corpus.queries.size());
        for (std::size_t t = 0; t < corpus.queries.size(); ++t)
            queries[t] = corpus.queries[t].embedding;
        similarity = similarity_matrix(pooled, queries);
    } else {
        parallel_for(corpus.queries.size(), [&](std::size_t t) {
            const Vec& query = corpus.queries[t].embedding;
            for (std::size_t v = 0; v < corpus.videos.size(); ++v) {
                const Mat& frames = corpus.videos[v].frames;
                std::vector<Vec> vectors;
                vectors.reserve(parts.size());
                for (const auto& p : parts)
                    vectors.push_back(policy_scores(frames, &query, p, corpus.videos[v].video_id));
                similarity[t][v] =
                    cosine_similarity(query, combine_select(vectors, k, frames).pooled);
            }
        });
    }

    RankingReport report = rank_metrics(similarity, gt);
    report.policy = echo;
    report.k = k;
    return report;
}

std::string ranking_report_json(const RankingReport& report) {
    nlohmann::json j;
    j["policy"] = report.policy;
    j["k"] = report.k;
    j["r_at_1"] = report.r_at_1;
    j["r_at_5"] = report.r_at_5;
    j["r_at_10"] = report.r_at_10;
    j["r_sum"] = report.r_sum;
    j["mdr"] = report.mdr;
    j["query_count"] = report.query_count;
    j["ranks"] = report.ranks;
    return j.dump(2) + "\n";
}

std::string ranking_table(const std::vector<RankingReport>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "policy" << std::right << std::setw(6) << "K"
        << std::setw(9) << "R@1" << std::setw(9) << "R@5" << std::setw(9) << "R@10"
        << std::setw(10) << "R@sum" << std::setw(8) << "MdR" << "\n";
    out << std::string(65, '-') << "\n";
    out << std::fixed << std::setprecision(1);
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.policy << std::right << std::setw(6) << r.k
            << std::setw(9) << r.r_at_1 << std::setw(9) << r.r_at_5 << std::setw(9) << r.r_at_10
            << std::setw(10) << r.r_sum << std::setw(8) << r.mdr << "\n";
    }
    return out.str();
}

}  // namespace fsel
