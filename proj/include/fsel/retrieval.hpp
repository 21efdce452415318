#ifndef FSEL_RETRIEVAL_HPP
#define FSEL_RETRIEVAL_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fsel/common.hpp"
#include "fsel/corpus.hpp"
#include "fsel/selectors.hpp"

namespace fsel {

struct RankingReport {
    double r_at_1 = 0.0;   // percentages
    double r_at_5 = 0.0;
    double r_at_10 = 0.0;
    double mdr = 0.0;      // median rank, >= 1
    double r_sum = 0.0;    // r_at_1 + r_at_5 + r_at_10
    std::size_t query_count = 0;
    std::string policy;    // echo of what was evaluated
    int k = 0;
    std::vector<int> ranks;  // per query, in query order
};

/// Dense cosine similarity, entry (t, v) = cos(query_t, video_v).
Mat similarity_matrix(const Mat& pooled_videos, const Mat& queries);

/// Indices of the c largest entries (ties to the lower index), ordered by
/// descending similarity. c is clamped to the row length.
std::vector<int> shortlist(const Vec& similarity_row, int c);

/// Optional second-stage scorer over a shortlist: maps (query index,
/// candidate column indices) to replacement scores, one per candidate.
using Rescorer = std::function<Vec(std::size_t query_index, const std::vector<int>& candidates)>;

/// Ranks each query's ground-truth column in the descending-similarity order;
/// ties are pessimistic (the pair ranks after equal-scored rivals with lower
/// index). With a rescorer, ranking happens inside the top-`shortlist_size`
/// candidates and a missed pair gets rank shortlist_size + 1.
RankingReport rank_metrics(const Mat& similarity, const std::vector<int>& ground_truth_cols,
                           const Rescorer* rescorer = nullptr, int shortlist_size = 128);

/// Full Table-1-style protocol for one policy: select, pool, score, rank.
/// Honors the FSEL_THREADS environment variable for per-row parallelism.
RankingReport evaluate_policy(const Corpus& corpus, const SelectorConfig& config);

/// Same protocol for a score-summing combination of policies. All parts share
/// k and seed; the combined selection is mean-pooled.
RankingReport evaluate_combination(const Corpus& corpus,
                                   const std::vector<SelectorConfig>& parts, int k);

std::string ranking_report_json(const RankingReport& report);
std::string ranking_table(const std::vector<RankingReport>& rows);

}  // namespace fsel

#endif
