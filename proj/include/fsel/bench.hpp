#ifndef FSEL_BENCH_HPP
#define FSEL_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fsel/common.hpp"
#include "fsel/corpus.hpp"
#include "fsel/selectors.hpp"

namespace fsel {

// Analytic multiply-add counts for one query against the whole gallery.
//
// Interaction stage, per (query, video): K*d for the query-frame scores over
// the K selected frames. The d multiply-adds of the pooled-similarity lookup
// are tracked separately so interaction_ops stays exactly proportional to K.
//
// Selection stage, per video: policy-specific —
//   uniform/random: 0 (index arithmetic only)
//   redundancy-aware: iterations * N * K * d
//   low-quality-aware: N * d
//   non-interactive: N * d
//   interactive: 3 * N * d * d' + N * d'
struct OpCounts {
    std::uint64_t interaction_ops = 0;
    std::uint64_t pooled_similarity_ops = 0;
    std::uint64_t selection_ops = 0;
    bool selection_cached = false;  // text-free selections run once, off the query path
};

struct OpCountOptions {
    std::uint64_t kmedoids_iterations = 1;
    int proj_dim = 0;  // 0 = same as d
};

OpCounts count_interaction_ops(Policy policy, int n, int k, int d, int video_count,
                               const OpCountOptions& options = {});

struct EfficiencyReport {
    std::string policy;
    int k = 0;
    int n = 0;
    int dim = 0;
    std::size_t video_count = 0;
    std::size_t query_count = 0;
    int repetitions = 0;
    OpCounts ops;
    double median_ms_per_query = 0.0;
    double mean_ms_per_query = 0.0;
    std::vector<double> per_rep_ms_per_query;
    std::string note;
};

/// Wall-clock of the per-query interaction over all videos, mirroring the
/// analytic count model. Text-free selections are computed once and cached
/// before timing starts; text-guided selections run inside the timed loop.
/// One untimed warm-up pass precedes the repetitions. Single-threaded.
EfficiencyReport time_policy(const Corpus& corpus, const SelectorConfig& config, int repetitions);

std::string efficiency_report_json(const EfficiencyReport& report);
std::string efficiency_table(const std::vector<EfficiencyReport>& rows);

}  // namespace fsel

#endif
