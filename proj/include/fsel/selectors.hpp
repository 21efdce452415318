#ifndef FSEL_SELECTORS_HPP
#define FSEL_SELECTORS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsel/common.hpp"
#include "fsel/corpus.hpp"
#include "fsel/models.hpp"

namespace fsel {

enum class Policy {
    Uniform,
    Random,
    RedundancyAware,
    LowQualityAware,
    NonInteractive,
    Interactive,
};

bool policy_is_text_guided(Policy p);
bool policy_needs_scorer(Policy p);
bool policy_needs_attention(Policy p);
std::string policy_name(Policy p);                 // "uni", "rand", "redun", "lq", "nint", "int"
std::optional<Policy> policy_from_name(const std::string& name);

struct SelectorConfig {
    Policy policy = Policy::Uniform;
    int k = 1;
    int z = 0;  // cluster count for redundancy scoring in combinations; 0 = use k
    std::uint64_t seed = 0;
    const ScorerNet* scorer = nullptr;
    const AttentionSelector* attention = nullptr;

    int effective_z() const { return z > 0 ? z : k; }
};

struct SelectionResult {
    std::vector<int> indices;  // K distinct frame indices, ascending
    Vec scores;                // length N, nonnegative, sums to 1
    Vec pooled;                // video embedding pooled over the selection
    Vec fused;                 // interactive policy only: attention-fused text feature
};

/// Evenly spaced frame indices: floor(k * N / K) for k = 0..K-1.
std::vector<int> uniform_indices(int n, int k);

/// K distinct indices sampled uniformly without replacement, ascending.
std::vector<int> random_indices(int n, int k, std::uint64_t seed);

/// Indices of the k largest scores (ties to the lowest index), ascending.
std::vector<int> top_k_indices(const Vec& scores, int k);

SelectionResult select_uniform(const Mat& frames, int k);
SelectionResult select_random(const Mat& frames, int k, std::uint64_t seed);
SelectionResult select_redundancy_aware(const Mat& frames, int k, std::uint64_t seed);
SelectionResult select_low_quality_aware(const Mat& frames, const ScorerNet& scorer, int k);
SelectionResult select_non_interactive(const Mat& frames, const Vec& query, int k);
SelectionResult select_interactive(const Mat& frames, const Vec& query,
                                   const AttentionSelector& attention, int k);

/// The length-N score vector a policy contributes to a combination:
/// softmax relevancy for the learned/text policies, 1/Z on medoids for the
/// redundancy policy, 1/K on the selected indices for uniform/random.
Vec policy_scores(const Mat& frames, const Vec* query, const SelectorConfig& config,
                  std::uint64_t video_stream = 0);

/// Sum the per-policy score vectors, take the top-K of the cumulative score
/// (ties to the lowest index), renormalize the cumulative vector to sum 1.
/// The pooled embedding is the mean of the selected frames.
SelectionResult combine_select(const std::vector<Vec>& score_vectors, int k, const Mat& frames);

/// Dispatch one policy on one video. video_stream feeds the per-video seed
/// substream for the stochastic policies (random, redundancy-aware).
SelectionResult run_selector(const Mat& frames, const Vec* query, const SelectorConfig& config,
                             std::uint64_t video_stream = 0);

/// JSON document for a batch of selections: per (video_id, query_id or null)
/// the policy, K, indices and scores.
struct SelectionRecord {
    std::uint32_t video_id = 0;
    std::optional<std::uint32_t> query_id;
    SelectionResult result;
};
std::string selections_to_json(const std::string& policy_echo, int k,
                               const std::vector<SelectionRecord>& records);

}  // namespace fsel

#endif
