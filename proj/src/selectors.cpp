#include "fsel/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsel/clustering.hpp"
#include "fsel/core.hpp"
#include "fsel/rng.hpp"
#include "json.hpp"

namespace fsel {

bool policy_is_text_guided(Policy p) {
    return p == Policy::NonInteractive || p == Policy::Interactive;
}

bool policy_needs_scorer(Policy p) { return p == Policy::LowQualityAware; }

bool policy_needs_attention(Policy p) { return p == Policy::Interactive; }

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::Uniform: return "uni";
        case Policy::Random: return "rand";
        case Policy::RedundancyAware: return "redun";
        case Policy::LowQualityAware: return "lq";
        case Policy::NonInteractive: return "nint";
        case Policy::Interactive: return "int";
    }
    return "?";
}

std::optional<Policy> policy_from_name(const std::string& name) {
    if (name == "uni") return Policy::Uniform;
    if (name == "rand") return Policy::Random;
    if (name == "redun") return Policy::RedundancyAware;
    if (name == "lq") return Policy::LowQualityAware;
    if (name == "nint") return Policy::NonInteractive;
    if (name == "int") return Policy::Interactive;
    return std::nullopt;
}

namespace {

void check_k(int n, int k, const char* who) {
    if (k < 1 || k > n) throw DomainError(std::string(who) + ": need 1 <= K <= N");
}

Mat gather_rows(const Mat& frames, const std::vector<int>& indices) {
    Mat out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(frames[static_cast<std::size_t>(i)]);
    return out;
}

Vec gather(const Vec& v, const std::vector<int>& indices) {
    Vec out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

// Degenerate score vector for the position-based policies: 1/K on the
// selected indices, 0 elsewhere.
Vec indicator_scores(std::size_t n, const std::vector<int>& indices) {
    Vec scores(n, 0.0);
    for (int i : indices) scores[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(indices.size());
    return scores;
}

// Shared tail of the relevancy-driven policies: softmax scores over all N
// frames, top-K by score, pooling weighted by the raw logits of the
// survivors (softmax renormalizes over the selection).
SelectionResult from_logits(const Mat& frames, const Vec& logits, int k) {
    SelectionResult r;
    r.scores = softmax(logits);
    r.indices = top_k_indices(r.scores, k);
    r.pooled = weighted_pool(gather_rows(frames, r.indices), gather(logits, r.indices));
    return r;
}

}  // namespace

std::vector<int> uniform_indices(int n, int k) {
    check_k(n, k, "select_uniform");
    std::vector<int> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<int>((static_cast<long long>(i) * n) / k);
    return out;
}

std::vector<int> random_indices(int n, int k, std::uint64_t seed) {
    check_k(n, k, "select_random");
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(seed);
    // partial Fisher-Yates: the first k slots become the sample
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<int> top_k_indices(const Vec& scores, int k) {
    check_k(static_cast<int>(scores.size()), k, "top_k_indices");
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

SelectionResult select_uniform(const Mat& frames, int k) {
    SelectionResult r;
    r.indices = uniform_indices(static_cast<int>(frames.size()), k);
    r.scores = indicator_scores(frames.size(), r.indices);
    r.pooled = mean_pool(gather_rows(frames, r.indices));
    return r;
}

SelectionResult select_random(const Mat& frames, int k, std::uint64_t seed) {
    SelectionResult r;
    r.indices = random_indices(static_cast<int>(frames.size()), k, seed);
    r.scores = indicator_scores(frames.size(), r.indices);
    r.pooled = mean_pool(gather_rows(frames, r.indices));
    return r;
}

SelectionResult select_redundancy_aware(const Mat& frames, int k, std::uint64_t seed) {
    const ClusterOutcome clusters = kmedoids(frames, k, seed);
    SelectionResult r;
    r.indices = clusters.medoid_indices;  // already ascending
    r.scores = indicator_scores(frames.size(), r.indices);
    r.pooled = mean_pool(gather_rows(frames, r.indices));
    return r;
}

SelectionResult select_low_quality_aware(const Mat& frames, const ScorerNet& scorer, int k) {
    check_k(static_cast<int>(frames.size()), k, "select_low_quality_aware");
    return from_logits(frames, scorer.scores(frames), k);
}

SelectionResult select_non_interactive(const Mat& frames, const Vec& query, int k) {
    check_k(static_cast<int>(frames.size()), k, "select_non_interactive");
    Vec logits(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        logits[i] = cosine_similarity(frames[i], query);
    return from_logits(frames, logits, k);
}

SelectionResult select_interactive(const Mat& frames, const Vec& query,
                                   const AttentionSelector& attention, int k) {
    check_k(static_cast<int>(frames.size()), k, "select_interactive");
    const auto fwd = attention.forward(frames, query);
    SelectionResult r = from_logits(frames, fwd.logits, k);
    r.fused = fwd.fused;
    return r;
}

Vec policy_scores(const Mat& frames, const Vec* query, const SelectorConfig& config,
                  std::uint64_t video_stream) {
    const int n = static_cast<int>(frames.size());
    const std::uint64_t seed = mix_seed(config.seed, video_stream);
    switch (config.policy) {
        case Policy::Uniform:
            return indicator_scores(frames.size(), uniform_indices(n, config.k));
        case Policy::Random:
            return indicator_scores(frames.size(), random_indices(n, config.k, seed));
        case Policy::RedundancyAware: {
            const int z = config.effective_z();
            check_k(n, z, "policy_scores(redun)");
            const ClusterOutcome clusters = kmedoids(frames, z, seed);
            Vec scores(frames.size(), 0.0);
            for (int m : clusters.medoid_indices)
                scores[static_cast<std::size_t>(m)] = 1.0 / static_cast<double>(z);
            return scores;
        }
        case Policy::LowQualityAware:
            if (!config.scorer) throw DomainError("policy_scores: scorer model required");
            return softmax(config.scorer->scores(frames));
        case Policy::NonInteractive: {
            if (!query) throw DomainError("policy_scores: query required");
            Vec logits(frames.size());
            for (std::size_t i = 0; i < frames.size(); ++i)
                logits[i] = cosine_similarity(frames[i], *query);
            return softmax(logits);
        }
        case Policy::Interactive: {
            if (!query) throw DomainError("policy_scores: query required");
            if (!config.attention) throw DomainError("policy_scores: attention model required");
            return config.attention->forward(frames, *query).weights;
        }
    }
    throw DomainError("policy_scores: unknown policy");
}

SelectionResult combine_select(const std::vector<Vec>& score_vectors, int k, const Mat& frames) {
    if (score_vectors.empty()) throw ShapeError("combine_select: no score vectors");
    const std::size_t n = score_vectors.front().size();
    for (const auto& v : score_vectors)
        if (v.size() != n) throw ShapeError("combine_select: score vector length mismatch");
    if (frames.size() != n) throw ShapeError("combine_select: frames/scores length mismatch");

    Vec cumulative(n, 0.0);
    for (const auto& v : score_vectors)
        for (std::size_t i = 0; i < n; ++i) cumulative[i] += v[i];

    SelectionResult r;
    r.indices = top_k_indices(cumulative, k);
    const double total = std::accumulate(cumulative.begin(), cumulative.end(), 0.0);
    r.scores = cumulative;
    for (auto& s : r.scores) s /= total;
    r.pooled = mean_pool(gather_rows(frames, r.indices));
    return r;
}

SelectionResult run_selector(const Mat& frames, const Vec* query, const SelectorConfig& config,
                             std::uint64_t video_stream) {
    const std::uint64_t seed = mix_seed(config.seed, video_stream);
    switch (config.policy) {
        case Policy::Uniform:
            return select_uniform(frames, config.k);
        case Policy::Random:
            return select_random(frames, config.k, seed);
        case Policy::RedundancyAware:
            return select_redundancy_aware(frames, config.k, seed);
        case Policy::LowQualityAware:
            if (!config.scorer) throw DomainError("run_selector: scorer model required");
            return select_low_quality_aware(frames, *config.scorer, config.k);
        case Policy::NonInteractive:
            if (!query) throw DomainError("run_selector: query required");
            return select_non_interactive(frames, *query, config.k);
        case Policy::Interactive:
            if (!query) throw DomainError("run_selector: query required");
            if (!config.attention) throw DomainError("run_selector: attention model required");
            return select_interactive(frames, *query, *config.attention, config.k);
    }
    throw DomainError("run_selector: unknown policy");
}

std::string selections_to_json(const std::string& policy_echo, int k,
                               const std::vector<SelectionRecord>& records) {
    nlohmann::json j;
    j["policy"] = policy_echo;
    j["k"] = k;
    j["selections"] = nlohmann::json::array();
    for (const auto& rec : records) {
        nlohmann::json item;
        item["video_id"] = rec.video_id;
        if (rec.query_id)
            item["query_id"] = *rec.query_id;
        else
            item["query_id"] = nullptr;
        item["indices"] = rec.result.indices;
        item["scores"] = rec.result.scores;
        j["selections"].push_back(std::move(item));
    }
    return j.dump(2) + "\n";
}

}  // namespace fsel
