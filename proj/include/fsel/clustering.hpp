#ifndef FSEL_CLUSTERING_HPP
#define FSEL_CLUSTERING_HPP

#include <cstdint>
#include <vector>

#include "fsel/common.hpp"

namespace fsel {

struct ClusterOutcome {
    std::vector<int> medoid_indices;  // ascending, one per cluster
    std::vector<int> assignment;      // length N, cluster ids in [0, K)
    double cost = 0.0;                // sum of (1 - cosine) to assigned medoid
    int iterations = 0;
    std::vector<double> cost_trace;   // cost after each full iteration, non-increasing
};

/// k-medoids over cosine distance (1 - cosine similarity).
///
/// Seeding is k-means++-style over medoids: the first medoid uniform at
/// random, each next one sampled proportionally to the squared distance to
/// its nearest chosen medoid. Refinement alternates nearest-medoid
/// assignment with replacing each medoid by the cluster member minimizing
/// the within-cluster distance sum, until the medoid set is stable or
/// max_iter is reached. All ties resolve to the lowest point index.
ClusterOutcome kmedoids(const Mat& points, int k, std::uint64_t seed, int max_iter = 100);

/// Audit of the k-medoids objective for an explicit (medoids, assignment).
double clustering_cost(const Mat& points, const std::vector<int>& medoid_indices,
                       const std::vector<int>& assignment);

struct BruteForceResult {
    std::vector<int> medoid_indices;  // ascending, lexicographically smallest optimum
    double cost = 0.0;
};

/// Exhaustive optimum over all K-subsets; refuses instances with more than
/// 10^6 candidate subsets.
BruteForceResult brute_force_medoids(const Mat& points, int k);

}  // namespace fsel

#endif
