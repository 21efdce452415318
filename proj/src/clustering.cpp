#include "fsel/clustering.hpp"

#include <algorithm>
#include <cmath>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"

namespace fsel {
namespace {

Mat cosine_distance_matrix(const Mat& points) {
    const std::size_t n = points.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(points[i]);
        if (norms[i] == 0.0) throw DomainError("kmedoids: zero-norm point");
    }
    Mat dist(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = 1.0 - dot(points[i], points[j]) / (norms[i] * norms[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    return dist;
}

std::vector<int> seed_medoids(const Mat& dist, int k, Rng& rng) {
    const int n = static_cast<int>(dist.size());
    std::vector<bool> chosen(n, false);
    std::vector<int> medoids;
    medoids.reserve(k);

    int first = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    medoids.push_back(first);
    chosen[first] = true;

    std::vector<double> nearest_sq(n);
    while (static_cast<int>(medoids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            if (chosen[i]) {
                nearest_sq[i] = 0.0;
                continue;
            }
            double best = dist[i][medoids[0]];
            for (std::size_t m = 1; m < medoids.size(); ++m)
                best = std::min(best, dist[i][medoids[m]]);
            nearest_sq[i] = best * best;
            total += nearest_sq[i];
        }
        int pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            int last_positive = -1;
            for (int i = 0; i < n; ++i) {
                if (chosen[i] || nearest_sq[i] <= 0.0) continue;
                last_positive = i;
                acc += nearest_sq[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = last_positive;  // rounding slack at the top end
        }
        if (pick < 0) {
            // all remaining weights zero (duplicate points): lowest unchosen index
            for (int i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        medoids.push_back(pick);
        chosen[pick] = true;
    }
    std::sort(medoids.begin(), medoids.end());
    return medoids;
}

// Nearest-medoid assignment; a medoid always lands in its own cluster, other
// ties go to the lowest cluster id (medoids are kept sorted by index).
std::vector<int> assign_points(const Mat& dist, const std::vector<int>& medoids) {
    const int n = static_cast<int>(dist.size());
    std::vector<int> assignment(n, 0);
    for (int i = 0; i < n; ++i) {
        int self = -1;
        for (std::size_t c = 0; c < medoids.size(); ++c)
            if (medoids[c] == i) {
                self = static_cast<int>(c);
                break;
            }
        if (self >= 0) {
            assignment[i] = self;
            continue;
        }
        int best = 0;
        double best_d = dist[i][medoids[0]];
        for (std::size_t c = 1; c < medoids.size(); ++c) {
            const double d = dist[i][medoids[c]];
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assignment[i] = best;
    }
    return assignment;
}

double assignment_cost(const Mat& dist, const std::vector<int>& medoids,
                       const std::vector<int>& assignment) {
    double cost = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        cost += dist[i][medoids[static_cast<std::size_t>(assignment[i])]];
    return cost;
}

}  // namespace

ClusterOutcome kmedoids(const Mat& points, int k, std::uint64_t seed, int max_iter) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw DomainError("kmedoids: need 1 <= K <= N");
    check_rectangular(points, "kmedoids");
    const Mat dist = cosine_distance_matrix(points);

    Rng rng(seed);
    std::vector<int> medoids = seed_medoids(dist, k, rng);

    ClusterOutcome outcome;
    std::vector<int> assignment;
    for (int iter = 1; iter <= max_iter; ++iter) {
        assignment = assign_points(dist, medoids);

        // Replace each medoid by its cluster's distance-sum minimizer.
        std::vector<int> next(medoids);
        for (int c = 0; c < k; ++c) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (assignment[static_cast<std::size_t>(i)] == c) members.push_back(i);
            double best_sum = 0.0;
            int best = -1;
            for (int cand : members) {
                double sum = 0.0;
                for (int m : members) sum += dist[cand][m];
                if (best < 0 || sum < best_sum) {
                    best_sum = sum;
                    best = cand;
                }
            }
            next[static_cast<std::size_t>(c)] = best;
        }
        std::sort(next.begin(), next.end());

        outcome.cost_trace.push_back(assignment_cost(dist, next, assign_points(dist, next)));
        outcome.iterations = iter;
        const bool stable = next == medoids;
        medoids = std::move(next);
        if (stable) break;
    }

    // Equal-cost medoid swaps resolve to the lowest frame index: migrate any
    // medoid to a smaller-index point whenever the total cost is unchanged
    // (exactly). On duplicate-free data this is a no-op; with duplicated
    // frames it makes the reported medoid set canonical.
    {
        double current = assignment_cost(dist, medoids, assign_points(dist, medoids));
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t c = 0; c < medoids.size() && !changed; ++c) {
                for (int x = 0; x < medoids[c] && !changed; ++x) {
                    if (std::find(medoids.begin(), medoids.end(), x) != medoids.end()) continue;
                    std::vector<int> candidate = medoids;
                    candidate[c] = x;
                    std::sort(candidate.begin(), candidate.end());
                    const double cost =
                        assignment_cost(dist, candidate, assign_points(dist, candidate));
                    if (cost == current) {
                        medoids = std::move(candidate);
                        changed = true;
                    }
                }
            }
        }
    }

    outcome.medoid_indices = medoids;
    outcome.assignment = assign_points(dist, medoids);
    outcome.cost = assignment_cost(dist, medoids, outcome.assignment);
    return outcome;
}

double clustering_cost(const Mat& points, const std::vector<int>& medoid_indices,
                       const std::vector<int>& assignment) {
    if (assignment.size() != points.size())
        throw ShapeError("clustering_cost: assignment length mismatch");
    check_rectangular(points, "clustering_cost");
    double cost = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const int c = assignment[i];
        if (c < 0 || static_cast<std::size_t>(c) >= medoid_indices.size())
            throw ShapeError("clustering_cost: cluster id out of range");
        const int m = medoid_indices[static_cast<std::size_t>(c)];
        if (m < 0 || static_cast<std::size_t>(m) >= points.size())
            throw ShapeError("clustering_cost: medoid index out of range");
        cost += 1.0 - cosine_similarity(points[i], points[static_cast<std::size_t>(m)]);
    }
    return cost;
}

BruteForceResult brute_force_medoids(const Mat& points, int k) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw DomainError("brute_force_medoids: need 1 <= K <= N");

    // C(n, k) with early cutoff
    double combos = 1.0;
    for (int i = 0; i < k; ++i) combos = combos * (n - i) / (i + 1);
    if (combos > 1e6) throw DomainError("brute_force_medoids: too many candidate subsets");

    const Mat dist = cosine_distance_matrix(points);

    std::vector<int> subset(k);
    for (int i = 0; i < k; ++i) subset[i] = i;

    BruteForceResult best;
    bool have_best = false;
    for (;;) {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
            double nearest = dist[i][subset[0]];
            for (int c = 1; c < k; ++c) nearest = std::min(nearest, dist[i][subset[c]]);
            cost += nearest;
        }
        // lexicographic enumeration makes strict < keep the smallest optimum
        if (!have_best || cost < best.cost) {
            best.cost = cost;
            best.medoid_indices = subset;
            have_best = true;
        }

        // next lexicographic k-subset of [0, n)
        int pos = k - 1;
        while (pos >= 0 && subset[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++subset[pos];
        for (int i = pos + 1; i < k; ++i) subset[i] = subset[i - 1] + 1;
    }
    return best;
}

}  // namespace fsel
