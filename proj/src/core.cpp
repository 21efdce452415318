#include "fsel/core.hpp"

#include <algorithm>
#include <cmath>

namespace fsel {

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine_similarity(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: dimension mismatch");
    if (a.empty()) throw ShapeError("cosine_similarity: empty vector");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) throw DomainError("cosine_similarity: zero-norm input");
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Vec softmax(const Vec& logits, double temperature) {
    if (logits.empty()) throw ShapeError("softmax: empty input");
    if (!(temperature > 0.0)) throw DomainError("softmax: temperature must be positive");
    const double m = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp((logits[i] - m) / temperature);
        total += out[i];
    }
    for (auto& w : out) w /= total;
    return out;
}

Vec mean_pool(const Mat& selected) {
    if (selected.empty()) throw ShapeError("mean_pool: empty selection");
    check_rectangular(selected, "mean_pool");
    Vec out(selected.front().size(), 0.0);
    for (const auto& row : selected)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
    for (auto& x : out) x /= static_cast<double>(selected.size());
    return out;
}

Vec weighted_pool(const Mat& selected, const Vec& raw_scores) {
    if (selected.size() != raw_scores.size())
        throw ShapeError("weighted_pool: score/frame count mismatch");
    if (selected.empty()) throw ShapeError("weighted_pool: empty selection");
    check_rectangular(selected, "weighted_pool");
    const Vec weights = softmax(raw_scores);
    Vec out(selected.front().size(), 0.0);
    for (std::size_t k = 0; k < selected.size(); ++k)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += weights[k] * selected[k][j];
    return out;
}

AttentionResult scaled_dot_attention(const Vec& query, const Mat& keys, const Mat& values) {
    if (keys.empty() || values.empty()) throw ShapeError("scaled_dot_attention: empty keys/values");
    if (keys.size() != values.size())
        throw ShapeError("scaled_dot_attention: key/value row count mismatch");
    check_rectangular(keys, "scaled_dot_attention keys");
    check_rectangular(values, "scaled_dot_attention values");
    if (keys.front().size() != query.size())
        throw ShapeError("scaled_dot_attention: query/key dimension mismatch");
    if (query.empty()) throw ShapeError("scaled_dot_attention: empty query");

    const double scale = 1.0 / std::sqrt(static_cast<double>(query.size()));
    Vec logits(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) logits[i] = dot(query, keys[i]) * scale;

    AttentionResult r;
    r.weights = softmax(logits);
    r.fused.assign(values.front().size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = 0; j < r.fused.size(); ++j)
            r.fused[j] += r.weights[i] * values[i][j];
    return r;
}

}  // namespace fsel
