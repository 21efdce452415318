#ifndef FSEL_CORE_HPP
#define FSEL_CORE_HPP

#include "fsel/common.hpp"

namespace fsel {

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);

/// Cosine similarity of two nonzero vectors of equal dimension.
double cosine_similarity(const Vec& a, const Vec& b);

/// Numerically stable softmax (max-subtraction). Output is strictly positive,
/// sums to 1, and preserves the argmax of the logits.
Vec softmax(const Vec& logits, double temperature = 1.0);

/// Componentwise mean of the selected rows.
Vec mean_pool(const Mat& selected);

/// Softmax-weighted average of the selected rows. The weights are the softmax
/// of `raw_scores` over the selected rows only, so truncating a larger score
/// vector to a selection renormalizes automatically.
Vec weighted_pool(const Mat& selected, const Vec& raw_scores);

struct AttentionResult {
    Vec weights;  // softmax(q . k_i / sqrt(d')), one entry per key row
    Vec fused;    // weights . values
};

/// Single-head scaled dot-product attention of one query over N key/value rows.
AttentionResult scaled_dot_attention(const Vec& query, const Mat& keys, const Mat& values);

}  // namespace fsel

#endif
