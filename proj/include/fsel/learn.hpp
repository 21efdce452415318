#ifndef FSEL_LEARN_HPP
#define FSEL_LEARN_HPP

#include <cstdint>
#include <vector>

#include "fsel/common.hpp"
#include "fsel/corpus.hpp"
#include "fsel/models.hpp"

namespace fsel {

struct TrainConfig {
    int epochs = 200;
    int batch_size = 4;
    double learning_rate = 5e-4;
    std::uint64_t seed = 0;
    double initial_temperature = 0.07;  // starting value for the learnable tau / lambda
    bool use_cl = false;                // gates the contrastive selection objective
};

// One training minibatch: B videos' frame matrices paired row-wise with B
// text embeddings.
struct PairBatch {
    std::vector<Mat> frames;
    Mat texts;
};

struct VtcParts {
    double t2v = 0.0;
    double v2t = 0.0;
    double total = 0.0;  // (t2v + v2t) / 2
};

/// Symmetric in-batch video-text contrastive loss over cosine similarities
/// with temperature tau.
VtcParts vtc_loss_parts(const Mat& video_embeds, const Mat& text_embeds, double tau);
double vtc_loss(const Mat& video_embeds, const Mat& text_embeds, double tau);

/// One-directional contrastive loss pulling each fused feature toward its
/// paired text against the in-batch texts, temperature lambda.
double cl_loss(const Mat& fused, const Mat& text_embeds, double lambda);

/// Kaiming-normal matrix: zero mean, standard deviation sqrt(2 / fan_in).
Mat init_params(int fan_in, int fan_out, std::uint64_t seed);

// --- scorer objective -------------------------------------------------------
// Forward per video: logits from the scorer over all N frames, softmax
// weights, weighted-sum video embedding; VTC loss against the paired texts.
// Training keeps the selection soft (all frames weighted); hard top-K applies
// only at selection time.

struct ScorerGradients {
    Vec d_weight;
    double d_bias = 0.0;
    double d_log_tau = 0.0;
    double loss = 0.0;
};

double scorer_objective(const ScorerNet& model, double log_tau, const PairBatch& batch);
ScorerGradients scorer_gradients(const ScorerNet& model, double log_tau, const PairBatch& batch);

// --- attention objective ----------------------------------------------------
// Forward per pair: attention-fused feature over all N frames; CL loss
// against the paired texts. Requires the selector's projection dimension to
// equal the embedding dimension so fused/text cosines are defined.

struct AttentionGradients {
    Mat d_w_q;
    Mat d_w_k;
    Mat d_w_v;
    double d_log_lambda = 0.0;
    double loss = 0.0;
};

double attention_objective(const AttentionSelector& model, const PairBatch& batch);
AttentionGradients attention_gradients(const AttentionSelector& model, const PairBatch& batch);

/// Max over parameters of |analytic - central difference| / max(|numeric|, 1e-8).
double finite_diff_check(const ScorerNet& model, double log_tau, const PairBatch& batch,
                         double eps);
double finite_diff_check(const AttentionSelector& model, const PairBatch& batch, double eps);

// --- training loops ---------------------------------------------------------
// Plain minibatch gradient descent, seeded shuffle each epoch, trailing
// partial batch dropped. loss_trace[0] is the pre-training loss and one entry
// follows per epoch, each evaluated over the dataset in canonical batch order
// so the trace is comparable across epochs.

struct ScorerTrainResult {
    ScorerNet model;
    double log_vtc_temperature = 0.0;
    std::vector<double> loss_trace;
};

struct AttentionTrainResult {
    AttentionSelector model;
    std::vector<double> loss_trace;
};

ScorerTrainResult train_scorer(const Corpus& corpus, const TrainConfig& config);
AttentionTrainResult train_attention_selector(const Corpus& corpus, const TrainConfig& config);

}  // namespace fsel

#endif
