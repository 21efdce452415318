#include "fsel/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"

namespace fsel {
namespace {

constexpr std::uint64_t kScorerInitStream = 0x10;
constexpr std::uint64_t kAttnQStream = 0x21;
constexpr std::uint64_t kAttnKStream = 0x22;
constexpr std::uint64_t kAttnVStream = 0x23;
constexpr std::uint64_t kShuffleStream = 0x30;

void check_batch(const Mat& a, const Mat& b, const char* who) {
    if (a.size() != b.size()) throw ShapeError(std::string(who) + ": batch size mismatch");
    if (a.size() < 2) throw DomainError(std::string(who) + ": contrastive batch needs B >= 2");
}

// d cos(u, v) / d u  =  v / (|u||v|)  -  cos * u / |u|^2
Vec cosine_grad_u(const Vec& u, const Vec& v) {
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw DomainError("cosine gradient: zero-norm input");
    const double c = dot(u, v) / (nu * nv);
    Vec g(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        g[i] = v[i] / (nu * nv) - c * u[i] / (nu * nu);
    return g;
}

Mat cosine_matrix(const Mat& left, const Mat& right) {
    Mat s(left.size(), Vec(right.size()));
    for (std::size_t i = 0; i < left.size(); ++i)
        for (std::size_t j = 0; j < right.size(); ++j)
            s[i][j] = cosine_similarity(left[i], right[j]);
    return s;
}

// Loss gradient with respect to the similarity matrix, plus the
// log-temperature gradient. Both contrastive objectives reduce to softmax
// cross-entropy over rows and/or columns of S / tau:
//   dL/dS[a][b] = (1 / (B tau)) * (P[a][b] - delta_ab)      per direction
//   dL/dlog tau = -sum_ab dL/dS[a][b] * S[a][b]
struct SimilarityGrad {
    Mat d_s;
    double d_log_tau = 0.0;
    double loss = 0.0;
};

SimilarityGrad contrastive_grad(const Mat& s, double tau, bool rows, bool cols) {
    const std::size_t b = s.size();
    const double directions = (rows ? 1.0 : 0.0) + (cols ? 1.0 : 0.0);
    SimilarityGrad g;
    g.d_s.assign(b, Vec(b, 0.0));

    if (rows) {
        for (std::size_t i = 0; i < b; ++i) {
            Vec logits(b);
            for (std::size_t j = 0; j < b; ++j) logits[j] = s[i][j] / tau;
            const Vec p = softmax(logits);
            g.loss += -std::log(p[i]) / static_cast<double>(b) / directions;
            for (std::size_t j = 0; j < b; ++j)
                g.d_s[i][j] += (p[j] - (i == j ? 1.0 : 0.0)) /
                               (static_cast<double>(b) * tau * directions);
        }
    }
    if (cols) {
        for (std::size_t j = 0; j < b; ++j) {
            Vec logits(b);
            for (std::size_t i = 0; i < b; ++i) logits[i] = s[i][j] / tau;
            const Vec p = softmax(logits);
            g.loss += -std::log(p[j]) / static_cast<double>(b) / directions;
            for (std::size_t i = 0; i < b; ++i)
                g.d_s[i][j] += (p[i] - (i == j ? 1.0 : 0.0)) /
                               (static_cast<double>(b) * tau * directions);
        }
    }
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) g.d_log_tau -= g.d_s[i][j] * s[i][j];
    return g;
}

void check_pair_batch(const PairBatch& batch, const char* who) {
    if (batch.frames.size() != batch.texts.size())
        throw ShapeError(std::string(who) + ": frames/texts batch size mismatch");
    if (batch.frames.size() < 2)
        throw DomainError(std::string(who) + ": contrastive batch needs B >= 2");
    for (const auto& f : batch.frames)
        if (f.empty()) throw ShapeError(std::string(who) + ": video with no frames");
}

}  // namespace

VtcParts vtc_loss_parts(const Mat& video_embeds, const Mat& text_embeds, double tau) {
    check_batch(video_embeds, text_embeds, "vtc_loss");
    if (!(tau > 0.0)) throw DomainError("vtc_loss: temperature must be positive");
    const std::size_t b = video_embeds.size();
    const Mat s = cosine_matrix(video_embeds, text_embeds);

    VtcParts parts;
    for (std::size_t i = 0; i < b; ++i) {
        Vec col(b), row(b);
        for (std::size_t j = 0; j < b; ++j) {
            col[j] = s[j][i] / tau;  // text i against all videos
            row[j] = s[i][j] / tau;  // video i against all texts
        }
        parts.t2v += -std::log(softmax(col)[i]) / static_cast<double>(b);
        parts.v2t += -std::log(softmax(row)[i]) / static_cast<double>(b);
    }
    parts.total = 0.5 * (parts.t2v + parts.v2t);
    return parts;
}

double vtc_loss(const Mat& video_embeds, const Mat& text_embeds, double tau) {
    return vtc_loss_parts(video_embeds, text_embeds, tau).total;
}

double cl_loss(const Mat& fused, const Mat& text_embeds, double lambda) {
    check_batch(fused, text_embeds, "cl_loss");
    if (!(lambda > 0.0)) throw DomainError("cl_loss: temperature must be positive");
    const std::size_t b = fused.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        Vec logits(b);
        for (std::size_t j = 0; j < b; ++j)
            logits[j] = cosine_similarity(text_embeds[j], fused[i]) / lambda;
        loss += -std::log(softmax(logits)[i]) / static_cast<double>(b);
    }
    return loss;
}

Mat init_params(int fan_in, int fan_out, std::uint64_t seed) {
    if (fan_in < 1 || fan_out < 1) throw DomainError("init_params: dimensions must be positive");
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Rng rng(seed);
    Mat w(static_cast<std::size_t>(fan_in), Vec(static_cast<std::size_t>(fan_out)));
    for (auto& row : w)
        for (auto& x : row) x = stddev * rng.normal();
    return w;
}

// --- scorer -----------------------------------------------------------------

namespace {

struct ScorerForward {
    Mat pooled;                 // B x d video embeddings
    std::vector<Vec> weights;   // per video, softmax over its N frames
};

ScorerForward scorer_forward(const ScorerNet& model, const PairBatch& batch) {
    ScorerForward f;
    f.pooled.reserve(batch.frames.size());
    f.weights.reserve(batch.frames.size());
    for (const auto& frames : batch.frames) {
        const Vec alpha = softmax(model.scores(frames));
        Vec pooled(frames.front().size(), 0.0);
        for (std::size_t i = 0; i < frames.size(); ++i)
            for (std::size_t j = 0; j < pooled.size(); ++j)
                pooled[j] += alpha[i] * frames[i][j];
        f.weights.push_back(alpha);
        f.pooled.push_back(std::move(pooled));
    }
    return f;
}

}  // namespace

double scorer_objective(const ScorerNet& model, double log_tau, const PairBatch& batch) {
    check_pair_batch(batch, "scorer_objective");
    const ScorerForward f = scorer_forward(model, batch);
    return vtc_loss(f.pooled, batch.texts, std::exp(log_tau));
}

ScorerGradients scorer_gradients(const ScorerNet& model, double log_tau, const PairBatch& batch) {
    check_pair_batch(batch, "scorer_gradients");
    const std::size_t b = batch.frames.size();
    const double tau = std::exp(log_tau);

    const ScorerForward f = scorer_forward(model, batch);
    const Mat s = cosine_matrix(f.pooled, batch.texts);
    const SimilarityGrad sg = contrastive_grad(s, tau, /*rows=*/true, /*cols=*/true);

    ScorerGradients g;
    g.loss = sg.loss;
    g.d_log_tau = sg.d_log_tau;
    g.d_weight.assign(model.dim(), 0.0);

    for (std::size_t vb = 0; vb < b; ++vb) {
        // dL/d pooled_vb through every similarity involving this video
        Vec d_pooled(model.dim(), 0.0);
        for (std::size_t tb = 0; tb < b; ++tb) {
            if (sg.d_s[vb][tb] == 0.0) continue;
            const Vec dc = cosine_grad_u(f.pooled[vb], batch.texts[tb]);
            for (std::size_t j = 0; j < d_pooled.size(); ++j)
                d_pooled[j] += sg.d_s[vb][tb] * dc[j];
        }

        // back through the softmax weighting: pooled = sum_i alpha_i frame_i
        const Mat& frames = batch.frames[vb];
        const Vec& alpha = f.weights[vb];
        Vec d_alpha(frames.size());
        for (std::size_t i = 0; i < frames.size(); ++i) d_alpha[i] = dot(d_pooled, frames[i]);
        double mean = 0.0;
        for (std::size_t i = 0; i < frames.size(); ++i) mean += alpha[i] * d_alpha[i];
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const double d_logit = alpha[i] * (d_alpha[i] - mean);
            for (std::size_t j = 0; j < model.dim(); ++j)
                g.d_weight[j] += d_logit * frames[i][j];
            g.d_bias += d_logit;
        }
    }
    return g;
}

// --- attention selector ------------------------------------------------------

namespace {

struct AttentionForward {
    std::vector<AttentionSelector::Forward> per_pair;
    Mat fused;  // B x d'
};

AttentionForward attention_forward(const AttentionSelector& model, const PairBatch& batch) {
    AttentionForward f;
    f.per_pair.reserve(batch.frames.size());
    for (std::size_t i = 0; i < batch.frames.size(); ++i) {
        f.per_pair.push_back(model.forward(batch.frames[i], batch.texts[i]));
        f.fused.push_back(f.per_pair.back().fused);
    }
    return f;
}

void check_square_projection(const AttentionSelector& model, const char* who) {
    if (model.proj_dim() != model.dim())
        throw DomainError(std::string(who) +
                          ": contrastive objective needs projection dim == embedding dim");
}

}  // namespace

double attention_objective(const AttentionSelector& model, const PairBatch& batch) {
    check_pair_batch(batch, "attention_objective");
    check_square_projection(model, "attention_objective");
    const AttentionForward f = attention_forward(model, batch);
    return cl_loss(f.fused, batch.texts, model.temperature());
}

AttentionGradients attention_gradients(const AttentionSelector& model, const PairBatch& batch) {
    check_pair_batch(batch, "attention_gradients");
    check_square_projection(model, "attention_gradients");
    const std::size_t b = batch.frames.size();
    const std::size_t d = model.dim();
    const std::size_t dp = model.proj_dim();
    const double lambda = model.temperature();

    const AttentionForward f = attention_forward(model, batch);

    // S[i][j] = cos(text_j, fused_i): row softmax over texts per fused row.
    Mat s(b, Vec(b));
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j)
            s[i][j] = cosine_similarity(batch.texts[j], f.fused[i]);
    const SimilarityGrad sg = contrastive_grad(s, lambda, /*rows=*/true, /*cols=*/false);

    AttentionGradients g;
    g.loss = sg.loss;
    g.d_log_lambda = sg.d_log_tau;
    g.d_w_q.assign(d, Vec(dp, 0.0));
    g.d_w_k.assign(d, Vec(dp, 0.0));
    g.d_w_v.assign(d, Vec(dp, 0.0));

    const double scale = 1.0 / std::sqrt(static_cast<double>(dp));
    for (std::size_t pb = 0; pb < b; ++pb) {
        const Mat& frames = batch.frames[pb];
        const Vec& text = batch.texts[pb];
        const auto& fwd = f.per_pair[pb];
        const std::size_t n = frames.size();

        Vec d_fused(dp, 0.0);
        for (std::size_t j = 0; j < b; ++j) {
            if (sg.d_s[pb][j] == 0.0) continue;
            const Vec dc = cosine_grad_u(fwd.fused, batch.texts[j]);
            for (std::size_t t = 0; t < dp; ++t) d_fused[t] += sg.d_s[pb][j] * dc[t];
        }

        // values route: fused = sum_i alpha_i V_i, V = F W_v
        const Mat values = model.project(frames, model.w_v);
        const Mat keys = model.project(frames, model.w_k);
        const Vec q = model.project_text(text);

        Vec d_alpha(n);
        for (std::size_t i = 0; i < n; ++i) {
            d_alpha[i] = dot(d_fused, values[i]);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t t = 0; t < dp; ++t)
                    g.d_w_v[a][t] += frames[i][a] * fwd.weights[i] * d_fused[t];
        }

        // softmax jacobian back to the attention logits
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += fwd.weights[i] * d_alpha[i];
        Vec d_logit(n);
        for (std::size_t i = 0; i < n; ++i) d_logit[i] = fwd.weights[i] * (d_alpha[i] - mean);

        // logits z_i = q . k_i * scale
        Vec d_q(dp, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < dp; ++t) {
                d_q[t] += d_logit[i] * keys[i][t] * scale;
                // d k_i = d_logit_i * q * scale, routed into W_k
                const double dk = d_logit[i] * q[t] * scale;
                for (std::size_t a = 0; a < d; ++a) g.d_w_k[a][t] += frames[i][a] * dk;
            }
        }
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t t = 0; t < dp; ++t) g.d_w_q[a][t] += text[a] * d_q[t];
    }
    return g;
}

// --- finite differences -------------------------------------------------------

double finite_diff_check(const ScorerNet& model, double log_tau, const PairBatch& batch,
                         double eps) {
    if (!(eps > 0.0)) throw DomainError("finite_diff_check: eps must be positive");
    const ScorerGradients analytic = scorer_gradients(model, log_tau, batch);

    double max_err = 0.0;
    const auto consider = [&](double a, double n) {
        const double err = std::abs(a - n) / std::max(std::abs(n), 1e-8);
        max_err = std::max(max_err, err);
    };

    for (std::size_t j = 0; j <= model.dim(); ++j) {
        ScorerNet plus = model;
        ScorerNet minus = model;
        if (j < model.dim()) {
            plus.weight[j] += eps;
            minus.weight[j] -= eps;
        } else {
            plus.bias += eps;
            minus.bias -= eps;
        }
        const double numeric =
            (scorer_objective(plus, log_tau, batch) - scorer_objective(minus, log_tau, batch)) /
            (2.0 * eps);
        consider(j < model.dim() ? analytic.d_weight[j] : analytic.d_bias, numeric);
    }
    const double numeric_tau = (scorer_objective(model, log_tau + eps, batch) -
                                scorer_objective(model, log_tau - eps, batch)) /
                               (2.0 * eps);
    consider(analytic.d_log_tau, numeric_tau);
    return max_err;
}

double finite_diff_check(const AttentionSelector& model, const PairBatch& batch, double eps) {
    if (!(eps > 0.0)) throw DomainError("finite_diff_check: eps must be positive");
    const AttentionGradients analytic = attention_gradients(model, batch);

    double max_err = 0.0;
    const auto consider = [&](double a, double n) {
        const double err = std::abs(a - n) / std::max(std::abs(n), 1e-8);
        max_err = std::max(max_err, err);
    };

    const auto check_matrix = [&](Mat AttentionSelector::* member, const Mat& grad) {
        for (std::size_t a = 0; a < model.dim(); ++a)
            for (std::size_t t = 0; t < model.proj_dim(); ++t) {
                AttentionSelector plus = model;
                AttentionSelector minus = model;
                (plus.*member)[a][t] += eps;
                (minus.*member)[a][t] -= eps;
                const double numeric =
                    (attention_objective(plus, batch) - attention_objective(minus, batch)) /
                    (2.0 * eps);
                consider(grad[a][t], numeric);
            }
    };
    check_matrix(&AttentionSelector::w_q, analytic.d_w_q);
    check_matrix(&AttentionSelector::w_k, analytic.d_w_k);
    check_matrix(&AttentionSelector::w_v, analytic.d_w_v);

    AttentionSelector plus = model;
    AttentionSelector minus = model;
    plus.log_temperature += eps;
    minus.log_temperature -= eps;
    const double numeric =
        (attention_objective(plus, batch) - attention_objective(minus, batch)) / (2.0 * eps);
    consider(analytic.d_log_lambda, numeric);
    return max_err;
}

// --- training loops -----------------------------------------------------------

namespace {

struct PairIndex {
    const Mat* frames;
    const Vec* text;
};

std::vector<PairIndex> paired_data(const Corpus& corpus, const char* who) {
    std::vector<PairIndex> pairs;
    pairs.reserve(corpus.queries.size());
    for (const auto& q : corpus.queries) {
        const VideoRecord* video = corpus.find_video(q.paired_video_id);
        if (!video) throw DomainError(std::string(who) + ": query pairs a missing video");
        pairs.push_back({&video->frames, &q.embedding});
    }
    return pairs;
}

PairBatch make_batch(const std::vector<PairIndex>& pairs, const std::vector<std::size_t>& order,
                     std::size_t begin, std::size_t count) {
    PairBatch batch;
    batch.frames.reserve(count);
    batch.texts.reserve(count);
    for (std::size_t i = begin; i < begin + count; ++i) {
        batch.frames.push_back(*pairs[order[i]].frames);
        batch.texts.push_back(*pairs[order[i]].text);
    }
    return batch;
}

void check_train_config(const Corpus& corpus, const TrainConfig& config, const char* who) {
    if (config.batch_size < 2) throw DomainError(std::string(who) + ": batch_size must be >= 2");
    if (config.epochs < 0) throw DomainError(std::string(who) + ": epochs must be >= 0");
    if (config.learning_rate < 0.0)
        throw DomainError(std::string(who) + ": learning_rate must be >= 0");
    if (!(config.initial_temperature > 0.0))
        throw DomainError(std::string(who) + ": initial_temperature must be positive");
    if (corpus.queries.size() < static_cast<std::size_t>(config.batch_size))
        throw DomainError(std::string(who) + ": corpus has fewer queries than one batch");
}

// mean loss over the dataset in canonical (unshuffled) batch order
template <typename Objective>
double canonical_loss(const std::vector<PairIndex>& pairs, int batch_size, Objective&& objective) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t bs = static_cast<std::size_t>(batch_size);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin + bs <= pairs.size(); begin += bs) {
        total += objective(make_batch(pairs, order, begin, bs));
        ++batches;
    }
    return total / static_cast<double>(batches);
}

}  // namespace

ScorerTrainResult train_scorer(const Corpus& corpus, const TrainConfig& config) {
    check_train_config(corpus, config, "train_scorer");
    const auto pairs = paired_data(corpus, "train_scorer");
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);

    ScorerTrainResult result;
    const Mat w0 = init_params(static_cast<int>(corpus.dim), 1, mix_seed(config.seed, kScorerInitStream));
    result.model.weight.resize(corpus.dim);
    for (std::size_t j = 0; j < corpus.dim; ++j) result.model.weight[j] = w0[j][0];
    result.model.bias = 0.0;
    result.log_vtc_temperature = std::log(config.initial_temperature);

    const auto objective = [&](const PairBatch& batch) {
        return scorer_objective(result.model, result.log_vtc_temperature, batch);
    };
    result.loss_trace.push_back(canonical_loss(pairs, config.batch_size, objective));

    Rng rng(mix_seed(config.seed, kShuffleStream));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin + bs <= pairs.size(); begin += bs) {
            const PairBatch batch = make_batch(pairs, order, begin, bs);
            const ScorerGradients g =
                scorer_gradients(result.model, result.log_vtc_temperature, batch);
            for (std::size_t j = 0; j < corpus.dim; ++j)
                result.model.weight[j] -= config.learning_rate * g.d_weight[j];
            result.model.bias -= config.learning_rate * g.d_bias;
            result.log_vtc_temperature -= config.learning_rate * g.d_log_tau;
        }
        result.loss_trace.push_back(canonical_loss(pairs, config.batch_size, objective));
    }
    return result;
}

AttentionTrainResult train_attention_selector(const Corpus& corpus, const TrainConfig& config) {
    if (!config.use_cl)
        throw DomainError("train_attention_selector: config.use_cl must be true");
    check_train_config(corpus, config, "train_attention_selector");
    const auto pairs = paired_data(corpus, "train_attention_selector");
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    const int d = static_cast<int>(corpus.dim);

    AttentionTrainResult result;
    result.model.w_q = init_params(d, d, mix_seed(config.seed, kAttnQStream));
    result.model.w_k = init_params(d, d, mix_seed(config.seed, kAttnKStream));
    result.model.w_v = init_params(d, d, mix_seed(config.seed, kAttnVStream));
    result.model.log_temperature = std::log(config.initial_temperature);

    const auto objective = [&](const PairBatch& batch) {
        return attention_objective(result.model, batch);
    };
    result.loss_trace.push_back(canonical_loss(pairs, config.batch_size, objective));

    Rng rng(mix_seed(config.seed, kShuffleStream));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin + bs <= pairs.size(); begin += bs) {
            const PairBatch batch = make_batch(pairs, order, begin, bs);
            const AttentionGradients g = attention_gradients(result.model, batch);
            for (int a = 0; a < d; ++a)
                for (int t = 0; t < d; ++t) {
                    result.model.w_q[a][t] -= config.learning_rate * g.d_w_q[a][t];
                    result.model.w_k[a][t] -= config.learning_rate * g.d_w_k[a][t];
                    result.model.w_v[a][t] -= config.learning_rate * g.d_w_v[a][t];
                }
            result.model.log_temperature -= config.learning_rate * g.d_log_lambda;
        }
        result.loss_trace.push_back(canonical_loss(pairs, config.batch_size, objective));
    }
    return result;
}

}  // namespace fsel
