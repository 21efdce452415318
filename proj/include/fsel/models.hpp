#ifndef FSEL_MODELS_HPP
#define FSEL_MODELS_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "fsel/common.hpp"
#include "fsel/core.hpp"

namespace fsel {

/// Per-frame quality scorer: a single fully connected layer mapping a frame
/// embedding to one scalar logit.
struct ScorerNet {
    Vec weight;        // length d
    double bias = 0.0;

    std::size_t dim() const { return weight.size(); }

    double score(const Vec& frame) const;
    Vec scores(const Mat& frames) const;  // one logit per frame
};

/// Cross-attention frame selector: the text embedding projects to a query,
/// frame embeddings project to keys and values, relevancy is the attention
/// row. The contrastive temperature is learned in log space.
struct AttentionSelector {
    Mat w_q;  // d x d'
    Mat w_k;  // d x d'
    Mat w_v;  // d x d'
    double log_temperature = 0.0;

    std::size_t dim() const { return w_q.size(); }
    std::size_t proj_dim() const { return w_q.empty() ? 0 : w_q.front().size(); }
    double temperature() const;

    Vec project_text(const Vec& text) const;           // 1 x d'
    Mat project(const Mat& frames, const Mat& w) const;  // N x d'

    struct Forward {
        Vec logits;   // q . k_i / sqrt(d'), per frame
        Vec weights;  // softmax of logits
        Vec fused;    // weights . values, dimension d'
    };
    Forward forward(const Mat& frames, const Vec& text) const;
};

// Model files are JSON: kind, dimensions, full-precision parameter arrays,
// log-temperatures, and an echo of the training seed/config when trained.
void save_scorer(const ScorerNet& model, double log_vtc_temperature,
                 const std::filesystem::path& path, const std::string& config_echo = "",
                 const std::vector<double>& loss_trace = {});
void save_attention(const AttentionSelector& model, const std::filesystem::path& path,
                    const std::string& config_echo = "",
                    const std::vector<double>& loss_trace = {});

std::string peek_model_kind(const std::filesystem::path& path);  // "scorer" or "attention"
ScorerNet load_scorer(const std::filesystem::path& path);
AttentionSelector load_attention(const std::filesystem::path& path);

}  // namespace fsel

#endif
