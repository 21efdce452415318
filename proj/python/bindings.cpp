#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fsel/bench.hpp"
#include "fsel/clustering.hpp"
#include "fsel/corpus.hpp"
#include "fsel/core.hpp"
#include "fsel/learn.hpp"
#include "fsel/retrieval.hpp"
#include "fsel/selectors.hpp"

namespace py = pybind11;
using namespace fsel;

namespace {

SelectorConfig make_config(Policy policy, int k, int z, std::uint64_t seed,
                           const ScorerNet* scorer, const AttentionSelector* attention) {
    SelectorConfig config;
    config.policy = policy;
    config.k = k;
    config.z = z;
    config.seed = seed;
    config.scorer = scorer;
    config.attention = attention;
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "frame-selection and retrieval-evaluation toolkit (C++ core)";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

    // core kernels
    m.def("cosine_similarity", &cosine_similarity, py::arg("a"), py::arg("b"));
    m.def("softmax", &softmax, py::arg("logits"), py::arg("temperature") = 1.0);
    m.def("mean_pool", &mean_pool, py::arg("selected"));
    m.def("weighted_pool", &weighted_pool, py::arg("selected"), py::arg("raw_scores"));
    m.def(
        "scaled_dot_attention",
        [](const Vec& q, const Mat& k, const Mat& v) {
            const auto r = scaled_dot_attention(q, k, v);
            return py::make_tuple(r.weights, r.fused);
        },
        py::arg("query"), py::arg("keys"), py::arg("values"),
        "Returns (weights, fused).");

    // corpus
    py::class_<FrameTruth>(m, "FrameTruth")
        .def_readonly("cluster_label", &FrameTruth::cluster_label)
        .def_readonly("is_noise", &FrameTruth::is_noise)
        .def_readonly("is_query_target", &FrameTruth::is_query_target);

    py::class_<VideoRecord>(m, "VideoRecord")
        .def_readonly("video_id", &VideoRecord::video_id)
        .def_readonly("frames", &VideoRecord::frames)
        .def_readonly("truth", &VideoRecord::truth);

    py::class_<QueryRecord>(m, "QueryRecord")
        .def_readonly("query_id", &QueryRecord::query_id)
        .def_readonly("embedding", &QueryRecord::embedding)
        .def_readonly("paired_video_id", &QueryRecord::paired_video_id);

    py::class_<Corpus>(m, "Corpus")
        .def_readonly("dim", &Corpus::dim)
        .def_readonly("videos", &Corpus::videos)
        .def_readonly("queries", &Corpus::queries)
        .def_readonly("provenance", &Corpus::provenance);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init([](std::uint32_t videos, std::uint32_t frames, std::uint32_t clusters,
                         std::uint32_t noise_frames, std::uint32_t dim, double separation,
                         double query_noise, std::uint64_t seed) {
                 SynthSpec spec;
                 spec.video_count = videos;
                 spec.frames_per_video = frames;
                 spec.planted_clusters = clusters;
                 spec.noise_frames_per_video = noise_frames;
                 spec.dim = dim;
                 spec.cluster_separation = separation;
                 spec.query_noise_scale = query_noise;
                 spec.seed = seed;
                 return spec;
             }),
             py::arg("videos") = 1, py::arg("frames") = 16, py::arg("clusters") = 4,
             py::arg("noise_frames") = 0, py::arg("dim") = 64, py::arg("separation") = 6.0,
             py::arg("query_noise") = 0.1, py::arg("seed") = 0);

    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));
    m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));
    m.def("load_corpus", &load_corpus, py::arg("path"));
    m.def(
        "validate_corpus",
        [](const Corpus& corpus) {
            py::list out;
            for (const auto& issue : validate_corpus(corpus))
                out.append(py::make_tuple(issue.kind, issue.detail));
            return out;
        },
        py::arg("corpus"), "Returns a list of (kind, detail) findings; empty when valid.");

    // clustering
    py::class_<ClusterOutcome>(m, "ClusterOutcome")
        .def_readonly("medoid_indices", &ClusterOutcome::medoid_indices)
        .def_readonly("assignment", &ClusterOutcome::assignment)
        .def_readonly("cost", &ClusterOutcome::cost)
        .def_readonly("iterations", &ClusterOutcome::iterations)
        .def_readonly("cost_trace", &ClusterOutcome::cost_trace);

    m.def("kmedoids", &kmedoids, py::arg("points"), py::arg("k"), py::arg("seed"),
          py::arg("max_iter") = 100);
    m.def("clustering_cost", &clustering_cost, py::arg("points"), py::arg("medoid_indices"),
          py::arg("assignment"));
    m.def(
        "brute_force_medoids",
        [](const Mat& points, int k) {
            const auto r = brute_force_medoids(points, k);
            return py::make_tuple(r.medoid_indices, r.cost);
        },
        py::arg("points"), py::arg("k"), "Returns (medoid_indices, cost).");

    // models
    py::class_<ScorerNet>(m, "ScorerNet")
        .def(py::init([](Vec weight, double bias) {
                 ScorerNet s;
                 s.weight = std::move(weight);
                 s.bias = bias;
                 return s;
             }),
             py::arg("weight"), py::arg("bias") = 0.0)
        .def_readwrite("weight", &ScorerNet::weight)
        .def_readwrite("bias", &ScorerNet::bias)
        .def("score", &ScorerNet::score)
        .def("scores", &ScorerNet::scores);

    py::class_<AttentionSelector>(m, "AttentionSelector")
        .def(py::init([](Mat w_q, Mat w_k, Mat w_v, double log_temperature) {
                 AttentionSelector a;
                 a.w_q = std::move(w_q);
                 a.w_k = std::move(w_k);
                 a.w_v = std::move(w_v);
                 a.log_temperature = log_temperature;
                 return a;
             }),
             py::arg("w_q"), py::arg("w_k"), py::arg("w_v"), py::arg("log_temperature"))
        .def_readwrite("w_q", &AttentionSelector::w_q)
        .def_readwrite("w_k", &AttentionSelector::w_k)
        .def_readwrite("w_v", &AttentionSelector::w_v)
        .def_readwrite("log_temperature", &AttentionSelector::log_temperature);

    m.def("save_scorer", &save_scorer, py::arg("model"), py::arg("log_vtc_temperature"),
          py::arg("path"), py::arg("config_echo") = "",
          py::arg("loss_trace") = std::vector<double>{});
    m.def("save_attention", &save_attention, py::arg("model"), py::arg("path"),
          py::arg("config_echo") = "", py::arg("loss_trace") = std::vector<double>{});
    m.def("load_scorer", &load_scorer, py::arg("path"));
    m.def("load_attention", &load_attention, py::arg("path"));

    // selectors
    py::enum_<Policy>(m, "Policy")
        .value("UNIFORM", Policy::Uniform)
        .value("RANDOM", Policy::Random)
        .value("REDUNDANCY_AWARE", Policy::RedundancyAware)
        .value("LOW_QUALITY_AWARE", Policy::LowQualityAware)
        .value("NON_INTERACTIVE", Policy::NonInteractive)
        .value("INTERACTIVE", Policy::Interactive);

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("indices", &SelectionResult::indices)
        .def_readonly("scores", &SelectionResult::scores)
        .def_readonly("pooled", &SelectionResult::pooled)
        .def_readonly("fused", &SelectionResult::fused);

    m.def("select_uniform", &select_uniform, py::arg("frames"), py::arg("k"));
    m.def("select_random", &select_random, py::arg("frames"), py::arg("k"), py::arg("seed"));
    m.def("select_redundancy_aware", &select_redundancy_aware, py::arg("frames"), py::arg("k"),
          py::arg("seed"));
    m.def("select_low_quality_aware", &select_low_quality_aware, py::arg("frames"),
          py::arg("scorer"), py::arg("k"));
    m.def("select_non_interactive", &select_non_interactive, py::arg("frames"), py::arg("query"),
          py::arg("k"));
    m.def("select_interactive", &select_interactive, py::arg("frames"), py::arg("query"),
          py::arg("attention"), py::arg("k"));
    m.def(
        "policy_scores",
        [](const Mat& frames, const std::optional<Vec>& query, Policy policy, int k, int z,
           std::uint64_t seed, const ScorerNet* scorer, const AttentionSelector* attention,
           std::uint64_t video_stream) {
            const SelectorConfig config = make_config(policy, k, z, seed, scorer, attention);
            return policy_scores(frames, query ? &*query : nullptr, config, video_stream);
        },
        py::arg("frames"), py::arg("query"), py::arg("policy"), py::arg("k"), py::arg("z") = 0,
        py::arg("seed") = 0, py::arg("scorer") = nullptr, py::arg("attention") = nullptr,
        py::arg("video_stream") = 0);
    m.def("combine_select", &combine_select, py::arg("score_vectors"), py::arg("k"),
          py::arg("frames"));

    // learning
    py::class_<PairBatch>(m, "PairBatch")
        .def(py::init([](std::vector<Mat> frames, Mat texts) {
                 PairBatch b;
                 b.frames = std::move(frames);
                 b.texts = std::move(texts);
                 return b;
             }),
             py::arg("frames"), py::arg("texts"))
        .def_readwrite("frames", &PairBatch::frames)
        .def_readwrite("texts", &PairBatch::texts);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](int epochs, int batch_size, double learning_rate, std::uint64_t seed,
                         double initial_temperature, bool use_cl) {
                 TrainConfig c;
                 c.epochs = epochs;
                 c.batch_size = batch_size;
                 c.learning_rate = learning_rate;
                 c.seed = seed;
                 c.initial_temperature = initial_temperature;
                 c.use_cl = use_cl;
                 return c;
             }),
             py::arg("epochs") = 200, py::arg("batch_size") = 4,
             py::arg("learning_rate") = 5e-4, py::arg("seed") = 0,
             py::arg("initial_temperature") = 0.07, py::arg("use_cl") = false);

    m.def("vtc_loss", &vtc_loss, py::arg("video_embeds"), py::arg("text_embeds"), py::arg("tau"));
    m.def("cl_loss", &cl_loss, py::arg("fused"), py::arg("text_embeds"), py::arg("lambda_"));
    m.def("init_params", &init_params, py::arg("fan_in"), py::arg("fan_out"), py::arg("seed"));
    m.def(
        "train_scorer",
        [](const Corpus& corpus, const TrainConfig& config) {
            const auto r = train_scorer(corpus, config);
            return py::make_tuple(r.model, r.log_vtc_temperature, r.loss_trace);
        },
        py::arg("corpus"), py::arg("config"),
        "Returns (model, log_vtc_temperature, loss_trace).");
    m.def(
        "train_attention_selector",
        [](const Corpus& corpus, const TrainConfig& config) {
            const auto r = train_attention_selector(corpus, config);
            return py::make_tuple(r.model, r.loss_trace);
        },
        py::arg("corpus"), py::arg("config"), "Returns (model, loss_trace).");
    m.def(
        "finite_diff_check_scorer",
        [](const ScorerNet& model, double log_tau, const PairBatch& batch, double eps) {
            return finite_diff_check(model, log_tau, batch, eps);
        },
        py::arg("model"), py::arg("log_tau"), py::arg("batch"), py::arg("eps") = 1e-3);
    m.def(
        "finite_diff_check_attention",
        [](const AttentionSelector& model, const PairBatch& batch, double eps) {
            return finite_diff_check(model, batch, eps);
        },
        py::arg("model"), py::arg("batch"), py::arg("eps") = 1e-3);

    // retrieval
    py::class_<RankingReport>(m, "RankingReport")
        .def_readonly("r_at_1", &RankingReport::r_at_1)
        .def_readonly("r_at_5", &RankingReport::r_at_5)
        .def_readonly("r_at_10", &RankingReport::r_at_10)
        .def_readonly("mdr", &RankingReport::mdr)
        .def_readonly("r_sum", &RankingReport::r_sum)
        .def_readonly("query_count", &RankingReport::query_count)
        .def_readonly("policy", &RankingReport::policy)
        .def_readonly("k", &RankingReport::k)
        .def_readonly("ranks", &RankingReport::ranks);

    m.def("similarity_matrix", &similarity_matrix, py::arg("pooled_videos"), py::arg("queries"));
    m.def("shortlist", &shortlist, py::arg("similarity_row"), py::arg("c"));
    m.def(
        "rank_metrics",
        [](const Mat& similarity, const std::vector<int>& ground_truth) {
            return rank_metrics(similarity, ground_truth);
        },
        py::arg("similarity"), py::arg("ground_truth_cols"));
    m.def(
        "evaluate_policy",
        [](const Corpus& corpus, Policy policy, int k, int z, std::uint64_t seed,
           const ScorerNet* scorer, const AttentionSelector* attention) {
            return evaluate_policy(corpus, make_config(policy, k, z, seed, scorer, attention));
        },
        py::arg("corpus"), py::arg("policy"), py::arg("k"), py::arg("z") = 0,
        py::arg("seed") = 0, py::arg("scorer") = nullptr, py::arg("attention") = nullptr);

    // bench
    py::class_<OpCounts>(m, "OpCounts")
        .def_readonly("interaction_ops", &OpCounts::interaction_ops)
        .def_readonly("pooled_similarity_ops", &OpCounts::pooled_similarity_ops)
        .def_readonly("selection_ops", &OpCounts::selection_ops)
        .def_readonly("selection_cached", &OpCounts::selection_cached);

    m.def(
        "count_interaction_ops",
        [](Policy policy, int n, int k, int d, int video_count,
           std::uint64_t kmedoids_iterations, int proj_dim) {
            OpCountOptions opts;
            opts.kmedoids_iterations = kmedoids_iterations;
            opts.proj_dim = proj_dim;
            return count_interaction_ops(policy, n, k, d, video_count, opts);
        },
        py::arg("policy"), py::arg("n"), py::arg("k"), py::arg("d"), py::arg("video_count"),
        py::arg("kmedoids_iterations") = 1, py::arg("proj_dim") = 0);

    py::class_<EfficiencyReport>(m, "EfficiencyReport")
        .def_readonly("policy", &EfficiencyReport::policy)
        .def_readonly("k", &EfficiencyReport::k)
        .def_readonly("n", &EfficiencyReport::n)
        .def_readonly("ops", &EfficiencyReport::ops)
        .def_readonly("median_ms_per_query", &EfficiencyReport::median_ms_per_query)
        .def_readonly("mean_ms_per_query", &EfficiencyReport::mean_ms_per_query)
        .def_readonly("per_rep_ms_per_query", &EfficiencyReport::per_rep_ms_per_query)
        .def_readonly("note", &EfficiencyReport::note);

    m.def(
        "time_policy",
        [](const Corpus& corpus, Policy policy, int k, int z, std::uint64_t seed,
           int repetitions, const ScorerNet* scorer, const AttentionSelector* attention) {
            return time_policy(corpus, make_config(policy, k, z, seed, scorer, attention),
                               repetitions);
        },
        py::arg("corpus"), py::arg("policy"), py::arg("k"), py::arg("z") = 0,
        py::arg("seed") = 0, py::arg("repetitions") = 5, py::arg("scorer") = nullptr,
        py::arg("attention") = nullptr);
}
