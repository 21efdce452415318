"""Frame-selection and retrieval-evaluation toolkit for embedding-based
text-to-video retrieval.

Thin python surface over the C++ core: synthetic corpus generation, the six
frame-selection policies, contrastive training of the scorer and attention
selectors, ranking metrics, and efficiency instrumentation.
"""

from ._core import (
    AttentionSelector,
    ClusterOutcome,
    Corpus,
    DomainError,
    EfficiencyReport,
    FormatError,
    FrameTruth,
    OpCounts,
    PairBatch,
    Policy,
    QueryRecord,
    RankingReport,
    ScorerNet,
    SelectionResult,
    ShapeError,
    SynthSpec,
    TrainConfig,
    VideoRecord,
    brute_force_medoids,
    cl_loss,
    clustering_cost,
    combine_select,
    cosine_similarity,
    count_interaction_ops,
    evaluate_policy,
    finite_diff_check_attention,
    finite_diff_check_scorer,
    generate_synthetic,
    init_params,
    kmedoids,
    load_attention,
    load_corpus,
    load_scorer,
    mean_pool,
    policy_scores,
    rank_metrics,
    save_attention,
    save_corpus,
    save_scorer,
    scaled_dot_attention,
    select_interactive,
    select_low_quality_aware,
    select_non_interactive,
    select_random,
    select_redundancy_aware,
    select_uniform,
    shortlist,
    similarity_matrix,
    softmax,
    time_policy,
    train_attention_selector,
    train_scorer,
    validate_corpus,
    vtc_loss,
    weighted_pool,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
