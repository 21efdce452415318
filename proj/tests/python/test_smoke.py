"""Smoke tests for the python bindings: each major operation is exercised once
with values whose answers are known from the C++ suite."""

import math

import pytest

import framesel as fs


def make_corpus(videos=20, frames=8, clusters=4, noise=0, dim=32, seed=9, query_noise=0.1):
    spec = fs.SynthSpec(
        videos=videos,
        frames=frames,
        clusters=clusters,
        noise_frames=noise,
        dim=dim,
        separation=6.0,
        query_noise=query_noise,
        seed=seed,
    )
    return fs.generate_synthetic(spec)


def test_core_kernels():
    assert fs.cosine_similarity([1.0, 2.0], [2.0, 1.0]) == pytest.approx(0.8)
    weights = fs.softmax([math.log(2.0), 0.0])
    assert weights == pytest.approx([2.0 / 3.0, 1.0 / 3.0])
    assert fs.mean_pool([[0.0, 2.0], [2.0, 0.0]]) == pytest.approx([1.0, 1.0])
    attn_weights, fused = fs.scaled_dot_attention([2.0], [[1.0], [0.0]], [[1.0], [0.0]])
    assert sum(attn_weights) == pytest.approx(1.0)
    assert fused[0] == pytest.approx(attn_weights[0])

    with pytest.raises(ValueError):
        fs.cosine_similarity([0.0, 0.0], [1.0, 0.0])


def test_corpus_round_trip(tmp_path):
    corpus = make_corpus()
    assert fs.validate_corpus(corpus) == []

    path = tmp_path / "c.fsc"
    fs.save_corpus(corpus, path)
    loaded = fs.load_corpus(path)
    assert loaded.dim == corpus.dim
    assert len(loaded.videos) == len(corpus.videos)
    assert loaded.videos[0].frames == corpus.videos[0].frames

    with pytest.raises(IOError):
        fs.load_corpus(tmp_path / "missing.fsc")


def test_clustering_against_brute_force():
    corpus = make_corpus(videos=1, frames=9, clusters=3, dim=2, seed=4)
    points = corpus.videos[0].frames
    medoids, cost = fs.brute_force_medoids(points, 3)
    outcome = fs.kmedoids(points, 3, seed=1)
    assert outcome.cost == pytest.approx(cost, abs=1e-9)
    assert outcome.medoid_indices == medoids


def test_selectors_and_combination():
    corpus = make_corpus()
    video = corpus.videos[0]
    query = corpus.queries[0].embedding

    uniform = fs.select_uniform(video.frames, 4)
    assert uniform.indices == [0, 2, 4, 6]

    redun = fs.select_redundancy_aware(video.frames, 4, seed=0)
    labels = {video.truth[i].cluster_label for i in redun.indices}
    assert len(labels) == 4

    nint = fs.select_non_interactive(video.frames, query, 1)
    assert video.truth[nint.indices[0]].is_query_target

    v = fs.policy_scores(video.frames, query, fs.Policy.NON_INTERACTIVE, k=4)
    combined = fs.combine_select([v, v], 4, video.frames)
    single = fs.select_non_interactive(video.frames, query, 4)
    assert combined.indices == single.indices


def test_losses_and_gradients():
    rows2 = [[0.6, 0.8]] * 2
    assert fs.vtc_loss(rows2, rows2, 0.07) == pytest.approx(math.log(2.0), abs=1e-9)
    rows4 = [[0.6, 0.8]] * 4
    assert fs.cl_loss(rows4, rows4, 0.07) == pytest.approx(math.log(4.0), abs=1e-9)

    batch = fs.PairBatch(
        frames=[[[1.0, 0.2], [0.1, 0.9]], [[0.4, 0.4], [0.9, 0.1]]],
        texts=[[0.6, 0.8], [0.8, 0.6]],
    )
    scorer = fs.ScorerNet(weight=[0.3, -0.2], bias=0.1)
    err = fs.finite_diff_check_scorer(scorer, math.log(0.07), batch, eps=1e-3)
    assert err <= 1e-4


def test_training_and_evaluation():
    corpus = make_corpus(videos=16, seed=3)
    config = fs.TrainConfig(epochs=3, batch_size=4, learning_rate=5e-4, seed=1)
    model, log_tau, trace = fs.train_scorer(corpus, config)
    assert len(trace) == 4
    assert len(model.weight) == corpus.dim

    report = fs.evaluate_policy(corpus, fs.Policy.UNIFORM, k=8)
    assert report.r_at_1 <= report.r_at_5 <= report.r_at_10 <= 100.0
    assert report.r_sum == pytest.approx(report.r_at_1 + report.r_at_5 + report.r_at_10)

    again = fs.evaluate_policy(corpus, fs.Policy.UNIFORM, k=8)
    assert report.ranks == again.ranks


def test_bench_counts():
    base = fs.count_interaction_ops(fs.Policy.UNIFORM, 16, 16, 64, 100)
    k12 = fs.count_interaction_ops(fs.Policy.UNIFORM, 16, 12, 64, 100)
    assert k12.interaction_ops / base.interaction_ops == 0.75
