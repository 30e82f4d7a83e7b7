"""Category assignment, exact samplers, fast box sampler, noisy variant."""

import math

import numpy as np
import pytest

import mfng
from mfng import (
    AllZeroMeasureError,
    DegenerateDiagonalError,
    DomainError,
    StalledError,
    UnsupportedMError,
)
from mfng.sampler import (
    CategoryIndex,
    FastSamplerConfig,
    _target_edge_moments,
    assign_categories,
    build_q,
    decode_categories,
    encode_categories,
    make_noise_schedule,
)


def spawned(base, *key):
    return np.random.default_rng(np.random.SeedSequence(base, spawn_key=key))


# ---------------------------------------------------------------------------
# categories
# ---------------------------------------------------------------------------

def test_assignment_shapes_and_ranges(block_measure):
    a = assign_categories(100, block_measure, np.random.default_rng(0))
    assert a.levels.shape == (100, 10)
    assert a.levels.min() >= 0 and a.levels.max() < 2
    assert np.all(a.codes < 2**10)
    assert np.all(a.leaf_lengths > 0)


def test_assignment_deterministic(block_measure):
    a = assign_categories(50, block_measure, np.random.default_rng(123))
    b = assign_categories(50, block_measure, np.random.default_rng(123))
    assert np.array_equal(a.levels, b.levels)


def test_encode_decode_round_trip():
    rng = np.random.default_rng(8)
    for m, k in ((2, 5), (3, 4), (5, 7)):
        levels = rng.integers(0, m, size=(40, k))
        codes = encode_categories(levels, m)
        assert np.array_equal(decode_categories(codes, m, k), levels)


def test_leaf_lengths_are_products(three_cat_measure):
    a = assign_categories(30, three_cat_measure, np.random.default_rng(2))
    want = three_cat_measure.lengths[a.levels].prod(axis=1)
    assert np.allclose(a.leaf_lengths, want, rtol=1e-15)


def test_category_frequencies_follow_lengths():
    meas = mfng.make_measure([0.1, 0.9], [[0.5, 0.5], [0.5, 0.5]], k=1)
    a = assign_categories(20000, meas, np.random.default_rng(99))
    frac = float((a.levels[:, 0] == 0).mean())
    assert abs(frac - 0.1) < 0.01  # ~4.7 sigma band


def test_category_index_partitions_nodes(block_measure):
    a = assign_categories(200, block_measure, np.random.default_rng(5))
    index = CategoryIndex.from_assignment(a)
    seen = np.concatenate([index.nodes_at(i) for i in range(index.group_count)])
    assert sorted(seen.tolist()) == list(range(200))
    # lookup finds every real code and rejects a foreign one
    pos = index.lookup(a.codes)
    assert np.all(pos >= 0)
    assert np.all(index.codes[pos] == a.codes)
    missing = index.lookup(np.array([2**40]))
    assert missing[0] == -1


# ---------------------------------------------------------------------------
# exact samplers
# ---------------------------------------------------------------------------

def test_naive_deterministic(block_measure_k4):
    g1 = mfng.naive_sample(60, block_measure_k4, np.random.default_rng(7))
    g2 = mfng.naive_sample(60, block_measure_k4, np.random.default_rng(7))
    assert g1 == g2


def test_naive_complete_and_empty_extremes():
    full = mfng.make_measure([0.5, 0.5], [[1.0, 1.0], [1.0, 1.0]], k=3)
    g = mfng.naive_sample(12, full, np.random.default_rng(0))
    assert g.edge_count == math.comb(12, 2)
    empty = mfng.make_measure([0.5, 0.5], [[0.0, 0.0], [0.0, 0.0]], k=3)
    g = mfng.naive_sample(12, empty, np.random.default_rng(0))
    assert g.edge_count == 0


def test_naive_single_node():
    meas = mfng.make_measure([1.0], [[0.9]], k=1)
    g = mfng.naive_sample(1, meas, np.random.default_rng(0))
    assert g.n == 1 and g.edge_count == 0


def test_naive_edge_rate_matches_closed_form(block_measure_k4):
    n, runs = 80, 300
    total = 0
    for i in range(runs):
        total += mfng.naive_sample(n, block_measure_k4, spawned(1010, i)).edge_count
    mean = total / runs
    em = mfng.edge_moments(block_measure_k4, n)
    se = em.std / math.sqrt(runs)
    assert abs(mean - em.mean) < 4.0 * se


def test_intersection_deterministic(block_measure_k4):
    mats = [block_measure_k4.probs] * 4
    lengths = block_measure_k4.lengths
    g1 = mfng.sample_by_intersection(70, mats, lengths, np.random.default_rng(3))
    g2 = mfng.sample_by_intersection(70, mats, lengths, np.random.default_rng(3))
    assert g1 == g2


def test_intersection_single_level_edge_rate():
    meas = mfng.make_measure([0.3, 0.7], [[0.9, 0.2], [0.2, 0.6]], k=1)
    n, runs = 60, 300
    total = 0
    for i in range(runs):
        g = mfng.sample_by_intersection(
            n, [meas.probs], meas.lengths, spawned(77, i))
        total += g.edge_count
    em = mfng.edge_moments(meas, n)
    se = em.std / math.sqrt(runs)
    assert abs(total / runs - em.mean) < 4.0 * se


def test_intersection_rejects_mismatched_matrices(block_measure_k4):
    with pytest.raises(mfng.MeasureValidationError):
        mfng.sample_by_intersection(
            10, [np.array([[0.5]])], block_measure_k4.lengths, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# edge-mass table
# ---------------------------------------------------------------------------

def test_build_q_values(block_measure_k4):
    table = build_q(block_measure_k4)
    lengths = block_measure_k4.lengths
    want = block_measure_k4.probs * np.outer(lengths, lengths)
    assert np.allclose(table.q, want, rtol=1e-15)
    assert math.isclose(table.total, mfng.edge_survival_factor(block_measure_k4),
                        rel_tol=1e-12)


def test_build_q_rejects_zero_mass():
    meas = mfng.make_measure([0.5, 0.5], [[0.0, 0.0], [0.0, 0.0]], k=1)
    with pytest.raises(AllZeroMeasureError):
        build_q(meas)


def test_q_table_sampling_respects_mass():
    # diagonal mass only: off-diagonal cells must never be drawn
    meas = mfng.make_measure([0.5, 0.5], [[0.4, 0.0], [0.0, 0.4]], k=1)
    table = build_q(meas)
    i, j = table.sample_pairs(np.random.default_rng(4), 4000)
    assert np.all(i == j)
    frac_zero = float((i == 0).mean())
    assert abs(frac_zero - 0.5) < 0.04


# ---------------------------------------------------------------------------
# fast sampler
# ---------------------------------------------------------------------------

def test_fast_deterministic(block_measure):
    g1 = mfng.fast_sample(500, block_measure, rng=np.random.default_rng(11))
    g2 = mfng.fast_sample(500, block_measure, rng=np.random.default_rng(11))
    assert g1 == g2


def test_fast_keeps_isolated_nodes(block_measure):
    g = mfng.fast_sample(3000, block_measure, rng=np.random.default_rng(1))
    assert g.n == 3000
    assert (g.degrees() == 0).any()  # sparse enough that some nodes stay alone


def test_fast_two_nodes_certain_edge():
    meas = mfng.make_measure([1.0], [[1.0]], k=1)
    # the only possible graph has the one edge; the normal target rounds to it
    g = mfng.fast_sample(2, meas, rng=np.random.default_rng(0))
    assert g.edge_count in (0, 1)
    counts = [
        mfng.fast_sample(2, meas, rng=spawned(3, i)).edge_count for i in range(50)
    ]
    assert max(counts) == 1


def test_fast_simple_graph_no_self_loops(block_measure_k4):
    g = mfng.fast_sample(400, block_measure_k4, rng=np.random.default_rng(9))
    edges = g.edge_array()
    assert np.all(edges[:, 0] < edges[:, 1])
    # canonical storage also implies no duplicates
    keys = edges[:, 0] * g.n + edges[:, 1]
    assert np.unique(keys).size == keys.size


def test_fast_edge_count_concentrates(block_measure):
    n = 2000
    want = mfng.expected_edges(block_measure, n)
    counts = [
        mfng.fast_sample(n, block_measure, rng=spawned(21, i)).edge_count
        for i in range(20)
    ]
    assert abs(np.mean(counts) - want) / want < 0.05


def test_fast_respects_accuracy_knob(block_measure):
    cfg = FastSamplerConfig(accuracy=4.0)
    g = mfng.fast_sample(800, block_measure, cfg, np.random.default_rng(2))
    want = mfng.expected_edges(block_measure, 800)
    assert abs(g.edge_count - want) / want < 0.25


def test_fast_stalls_on_unreachable_target():
    # Both nodes of the only populated block are connected after one edge;
    # the drawn target asks for more, so the sampler must give up.
    meas = mfng.make_measure([0.5, 0.5], [[1.0, 0.0], [0.0, 0.0]], k=1)
    cfg = FastSamplerConfig(max_consecutive_rejects=500)
    with pytest.raises(StalledError):
        mfng.fast_sample(6, meas, cfg, np.random.default_rng(13))


def test_fast_config_validation():
    with pytest.raises(DomainError):
        FastSamplerConfig(accuracy=0.0)
    with pytest.raises(DomainError):
        FastSamplerConfig(max_attempts_per_box=0)
    with pytest.raises(DomainError):
        FastSamplerConfig(max_consecutive_rejects=0)


def test_target_moments_match_constant_schedule(block_measure):
    mean, std = _target_edge_moments(
        1500, [block_measure.probs] * block_measure.k, block_measure.lengths)
    em = mfng.edge_moments(block_measure, 1500)
    assert math.isclose(mean, em.mean, rel_tol=1e-12)
    assert math.isclose(std, em.std, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# noise schedule
# ---------------------------------------------------------------------------

def test_zero_noise_schedule_consumes_no_randomness(block_measure):
    rng = np.random.default_rng(42)
    before = rng.bit_generator.state
    sched = make_noise_schedule(block_measure, 0.0, rng)
    assert rng.bit_generator.state == before
    assert len(sched.level_matrices) == block_measure.k
    for mat in sched.level_matrices:
        assert mat is block_measure.probs or np.array_equal(mat, block_measure.probs)
    assert np.all(sched.offsets == 0.0)


def test_noise_schedule_formula(block_measure):
    p = block_measure.probs
    diag = p[0, 0] + p[1, 1]
    sched = make_noise_schedule(block_measure, 0.08, np.random.default_rng(6))
    assert len(sched.level_matrices) == block_measure.k
    for mu, mat in zip(sched.offsets, sched.level_matrices):
        assert abs(mu) <= 0.08
        want = np.array([
            [p[0, 0] - 2 * mu * p[0, 0] / diag, p[0, 1] + mu],
            [p[1, 0] + mu, p[1, 1] - 2 * mu * p[1, 1] / diag],
        ])
        assert np.allclose(mat, np.clip(want, 0.0, 1.0), rtol=0, atol=1e-15)
        assert mat[0, 1] == mat[1, 0]
        assert np.all((mat >= 0.0) & (mat <= 1.0))


def test_noise_schedule_clamps_to_unit_interval():
    meas = mfng.make_measure([0.5, 0.5], [[0.99, 0.98], [0.98, 0.99]], k=6)
    sched = make_noise_schedule(meas, 1.0, np.random.default_rng(0))
    for mat in sched.level_matrices:
        assert np.all((mat >= 0.0) & (mat <= 1.0))


def test_noise_schedule_rejects_bad_inputs(three_cat_measure, block_measure):
    with pytest.raises(UnsupportedMError):
        make_noise_schedule(three_cat_measure, 0.1, np.random.default_rng(0))
    with pytest.raises(DomainError):
        make_noise_schedule(block_measure, 1.5, np.random.default_rng(0))
    degenerate = mfng.make_measure([0.5, 0.5], [[0.0, 0.9], [0.9, 0.0]], k=2)
    with pytest.raises(DegenerateDiagonalError):
        make_noise_schedule(degenerate, 0.1, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# noisy sampler
# ---------------------------------------------------------------------------

def test_noisy_zero_amplitude_reproduces_fast(block_measure):
    n = 1200
    a = mfng.noisy_sample(n, block_measure, 0.0, rng=np.random.default_rng(19))
    b = mfng.fast_sample(n, block_measure, rng=np.random.default_rng(19))
    assert a == b


def test_noisy_zero_amplitude_reproduces_intersection(block_measure_k4):
    n = 100
    a = mfng.noisy_sample(
        n, block_measure_k4, 0.0, rng=np.random.default_rng(19), method="exact")
    b = mfng.sample_by_intersection(
        n, [block_measure_k4.probs] * 4, block_measure_k4.lengths,
        np.random.default_rng(19))
    assert a == b


def test_noisy_deterministic_and_noise_dependent(block_measure):
    n = 800
    a = mfng.noisy_sample(n, block_measure, 0.1, rng=np.random.default_rng(23))
    b = mfng.noisy_sample(n, block_measure, 0.1, rng=np.random.default_rng(23))
    c = mfng.noisy_sample(n, block_measure, 0.05, rng=np.random.default_rng(23))
    assert a == b
    assert a != c


def test_noisy_exact_method_runs(block_measure_k4):
    g = mfng.noisy_sample(
        80, block_measure_k4, 0.1, rng=np.random.default_rng(4), method="exact")
    assert g.n == 80


def test_noisy_rejects_unknown_method(block_measure_k4):
    with pytest.raises(DomainError):
        mfng.noisy_sample(50, block_measure_k4, 0.1,
                          rng=np.random.default_rng(0), method="banana")
