"""Brute-force reference values for the closed-form moment engine.

Everything here is deliberately slow and independent: pattern probabilities
come from enumerating all category tuples with plain Python arithmetic, and
expectations multiply them by explicitly counted placements.  The Monte
Carlo helper estimates the same quantities by sampling.  None of it reuses
the factorized formulas it exists to check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GraphTooLargeError, PatternTooLargeError
from .features import feature_vector
from .measure import DEFAULT_FEATURES, FeatureVector, GeneratingMeasure, parse_feature
from .sampler import naive_sample

# Pattern probabilities enumerate m**t tuples; five labelled nodes is plenty
# for edges, wedges, stars up to S4, and cliques up to C4.
MAX_PATTERN_NODES = 5

# Exhaustive expectations multiply pattern probabilities by placement
# counts; the point is tiny cross-checks, so keep n small.
MAX_EXACT_NODES = 12

MIN_MC_SAMPLES = 100


def exact_subgraph_probability(
    measure: GeneratingMeasure,
    pattern: Iterable[tuple[int, int]],
    num_nodes: int | None = None,
) -> float:
    """Probability that every pair in the pattern is simultaneously present.

    The pattern is a set of pairs over labelled nodes 0..t-1; t is inferred
    from the largest label unless given.  Enumerates every category tuple at
    one level and raises the mass-weighted pattern probability to the k-th
    power.
    """
    pairs = []
    max_label = -1
    for a, b in pattern:
        a, b = int(a), int(b)
        if a == b or a < 0 or b < 0:
            raise DomainError(f"pattern pair ({a}, {b}) is not a valid node pair")
        pairs.append((a, b) if a < b else (b, a))
        max_label = max(max_label, a, b)
    pairs = sorted(set(pairs))
    t = (max_label + 1) if num_nodes is None else int(num_nodes)
    if t <= max_label:
        raise DomainError(f"num_nodes={t} does not cover pattern label {max_label}")
    if t > MAX_PATTERN_NODES:
        raise PatternTooLargeError(
            f"pattern spans {t} nodes; enumeration is capped at {MAX_PATTERN_NODES}")
    if t == 0:
        return 1.0
    lengths = measure.lengths.tolist()
    probs = measure.probs.tolist()
    per_level = 0.0
    for combo in itertools.product(range(measure.m), repeat=t):
        w = 1.0
        for c in combo:
            w *= lengths[c]
        for a, b in pairs:
            w *= probs[combo[a]][combo[b]]
        per_level += w
    return per_level ** measure.k


def _star_pattern(d: int) -> list[tuple[int, int]]:
    return [(0, leaf) for leaf in range(1, d + 1)]


def _clique_pattern(t: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(t), 2))


def exact_expected_features(
    measure: GeneratingMeasure, n: int, features: Sequence[str] = DEFAULT_FEATURES
) -> FeatureVector:
    """Expectations as placement counts times brute-force pattern probabilities."""
    if n > MAX_EXACT_NODES:
        raise GraphTooLargeError(
            f"exhaustive expectations are capped at n = {MAX_EXACT_NODES}, got {n}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    edges = None
    stars: dict[int, float] = {}
    cliques: dict[int, float] = {}
    for key in features:
        kind, order = parse_feature(key)
        if kind == "edges":
            if n < 2:
                raise DomainError("edge expectation needs n >= 2")
            prob = exact_subgraph_probability(measure, [(0, 1)], num_nodes=2)
            edges = math.comb(n, 2) * prob
        elif kind == "star":
            if not 1 <= order <= n - 1:
                raise DomainError(f"star order {order} infeasible on {n} nodes")
            prob = exact_subgraph_probability(
                measure, _star_pattern(order), num_nodes=order + 1)
            stars[order] = n * math.comb(n - 1, order) * prob
        else:
            if not 2 <= order <= n:
                raise DomainError(f"clique order {order} infeasible on {n} nodes")
            prob = exact_subgraph_probability(
                measure, _clique_pattern(order), num_nodes=order)
            cliques[order] = math.comb(n, order) * prob
    return FeatureVector(edges=edges, stars=stars, cliques=cliques)


@dataclass(frozen=True)
class McStats:
    """Per-feature sample statistics over repeated naive draws."""

    samples: int
    means: dict[str, float]
    variances: dict[str, float]
    std_errors: dict[str, float]


def mc_feature_stats(
    measure: GeneratingMeasure,
    n: int,
    features: Sequence[str],
    samples: int,
    seed: int = 0,
) -> McStats:
    """Monte Carlo feature statistics from the exact naive sampler.

    Each replicate draws from its own RNG stream keyed by (seed, replicate),
    so the result is independent of evaluation order and reproducible.
    Variances are the unbiased sample variances; standard errors are
    sqrt(variance / samples).
    """
    if samples < MIN_MC_SAMPLES:
        raise DomainError(
            f"need at least {MIN_MC_SAMPLES} samples for stable statistics, got {samples}")
    keys = list(features)
    table = np.empty((samples, len(keys)))
    for i in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        graph = naive_sample(n, measure, rng)
        counts = feature_vector(graph, keys)
        for j, key in enumerate(keys):
            table[i, j] = counts.value(key)
    means = table.mean(axis=0)
    variances = table.var(axis=0, ddof=1)
    ses = np.sqrt(variances / samples)
    return McStats(
        samples=samples,
        means={key: float(means[j]) for j, key in enumerate(keys)},
        variances={key: float(variances[j]) for j, key in enumerate(keys)},
        std_errors={key: float(ses[j]) for j, key in enumerate(keys)},
    )
