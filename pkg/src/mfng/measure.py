"""Generating measures and closed-form expectations of subgraph counts.

A generating measure is the recursive link model: ``m`` categories with
interval lengths ``lengths`` (summing to one), a symmetric link-probability
matrix ``probs``, and a recursion depth ``k``.  Every node independently
receives one category per level, and a pair of nodes is linked with the
product of the per-level probabilities of their category pair.

Because the levels are independent, the probability that any fixed set of
node pairs is fully present equals the depth-1 probability of that pattern
raised to the k-th power.  All expectations below are built from that fact:
a per-level pattern survival factor, taken to the k-th power, times the
number of ways to place the pattern.  Binomial placement counts are kept in
log space so that the astronomically large counts of, say, 4-stars on 10^5
nodes never overflow.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    CliqueSizeError,
    DepthOverflowError,
    DomainError,
    ExactModeTooLargeError,
    LengthVectorError,
    NonSymmetricError,
    ProbabilityRangeError,
)

# Lengths within this of summing to 1 are renormalized; worse is an error.
LENGTH_SUM_TOLERANCE = 1e-9

# Category tuples are packed base-m into one signed 64-bit word, so the
# depth is capped by m**k <= 2**62.
ENCODING_BITS = 62

# Largest clique order for which the m**t survival enumeration is allowed.
MAX_CLIQUE_ORDER = 8

# Exact rational degree counts are capped here; beyond it the binomial
# weights in the recursion exceed what is worth carrying exactly.
EXACT_DEGREE_LIMIT = 64

DEFAULT_FEATURES = ("edges", "S2", "S3", "S4", "C3", "C4")

_FEATURE_RE = re.compile(r"^(S|C)([0-9]+)$")


@dataclass(frozen=True)
class GeneratingMeasure:
    """Parameters of the recursive link model.

    Construction does not validate; call :func:`validate_measure` (or build
    through :func:`make_measure`) before handing a measure to anything that
    states "valid measure" as a precondition.
    """

    m: int
    k: int
    lengths: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        lengths = np.array(self.lengths, dtype=float)
        probs = np.array(self.probs, dtype=float)
        lengths.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class EdgeMoments:
    """Mean, variance, and standard deviation of the edge count."""

    mean: float
    variance: float
    std: float


class CliqueNumberEstimate(NamedTuple):
    """First-moment clique-number estimate.

    ``capped`` is set when the scan stopped at the enumeration cap while the
    expected count there was still at least one, i.e. the true crossing
    point may lie beyond the largest clique order we evaluate.
    """

    t_star: int
    capped: bool


@dataclass(frozen=True)
class FeatureVector:
    """A bag of subgraph-count features.

    ``edges`` is the edge count (or ``None`` if absent), ``stars`` maps the
    star order d to the d-star count S_d, and ``cliques`` maps the clique
    order t to the t-clique count C_t.  Values may be exact integers (graph
    counts) or floats (expectations).
    """

    edges: float | None = None
    stars: Mapping[int, float] = field(default_factory=dict)
    cliques: Mapping[int, float] = field(default_factory=dict)

    def keys(self) -> tuple[str, ...]:
        """Feature keys present, in canonical order (edges, S*, C*)."""
        keys = []
        if self.edges is not None:
            keys.append("edges")
        keys.extend(f"S{d}" for d in sorted(self.stars))
        keys.extend(f"C{t}" for t in sorted(self.cliques))
        return tuple(keys)

    def value(self, key: str):
        kind, order = parse_feature(key)
        if kind == "edges":
            if self.edges is None:
                raise KeyError(key)
            return self.edges
        if kind == "star":
            return self.stars[order]
        return self.cliques[order]

    def items(self):
        return [(key, self.value(key)) for key in self.keys()]

    def as_dict(self) -> dict:
        return dict(self.items())

    @classmethod
    def from_dict(cls, mapping: Mapping[str, float]) -> "FeatureVector":
        edges = None
        stars: dict[int, float] = {}
        cliques: dict[int, float] = {}
        for key, value in mapping.items():
            kind, order = parse_feature(key)
            if kind == "edges":
                edges = value
            elif kind == "star":
                stars[order] = value
            else:
                cliques[order] = value
        return cls(edges=edges, stars=stars, cliques=cliques)


def parse_feature(key: str) -> tuple[str, int]:
    """Split a feature key into its kind and order.

    "edges" -> ("edges", 0); "S3" -> ("star", 3); "C4" -> ("clique", 4).
    """
    if key == "edges":
        return ("edges", 0)
    match = _FEATURE_RE.match(key)
    if match:
        order = int(match.group(2))
        if match.group(1) == "S" and order >= 1:
            return ("star", order)
        if match.group(1) == "C" and order >= 2:
            return ("clique", order)
    raise DomainError(f"unknown feature key: {key!r}")


def make_measure(lengths, probs, k: int) -> GeneratingMeasure:
    """Build and validate a measure from raw arrays."""
    lengths = np.asarray(lengths, dtype=float)
    if lengths.ndim != 1:
        raise LengthVectorError(
            f"lengths must be a flat vector, got shape {lengths.shape}")
    return validate_measure(
        GeneratingMeasure(m=int(lengths.shape[0]), k=int(k),
                          lengths=lengths, probs=probs)
    )


def validate_measure(measure: GeneratingMeasure) -> GeneratingMeasure:
    """Check every structural invariant; return a validated measure.

    Interval lengths whose sum is within ``LENGTH_SUM_TOLERANCE`` of one are
    renormalized exactly once (division by their sum); a worse mismatch is
    rejected.  The probability matrix must be exactly symmetric.
    """
    m, k = measure.m, measure.k
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise DomainError(f"category count m must be a positive integer, got {m!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"recursion depth k must be a positive integer, got {k!r}")

    lengths = measure.lengths
    if lengths.ndim != 1 or lengths.shape[0] != m:
        raise LengthVectorError(
            f"lengths must be a flat vector of {m} entries, got shape {lengths.shape}")
    if not np.all(np.isfinite(lengths)) or np.any(lengths <= 0.0):
        raise LengthVectorError("interval lengths must be finite and strictly positive")
    total = float(lengths.sum())
    if abs(total - 1.0) > LENGTH_SUM_TOLERANCE:
        raise LengthVectorError(
            f"interval lengths must sum to 1 (got {total!r})")

    probs = measure.probs
    if probs.ndim != 2 or probs.shape != (m, m):
        raise ProbabilityRangeError(
            f"probs must be a {m}x{m} matrix, got shape {probs.shape}")
    if not np.all(np.isfinite(probs)):
        raise ProbabilityRangeError("link probabilities must be finite")
    if np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ProbabilityRangeError("link probabilities must lie in [0, 1]")
    if not np.array_equal(probs, probs.T):
        raise NonSymmetricError("link-probability matrix must be exactly symmetric")

    if m ** k > 2 ** ENCODING_BITS:
        raise DepthOverflowError(
            f"m**k = {m}**{k} exceeds the {ENCODING_BITS}-bit category encoding")

    if total != 1.0:
        lengths = lengths / total
    return GeneratingMeasure(m=int(m), k=int(k), lengths=lengths, probs=probs)


# ---------------------------------------------------------------------------
# per-level survival factors
# ---------------------------------------------------------------------------

def edge_survival_factor(measure: GeneratingMeasure) -> float:
    """Per-level probability that one node pair survives: sum p_ij l_i l_j."""
    lengths = measure.lengths
    return float(lengths @ measure.probs @ lengths)


def _star_survival(probs: np.ndarray, lengths: np.ndarray, d: int) -> float:
    """Per-level survival of a d-star, factorized to O(m^2).

    Conditioning on the center's category i, each leaf independently
    survives with probability (P l)_i, so the d leaves contribute that row
    mix to the d-th power.
    """
    row = probs @ lengths
    return float(np.dot(lengths, row ** d))


@lru_cache(maxsize=32)
def _tuple_grid(m: int, t: int) -> np.ndarray:
    """All category t-tuples over m categories as a (t, m**t) digit array."""
    return np.indices((m,) * t).reshape(t, -1)


_GRID_CELL_CAP = 1 << 20


def _clique_survival(probs: np.ndarray, lengths: np.ndarray, t: int) -> float:
    """Per-level survival of a t-clique: sum over category tuples of the
    product of all pairwise link probabilities, weighted by the tuple mass.
    """
    if t == 1:
        return float(lengths.sum())
    if t == 2:
        return float(lengths @ probs @ lengths)
    m = lengths.shape[0]
    n_tuples = m ** t
    if n_tuples <= _GRID_CELL_CAP:
        digits = _tuple_grid(m, t)
        w = lengths[digits].prod(axis=0)
        for a in range(t):
            for b in range(a + 1, t):
                w = w * probs[digits[a], digits[b]]
        return float(w.sum())
    # Chunked enumeration for large m**t.
    total = 0.0
    for start in range(0, n_tuples, _GRID_CELL_CAP):
        flat = np.arange(start, min(start + _GRID_CELL_CAP, n_tuples), dtype=np.int64)
        digits = np.empty((t, flat.size), dtype=np.int64)
        rem = flat
        for pos in range(t - 1, -1, -1):
            digits[pos] = rem % m
            rem = rem // m
        w = lengths[digits].prod(axis=0)
        for a in range(t):
            for b in range(a + 1, t):
                w = w * probs[digits[a], digits[b]]
        total += float(w.sum())
    return total


def _log_comb(n: int, r: int) -> float:
    """log of the binomial coefficient; -inf when the count is zero.

    math.comb is exact, and taking the log of the (possibly huge) integer
    keeps the relative error at one ulp, which matters when expectations
    are compared against direct enumeration at tight tolerances.
    """
    if r < 0 or r > n:
        return float("-inf")
    return math.log(math.comb(n, r))


# ---------------------------------------------------------------------------
# expectations
# ---------------------------------------------------------------------------

def expected_edges(measure: GeneratingMeasure, n: int) -> float:
    """Expected edge count on n nodes: C(n,2) * s**k, evaluated in log space."""
    if n < 2:
        raise DomainError(f"expected_edges needs n >= 2, got {n}")
    s = edge_survival_factor(measure)
    if s <= 0.0:
        return 0.0
    return math.exp(_log_comb(n, 2) + measure.k * math.log(s))


def expected_d_stars(measure: GeneratingMeasure, n: int, d: int) -> float:
    """Expected count of d-stars (a center plus an unordered set of d
    distinct leaves, all linked to the center): n * C(n-1, d) * base**k.
    """
    if not 1 <= d <= n - 1:
        raise DomainError(f"star order d must satisfy 1 <= d <= n-1, got d={d}, n={n}")
    base = _star_survival(measure.probs, measure.lengths, d)
    if base <= 0.0:
        return 0.0
    return math.exp(math.log(n) + _log_comb(n - 1, d) + measure.k * math.log(base))


def expected_t_cliques(measure: GeneratingMeasure, n: int, t: int) -> float:
    """Expected count of t-cliques: C(n, t) * clique survival ** k."""
    if t > MAX_CLIQUE_ORDER:
        raise CliqueSizeError(
            f"clique order {t} exceeds the enumeration cap of {MAX_CLIQUE_ORDER}")
    if not 2 <= t <= n:
        raise DomainError(f"clique order t must satisfy 2 <= t <= n, got t={t}, n={n}")
    base = _clique_survival(measure.probs, measure.lengths, t)
    if base <= 0.0:
        return 0.0
    return math.exp(_log_comb(n, t) + measure.k * math.log(base))


def edge_moments(measure: GeneratingMeasure, n: int) -> EdgeMoments:
    """Edge-count mean and variance.

    The variance is mean*(1-mean) + 2*E[S_2] + C(n,2)*C(n-2,2)*s**(2k); the
    wedge and disjoint-pair terms vanish on their own below n = 3 and n = 4
    because the binomials are zero.  To dodge the catastrophic cancellation
    between -mean**2 and the disjoint-pair term, the two are combined
    analytically: C(n,2)*(C(n-2,2) - C(n,2)) = C(n,2)*(3 - 2n).
    """
    if n < 2:
        raise DomainError(f"edge_moments needs n >= 2, got {n}")
    k = measure.k
    s = edge_survival_factor(measure)
    if s <= 0.0:
        return EdgeMoments(0.0, 0.0, 0.0)
    mean = math.exp(_log_comb(n, 2) + k * math.log(s))
    wedges = expected_d_stars(measure, n, 2) if n >= 3 else 0.0
    cross = (3 - 2 * n) * math.exp(_log_comb(n, 2) + 2 * k * math.log(s))
    variance = mean + 2.0 * wedges + cross
    if variance < 0.0:
        if abs(variance) <= 1e-9 * mean * mean:
            variance = 0.0
        else:
            raise ArithmeticError(
                f"edge variance came out negative ({variance!r}) beyond rounding noise")
    return EdgeMoments(mean=mean, variance=variance, std=math.sqrt(variance))


def expected_degree_counts(measure: GeneratingMeasure, n: int, exact: bool = False):
    """Expected number of nodes of each degree, for degrees 0 .. n-1.

    Uses the star identity E[S_d] = sum_{i>=d} C(i,d) E[N_i] (every node of
    degree i hosts C(i,d) of the d-stars centered on it) and unwinds it from
    the top degree down.  The subtraction chain is violently ill-conditioned
    in floating point, so:

    * ``exact=True`` runs the recursion in arbitrary-precision rationals
      (n <= 64) and the result is exact;
    * ``exact=False`` runs it in floats and is only trustworthy up to
      n of about 50; beyond that the counts can degrade to noise.

    Returns a list of Fractions (exact mode) or a float array.
    """
    if n < 1:
        raise DomainError(f"expected_degree_counts needs n >= 1, got {n}")
    k = measure.k
    if exact:
        if n > EXACT_DEGREE_LIMIT:
            raise ExactModeTooLargeError(
                f"exact degree counts are capped at n = {EXACT_DEGREE_LIMIT}, got {n}")
        lengths = [Fraction(x) for x in measure.lengths.tolist()]
        # The stored lengths are floats that only sum to 1 up to rounding;
        # the telescoping below is exact only on the exact simplex, so
        # renormalize the rationals (a relative adjustment of ~1 ulp).
        total = sum(lengths)
        lengths = [x / total for x in lengths]
        probs = [[Fraction(x) for x in row] for row in measure.probs.tolist()]
        rows = [sum(probs[i][j] * lengths[j] for j in range(measure.m))
                for i in range(measure.m)]
        stars = []
        for d in range(n):
            base = sum(lengths[i] * rows[i] ** d for i in range(measure.m))
            stars.append(n * math.comb(n - 1, d) * base ** k)
        counts: list[Fraction] = [Fraction(0)] * n
        for d in range(n - 1, -1, -1):
            acc = stars[d]
            for i in range(d + 1, n):
                acc -= math.comb(i, d) * counts[i]
            counts[d] = acc
        return counts

    if n > 1000:
        raise DomainError(
            "float-mode degree counts are limited to n <= 1000 "
            "(and unreliable well before that); use smaller n")
    row = measure.probs @ measure.lengths
    lengths = measure.lengths
    stars_f = np.empty(n)
    for d in range(n):
        base = float(np.dot(lengths, row ** d))
        stars_f[d] = n * float(math.comb(n - 1, d)) * base ** k
    counts_f = np.zeros(n)
    for d in range(n - 1, -1, -1):
        acc = stars_f[d]
        for i in range(d + 1, n):
            acc -= math.comb(i, d) * counts_f[i]
        counts_f[d] = acc
    return counts_f


def estimate_clique_number(measure: GeneratingMeasure, n: int) -> CliqueNumberEstimate:
    """Largest clique order whose expected count is still at least one.

    Scans upward from t = 1 (the expected count of single nodes is n) and
    stops at the first order whose expectation drops below one, or at the
    enumeration cap min(n, MAX_CLIQUE_ORDER).
    """
    if n < 1:
        raise DomainError(f"estimate_clique_number needs n >= 1, got {n}")
    cap = min(n, MAX_CLIQUE_ORDER)
    t_star = 1
    for t in range(2, cap + 1):
        base = _clique_survival(measure.probs, measure.lengths, t)
        if base <= 0.0:
            break
        log_expected = _log_comb(n, t) + measure.k * math.log(base)
        if log_expected >= 0.0:
            t_star = t
        else:
            break
    capped = t_star == cap and cap < n
    return CliqueNumberEstimate(t_star=t_star, capped=capped)


def expected_feature_vector(
    measure: GeneratingMeasure, n: int, features: Sequence[str] = DEFAULT_FEATURES
) -> FeatureVector:
    """Evaluate several expectations at once; entries match the
    single-feature operations exactly (they are the same calls)."""
    edges = None
    stars: dict[int, float] = {}
    cliques: dict[int, float] = {}
    for key in features:
        kind, order = parse_feature(key)
        if kind == "edges":
            edges = expected_edges(measure, n)
        elif kind == "star":
            stars[order] = expected_d_stars(measure, n, order)
        else:
            cliques[order] = expected_t_cliques(measure, n, order)
    return FeatureVector(edges=edges, stars=stars, cliques=cliques)
