"""Multifractal network generator.

Closed-form subgraph moments of the recursive link model, moment-matching
fits against observed graphs, and exact plus fast approximate samplers.
"""

from .errors import (
    AllZeroMeasureError,
    CliqueSizeError,
    DegenerateDiagonalError,
    DepthOverflowError,
    DomainError,
    ExactModeTooLargeError,
    GraphTooLargeError,
    LengthVectorError,
    MeasureValidationError,
    MfngError,
    NonSymmetricError,
    ParseError,
    PatternTooLargeError,
    ProbabilityRangeError,
    SchemaError,
    StalledError,
    TooLargeError,
    UnsupportedMError,
    ZeroTargetFeatureError,
    ZeroWedgesError,
)
from .features import (
    DegreeDistribution,
    Graph,
    brute_force_counts,
    clustering_coefficient,
    count_4cliques,
    count_stars,
    count_triangles,
    degree_distribution,
    feature_vector,
    from_edge_list,
)
from .fit import FitConfig, FitResult, fit, local_optimize, objective, random_init
from .measure import (
    DEFAULT_FEATURES,
    CliqueNumberEstimate,
    EdgeMoments,
    FeatureVector,
    GeneratingMeasure,
    edge_moments,
    edge_survival_factor,
    estimate_clique_number,
    expected_d_stars,
    expected_degree_counts,
    expected_edges,
    expected_feature_vector,
    expected_t_cliques,
    make_measure,
    parse_feature,
    validate_measure,
)
from .oracle import (
    McStats,
    exact_expected_features,
    exact_subgraph_probability,
    mc_feature_stats,
)
from .sampler import (
    CategoryAssignment,
    CategoryIndex,
    FastSamplerConfig,
    NoiseSchedule,
    QTable,
    assign_categories,
    build_q,
    decode_categories,
    encode_categories,
    fast_sample,
    make_noise_schedule,
    naive_sample,
    noisy_sample,
    sample_by_intersection,
)

__version__ = "0.1.0"
