"""Riemannian statistics on the compact Stiefel manifold.

Cayley-retraction chart geometry, the Grassmann quotient, a truncated
Gaussian family with Monte-Carlo normalizer, streaming/batch/stochastic
Frechet-mean estimators, tangent PCA, product-manifold k-means, ARMA
subspace identification, and a seeded benchmark harness.
"""

from .errors import (
    BundleFormatError,
    CutLocus,
    InsufficientData,
    InvalidMatrix,
    OutOfNeighborhood,
    RankDeficient,
    ScaleTooLarge,
    SingularSystem,
    StiefelStatsError,
)
from .estimators import (
    EstimatorTrace,
    FrechetMeanResult,
    SgdConfig,
    batch_fm,
    estimator_variance,
    fisher_information,
    ifme,
    ifme_step,
    sgd_fm,
)
from .gaussian import (
    GaussianParams,
    GofReport,
    NormalizerEstimate,
    centered_distance,
    estimate_normalizer,
    frame_completion,
    gof_halfnormal,
    log_kernel,
    sample,
)
from .grassmann import (
    HorizontalTangent,
    PrincipalAngles,
    horiz_exp,
    horiz_log,
    principal_angle_distance,
    principal_angles,
)
from .harness import (
    BenchRow,
    ExperimentConfig,
    MatrixBundle,
    bench_fm,
    bench_incremental,
    bench_sgd,
    load_bundle,
    save_bundle,
)
from .mstats import (
    ArmaModel,
    KmeansResult,
    PgaModel,
    ProductPoint,
    arma_decompose,
    kmeans,
    pga_fit,
    pga_reconstruct,
    product_distance,
)
from .stiefel import (
    REGULAR_BALL_RADIUS,
    GeodesicSegment,
    SkewLift,
    StiefelPoint,
    distance,
    geodesic_point,
    in_neighborhood,
    inner,
    lift,
    manifold_dim,
    origin,
    random_haar,
    retract,
)

__version__ = "0.1.0"
