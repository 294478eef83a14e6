"""ReLU networks for the d-input maximum: constructions across depths,
Monte Carlo error estimation, and the numerics behind the width floors."""

__version__ = "0.1.0"

from .network import (
    ACTIVATIONS,
    AffineLayer,
    FeedForwardNet,
    NetStats,
    NumericOverflowError,
    ParseError,
    deserialize,
    evaluate,
    evaluate_batch,
    load,
    save,
    serialize,
    stats,
)
from .constructions import (
    alpha_for_accuracy,
    batch_split,
    beta,
    deep_max,
    deep_shape,
    depth3_max,
    depth3_shape,
    exact_max_tree,
    max_k_for_width_bound,
    rescale_to_box,
)
from .sampling import (
    DistributionSpec,
    ErrorEstimate,
    ProportionEstimate,
    SeparationCertificate,
    estimate_violation_prob,
    is_delta_separated,
    max_oracle,
    mc_l2_error,
    row_max,
    sample_separated,
    separation_from_gap,
    wilson_interval,
)
from .spectral import (
    SkewMap,
    SpectralPoint,
    big_fourier_floor,
    dawson,
    dawson_quadrature_oracle,
    direction_component,
    magnitude_bound,
    q1_transform,
    q1_transform_grid,
    quadrature_transform_oracle,
    transform_direction_floor,
)
from .analysis import (
    FloorReport,
    KernelDirection,
    Parallelotope,
    WeightGraph,
    build_parallelotope,
    build_weight_graph,
    error_floor,
    find_triangle,
    kernel_direction,
    mantel_edge_threshold,
    parallelotope_floor,
)
from .training import (
    SweepCell,
    TrainConfig,
    TrainResult,
    TrainingDivergedError,
    best_cells,
    train,
    width_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
