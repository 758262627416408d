"""Point processes on the sphere and flat tori and their W2 distance to the volume form."""

from ._ppw import (
    EnsembleSpec,
    InvalidInput,
    Manifold,
    NumericalError,
    RateFit,
    SmoothingBound,
    UnsupportedVariant,
    W2Estimate,
    __version__,
    annulus_difference_count,
    count_ball,
    fit_rate,
    gaf_variance_bound,
    gauss_circle,
    report,
    run_sweep,
    sample,
    smoothing_bound,
    w1_packing_lower_bound,
    w2_to_volume,
)

__all__ = [
    "EnsembleSpec",
    "InvalidInput",
    "Manifold",
    "NumericalError",
    "RateFit",
    "SmoothingBound",
    "UnsupportedVariant",
    "W2Estimate",
    "__version__",
    "annulus_difference_count",
    "count_ball",
    "fit_rate",
    "gaf_variance_bound",
    "gauss_circle",
    "report",
    "run_sweep",
    "sample",
    "smoothing_bound",
    "w1_packing_lower_bound",
    "w2_to_volume",
]
