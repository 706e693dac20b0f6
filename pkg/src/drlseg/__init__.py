"""Level-set segmentation of concentric boundaries in grayscale images.

The package evolves an implicit contour (the zero level set of a scalar
field) under an edge-stopping geodesic flow whose distance-regularization
term keeps the field close to a signed distance function without
periodic reinitialization.  A two-stage pipeline recovers an inner
boundary first and grows a dilated copy of it outward to find the
enclosing outer boundary; a classical reinitialization-based flow is
included as a baseline, along with preprocessing filters, overlap and
boundary metrics, and a batch command-line front end.

Typical library use::

    from drlseg import CaseConfig, make_phantom, run_case

    img, endo, epi = make_phantom(seed=7)
    endo_res, epi_res, (endo_rep, epi_rep) = run_case(img, (endo, epi),
                                                      CaseConfig())
    print(endo_rep.dice, epi_rep.dice)
"""

from .errors import (
    ContainmentError,
    InvalidArgumentError,
    NumericFailureError,
    ParseError,
    ToolError,
    UndefinedMetricError,
)
from .imgrid import (
    EllipseSpec,
    VectorField,
    central_gradient,
    convolve2d,
    divergence,
    gaussian_kernel,
    rasterize_ellipse,
    validate_image,
)
from .preproc import (
    BilateralParams,
    WienerParams,
    bilateral_filter,
    gradient_enhance,
    wiener_filter,
)
from .drlse import (
    BaselineParams,
    DrlseParams,
    baseline_lsf_step,
    dirac,
    dp_ratio,
    drlse_step,
    edge_indicator,
    energy,
    extract_zero_contour,
    heaviside,
    init_phi,
    mask_from_phi,
    reinitialize,
)
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    confusion,
    dice,
    hausdorff,
    mcc,
    pixel_accuracy,
    report,
)
from .pipeline import (
    PREPROC_CHOICES,
    CaseConfig,
    StageResult,
    apply_preproc,
    make_phantom,
    run_case,
    run_case_baseline,
    segment_endocardium,
    segment_endocardium_baseline,
    segment_epicardium,
    segment_epicardium_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineParams",
    "BilateralParams",
    "CaseConfig",
    "ConfusionCounts",
    "ContainmentError",
    "DrlseParams",
    "EllipseSpec",
    "InvalidArgumentError",
    "MetricsReport",
    "NumericFailureError",
    "PREPROC_CHOICES",
    "ParseError",
    "StageResult",
    "ToolError",
    "UndefinedMetricError",
    "VectorField",
    "WienerParams",
    "apply_preproc",
    "baseline_lsf_step",
    "bilateral_filter",
    "central_gradient",
    "confusion",
    "convolve2d",
    "dice",
    "dirac",
    "divergence",
    "dp_ratio",
    "drlse_step",
    "edge_indicator",
    "energy",
    "extract_zero_contour",
    "gaussian_kernel",
    "gradient_enhance",
    "hausdorff",
    "heaviside",
    "init_phi",
    "make_phantom",
    "mask_from_phi",
    "mcc",
    "pixel_accuracy",
    "rasterize_ellipse",
    "reinitialize",
    "report",
    "run_case",
    "run_case_baseline",
    "segment_endocardium",
    "segment_endocardium_baseline",
    "segment_epicardium",
    "segment_epicardium_baseline",
    "validate_image",
    "wiener_filter",
]
