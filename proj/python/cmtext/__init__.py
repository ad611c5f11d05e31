"""Center-mask scene text representation toolkit.

Thin Python surface over the C++ core: ground-truth label generation
(CM, GAP, PMD, RD), the multi-factor loss, mask-to-polygon text
reconstruction, detection evaluation and the reconstruction speed
benchmark.
"""

from cmtext._core import (  # noqa: F401
    DegeneratePolygonError,
    DimensionMismatchError,
    NonPositiveInputError,
    PointOutsideError,
    __version__,
    bench_reconstruct,
    center_point,
    dice_loss,
    fit_direct,
    generate_labels,
    grad_check,
    make_annular_sector,
    match_detections,
    offset_polygon,
    pixel_expand_baseline,
    polar_min_distance,
    polygon_iou,
    ratio_loss,
    ray_distances,
    reconstruct,
)

__all__ = [
    "DegeneratePolygonError",
    "DimensionMismatchError",
    "NonPositiveInputError",
    "PointOutsideError",
    "__version__",
    "bench_reconstruct",
    "center_point",
    "dice_loss",
    "fit_direct",
    "generate_labels",
    "grad_check",
    "make_annular_sector",
    "match_detections",
    "offset_polygon",
    "pixel_expand_baseline",
    "polar_min_distance",
    "polygon_iou",
    "ratio_loss",
    "ray_distances",
    "reconstruct",
]
