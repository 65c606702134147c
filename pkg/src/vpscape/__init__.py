"""Dominant vanishing point detection for natural scenes, with
composition-sensitive image retrieval on top of the detections."""

from .config import PipelineConfig
from .geometry import Edge, HLine, HPoint, d_rms, fit_line_tls, intersect, point_line_distance
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "Edge",
    "HLine",
    "HPoint",
    "d_rms",
    "fit_line_tls",
    "intersect",
    "point_line_distance",
    "KERNEL_BACKEND",
    "__version__",
]
