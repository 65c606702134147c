"""Strength scoring of VP candidates and dominant-VP selection.

The strength of a candidate sums, over every pixel of its supporting
edges, the inverse of (pixel distance to the VP + tau). Pixels close to
the VP stand for distant scene content, so long edges running toward the
VP dominate the score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import HPoint


@dataclass
class FrameLimit:
    """Centered eligibility frame for dominant-VP candidates.

    A candidate at (x, y) qualifies when |x - cx| <= half_w and
    |y - cy| <= half_h. ``centered_on_image`` builds the conventional
    1000x1000 frame centered on a resized image.
    """

    cx: float
    cy: float
    half_w: float
    half_h: float

    @staticmethod
    def centered_on_image(width: int, height: int, frame: float = 1000.0) -> "FrameLimit":
        return FrameLimit(cx=width / 2.0, cy=height / 2.0, half_w=frame / 2.0, half_h=frame / 2.0)

    def contains(self, vp: HPoint) -> bool:
        if vp.is_ideal:
            return False
        x, y = vp.xy
        return abs(x - self.cx) <= self.half_w and abs(y - self.cy) <= self.half_h


@dataclass
class SelectionConfig:
    tau: float = 100.0
    threshold_T: float = 150.0
    frame_limit: FrameLimit | None = None

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass
class VPDetection:
    """A candidate VP with its supporting edge cluster and strength."""

    vp: HPoint
    edges: list
    strength: float
    rank: int = 0


def strength(vp: HPoint, edges, tau: float) -> float:
    """Depth-weighted strength of a VP given its supporting edges.

    Ideal VPs score 0: they cannot lie in the eligibility frame, so they
    never compete for dominance.
    """
    if not edges:
        raise ValueError("strength needs a nonempty edge list")
    if vp.is_ideal:
        return 0.0
    vx, vy = vp.xy
    return float(sum(kernels.strength_sum(e.points, vx, vy, tau) for e in edges))


def make_detection(vp: HPoint, edges, tau: float, rank: int = 0) -> VPDetection:
    return VPDetection(vp=vp, edges=list(edges), strength=strength(vp, edges, tau), rank=rank)


def select_dominant(detections, config: SelectionConfig) -> VPDetection | None:
    """Pick the strongest in-frame candidate with strength >= threshold."""
    eligible = [
        d
        for d in detections
        if (config.frame_limit is None or config.frame_limit.contains(d.vp))
        and d.strength >= config.threshold_T
    ]
    if not eligible:
        return None
    return max(eligible, key=lambda d: (d.strength, -d.rank))


def top_k(detections, k: int) -> list[VPDetection]:
    """The k highest-strength detections, descending, stable on ties."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ordered = sorted(detections, key=lambda d: (-d.strength, d.rank))
    return ordered[:k]


def verification_score(detections) -> float:
    """Scalar confidence that the image contains a dominant VP."""
    if not detections:
        return 0.0
    return max(d.strength for d in detections)
