"""Contour-map ingestion, chain tracing, and subdivision into straight edges.

The weighted contour map is consumed as a file (single-channel 8/16-bit
PNG or PGM, weight = value / max-value, optional JSON sidecar with the
image id and resized dimensions). A self-contained gradient-based
extractor is provided for images without a precomputed map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage.morphology import skeletonize

from .errors import DimensionMismatch, FormatError
from .geometry import Edge

_NEIGHBORS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass
class ContourMap:
    """Dense per-pixel contour strength in [0, 1]."""

    width: int
    height: int
    weights: np.ndarray  # (height, width) float
    image_id: str | None = None


@dataclass
class Contour:
    """An 8-connected open pixel chain, points as (x, y)."""

    points: np.ndarray
    arc_length: float

    @staticmethod
    def from_points(points) -> "Contour":
        pts = np.asarray(points, dtype=float)
        length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
        return Contour(points=pts, arc_length=length)

    @property
    def endpoints(self):
        return self.points[0], self.points[-1]


def load_contour_map(path, sidecar_path=None) -> ContourMap:
    """Load a contour map raster, normalizing weights to [0, 1].

    The sidecar defaults to ``<path stem>.json`` next to the raster; when
    present its dimensions must match the raster.
    """
    path = Path(path)
    try:
        img = Image.open(path)
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot read contour map {path}: {exc}") from exc
    if img.mode == "L":
        maxval = 255.0
    elif img.mode in ("I;16", "I"):
        maxval = 65535.0
    else:
        raise FormatError(f"contour map must be single-channel 8/16-bit, got mode {img.mode}")
    weights = np.asarray(img, dtype=float) / maxval
    weights = np.clip(weights, 0.0, 1.0)

    image_id = None
    if sidecar_path is None:
        candidate = path.with_suffix(".json")
        sidecar_path = candidate if candidate.exists() else None
    if sidecar_path is not None:
        try:
            meta = json.loads(Path(sidecar_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad sidecar {sidecar_path}: {exc}") from exc
        image_id = meta.get("image_id")
        mw, mh = meta.get("width"), meta.get("height")
        if (mw, mh) != (img.width, img.height):
            raise DimensionMismatch(
                f"sidecar says {mw}x{mh}, raster is {img.width}x{img.height}"
            )
    return ContourMap(width=img.width, height=img.height, weights=weights, image_id=image_id)


def trace_contours(cmap: ContourMap, w_min: float) -> list[Contour]:
    """Threshold, thin, and split a contour map into open pixel chains.

    Pixels with weight >= w_min are thinned to 1-px skeleton chains, split
    at junction pixels (3 or more skeleton neighbors), and returned as
    maximal open chains. Closed chains are cut at their weakest-weight
    pixel. Output order is deterministic: sorted by start coordinate.
    """
    if not 0.0 <= w_min <= 1.0:
        raise ValueError("w_min must lie in [0, 1]")
    mask = (cmap.weights >= w_min) & (cmap.weights > 0.0)
    if not mask.any():
        return []
    skel = skeletonize(mask)
    deg = _neighbor_counts(skel)
    junctions = skel & (deg >= 3)
    body = skel & ~junctions

    chains = _trace_chains(body, cmap.weights)
    chains = [_attach_junctions(c, junctions) for c in chains]
    contours = []
    for chain in chains:
        if len(chain) < 2:
            continue
        pts = np.array([(float(c), float(r)) for r, c in chain])
        if tuple(pts[-1]) < tuple(pts[0]):
            pts = pts[::-1]
        contours.append(Contour.from_points(pts))
    contours.sort(key=lambda ct: (tuple(ct.points[0]), tuple(ct.points[-1])))
    return contours


def _neighbor_counts(skel: np.ndarray) -> np.ndarray:
    kernel = np.ones((3, 3), dtype=int)
    kernel[1, 1] = 0
    return ndimage.convolve(skel.astype(int), kernel, mode="constant")


def _trace_chains(body: np.ndarray, weights: np.ndarray):
    """Walk 1-px chains over the junction-free skeleton body."""
    pixels = {(int(r), int(c)) for r, c in np.argwhere(body)}
    adj = {}
    for r, c in pixels:
        adj[(r, c)] = sorted(
            (r + dr, c + dc) for dr, dc in _NEIGHBORS if (r + dr, c + dc) in pixels
        )
    visited = set()
    chains = []

    def walk(start):
        chain = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = [p for p in adj[cur] if p not in visited]
            if not nxt:
                break
            cur = nxt[0]
            chain.append(cur)
            visited.add(cur)
        return chain

    # Open chains first, from their endpoints.
    for p in sorted(pixels):
        if p not in visited and len(adj[p]) <= 1:
            chains.append(walk(p))
    # Whatever remains are cycles: open each at its weakest pixel.
    for p in sorted(pixels - visited, key=lambda q: (weights[q[0], q[1]], q)):
        if p not in visited:
            chains.append(walk(p))
    return chains


def _attach_junctions(chain, junctions: np.ndarray):
    """Extend chain ends onto an adjacent junction pixel, if any."""
    out = list(chain)
    for end, append in ((out[0], False), (out[-1], True)):
        r, c = end
        cand = sorted(
            (r + dr, c + dc)
            for dr, dc in _NEIGHBORS
            if 0 <= r + dr < junctions.shape[0]
            and 0 <= c + dc < junctions.shape[1]
            and junctions[r + dr, c + dc]
        )
        if cand:
            if append:
                out.append(cand[0])
            else:
                out.insert(0, cand[0])
    return out


def _point_segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


def subdivide(contour: Contour, alpha: float) -> list[Edge]:
    """Recursively split a contour into approximately straight edges.

    A (sub)chain splits at its point of maximum distance to the chord
    joining its endpoints whenever that distance exceeds alpha times the
    (sub)chain's own arc length, making the procedure scale invariant.
    Adjacent output edges share the split point; chains of fewer than 3
    points have no interior point and stop the recursion.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    pts = contour.points
    if pts.shape[0] < 2:
        raise ValueError("contour needs at least 2 points")
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(steps)])

    edges = []
    stack = [(0, pts.shape[0] - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo + 1 >= 3:
            interior = pts[lo + 1 : hi]
            dists = _point_segment_distances(interior, pts[lo], pts[hi])
            k = int(np.argmax(dists))
            if dists[k] > alpha * (cum[hi] - cum[lo]):
                split = lo + 1 + k
                # Push right first so the left half is processed first.
                stack.append((split, hi))
                stack.append((lo, split))
                continue
        edges.append(Edge.from_points(pts[lo : hi + 1]))
    return edges


def filter_edges(edges, l_min: float) -> list[Edge]:
    """Keep edges strictly longer than l_min pixels."""
    if l_min < 0:
        raise ValueError("l_min must be non-negative")
    return [e for e in edges if e.length > l_min]


def fallback_edges(
    image,
    alpha: float = 0.05,
    l_min: float = 40.0,
    w_min: float = 0.1,
    sigma: float = 1.4,
    low_frac: float = 0.08,
    high_frac: float = 0.2,
) -> list[Edge]:
    """Self-contained edge extractor for images without a contour map.

    Gradient magnitude with non-maximum suppression and hysteresis linking
    produces pixel chains, which then go through the same subdivision and
    length filtering as traced contours.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim == 3:
        img = img[..., :3] @ np.array([0.299, 0.587, 0.114])
    smoothed = ndimage.gaussian_filter(img, sigma)
    gx = ndimage.sobel(smoothed, axis=1)
    gy = ndimage.sobel(smoothed, axis=0)
    mag = np.hypot(gx, gy)
    peak = float(mag.max())
    if peak <= 0.0:
        return []

    nms = _non_maximum_suppression(mag, gx, gy)
    strong = nms >= high_frac * peak
    weak = nms >= low_frac * peak
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3)))
    keep_labels = np.unique(labels[strong])
    keep_labels = keep_labels[keep_labels != 0]
    linked = np.isin(labels, keep_labels) & weak

    weights = np.where(linked, np.clip(mag / peak, w_min, 1.0), 0.0)
    cmap = ContourMap(width=img.shape[1], height=img.shape[0], weights=weights)
    edges = []
    for contour in trace_contours(cmap, w_min):
        edges.extend(subdivide(contour, alpha))
    return filter_edges(edges, l_min)


def _non_maximum_suppression(mag, gx, gy):
    """Keep pixels that are local maxima along the gradient direction."""
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    out = np.zeros_like(mag)
    h, w = mag.shape
    # 4 quantized directions: E-W, NE-SW, N-S, NW-SE.
    sector = ((angle + np.pi / 8) // (np.pi / 4)).astype(int) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1, mode="constant")
    for s, (dr, dc) in offsets.items():
        sel = sector == s
        fwd = padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        bwd = padded[1 - dr : 1 - dr + h, 1 - dc : 1 - dc + w]
        keep = sel & (mag >= fwd) & (mag >= bwd)
        out[keep] = mag[keep]
    return out


__all__ = [
    "ContourMap",
    "Contour",
    "load_contour_map",
    "trace_contours",
    "subdivide",
    "filter_edges",
    "fallback_edges",
]
