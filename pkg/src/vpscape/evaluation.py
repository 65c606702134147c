"""Ground-truth handling, consistency metrics, ROC, and the synthetic
scene generator used as the desk-scale oracle.

The generator projects 3D-parallel segments through a pinhole camera and
keeps the per-pixel relative depth, so tests can check the geometric
identity between depth and inverse distance-to-VP directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, NoGroundTruth, SingleClass
from .geometry import Edge, HLine, HPoint, d_rms, intersect
from .retrieval import atomic_write_json


@dataclass
class Annotation:
    """Manually specified ground truth for one image.

    ``gt_lines`` are segment endpoint pairs ((x1, y1), (x2, y2)); the VP
    is re-derived as the intersection of the first two segment lines.
    """

    image_id: str
    gt_lines: list
    has_dominant: bool = True

    @property
    def gt_vp(self) -> HPoint:
        if len(self.gt_lines) < 2:
            raise NoGroundTruth("annotation needs at least 2 segments")
        l1 = HLine.through(*self.gt_lines[0])
        l2 = HLine.through(*self.gt_lines[1])
        return intersect(l1, l2)

    def gt_edges(self, step: float = 1.0) -> list[Edge]:
        """Ground-truth segments rasterized to pixel chains."""
        return [Edge.from_points(rasterize_segment(a, b, step)) for a, b in self.gt_lines]


def rasterize_segment(a, b, step: float = 1.0) -> np.ndarray:
    """Sample a segment at fixed arc-length steps, endpoints included."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    n = max(int(np.ceil(length / step)), 1)
    t = np.linspace(0.0, 1.0, n + 1)
    return a + t[:, None] * (b - a)


def consistency_error(gt_edges, v_hat: HPoint) -> float:
    """Mean RMS consistency of the ground-truth edges with a detection."""
    if not gt_edges:
        raise NoGroundTruth("no ground-truth edges")
    return float(np.mean([d_rms(e, v_hat) for e in gt_edges]))


def cumulative_histogram(errors, bin_edges=None):
    """Fraction of samples with error <= t for each threshold t.

    Returns (thresholds, fractions); the curve is monotone non-decreasing
    and bounded by 1.
    """
    errors = np.asarray(errors, dtype=float)
    if np.any(errors < 0):
        raise ValueError("errors must be non-negative")
    if bin_edges is None:
        bin_edges = np.arange(0.0, 20.0 + 0.25, 0.5)
    bin_edges = np.asarray(bin_edges, dtype=float)
    fractions = np.array([(errors <= t).mean() if errors.size else 0.0 for t in bin_edges])
    return bin_edges, fractions


def trial_average(pipeline, dataset, seeds) -> np.ndarray:
    """Per-item mean error over seeded reruns.

    ``pipeline(item, seed)`` must return the scalar error of one run.
    """
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    means = []
    for item in dataset:
        means.append(float(np.mean([pipeline(item, s) for s in seeds])))
    return np.array(means)


def roc_auc(scores):
    """ROC curve and trapezoidal AUC from (score, is_positive) pairs.

    Scores are swept descending with ties grouped into single curve steps.

    Raises:
        SingleClass: all labels identical.
    """
    scores = list(scores)
    labels = np.array([bool(l) for _, l in scores])
    values = np.array([float(s) for s, _ in scores])
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs both positive and negative samples")
    order = np.argsort(-values, kind="stable")
    values, labels = values[order], labels[order]
    fpr, tpr = [0.0], [0.0]
    tp = fp = 0
    i = 0
    while i < len(values):
        j = i
        while j < len(values) and values[j] == values[i]:
            tp += int(labels[j])
            fp += int(not labels[j])
            j += 1
        fpr.append(fp / n_neg)
        tpr.append(tp / n_pos)
        i = j
    fpr, tpr = np.array(fpr), np.array(tpr)
    auc = float(np.trapezoid(tpr, fpr))
    return fpr, tpr, auc


# ---------------------------------------------------------------------------
# Strength baselines (evaluation-only comparators)


def edge_num(detection) -> float:
    """Baseline measure: number of supporting edges."""
    return float(len(detection.edges))


def edge_sum(detection) -> float:
    """Baseline measure: summed length of supporting edges."""
    return float(sum(e.length for e in detection.edges))


# ---------------------------------------------------------------------------
# Synthetic scenes


@dataclass
class InlierTruth:
    """Noise-free geometry retained for one generated inlier edge."""

    clean_points: np.ndarray
    lambdas: np.ndarray
    ref_point: np.ndarray  # image of the 3D reference point
    ref_dist: float  # its distance to the VP


@dataclass
class SyntheticScene:
    camera: dict
    gt_direction: np.ndarray
    gt_vp: HPoint
    inlier_edges: list
    outlier_edges: list
    inlier_truth: list
    noise_sigma: float
    width: int = 500
    height: int = 400
    seed: int | None = None

    @property
    def edges(self) -> list:
        return list(self.inlier_edges) + list(self.outlier_edges)

    def annotation(self, image_id: str = "scene") -> Annotation:
        segs = [
            (tuple(t.clean_points[0]), tuple(t.clean_points[-1]))
            for t in self.inlier_truth[:2]
        ]
        return Annotation(image_id=image_id, gt_lines=segs, has_dominant=True)


def generate_scene(
    noise_sigma: float = 1.0,
    n_inliers: int = 6,
    n_outliers: int = 10,
    vp=None,
    seed: int = 0,
    width: int = 500,
    height: int = 400,
    focal: float = 500.0,
    reach=(60.0, 160.0),
) -> SyntheticScene:
    """Generate a pinhole-projected scene with converging inlier edges.

    Inlier pixels are sampled at 1-px steps along rays through the VP and
    carry their ground-truth relative depth; perpendicular Gaussian noise
    of ``noise_sigma`` is then added. Outlier chains are random segments
    rejected when accidentally consistent with the VP.

    ``reach`` bounds how far back from the reference point each inlier
    chain extends toward the VP; larger values mean edges that run deep
    into the image, with pixels close to the VP.
    """
    if n_inliers < 2:
        raise ValueError("need at least 2 inlier edges")
    rng = np.random.default_rng(seed)
    if vp is None:
        vx = rng.uniform(0.25 * width, 0.75 * width)
        vy = rng.uniform(0.25 * height, 0.75 * height)
    else:
        vx, vy = float(vp[0]), float(vp[1])
    gt_vp = HPoint.from_xy(vx, vy)
    # Back-project the VP to the 3D direction it images under K[I|0].
    k_inv = np.array([[1.0 / focal, 0.0, -width / 2.0 / focal],
                      [0.0, 1.0 / focal, -height / 2.0 / focal],
                      [0.0, 0.0, 1.0]])
    direction = k_inv @ np.array([vx, vy, 1.0])
    direction /= np.linalg.norm(direction)
    camera = {
        "focal": focal,
        "principal_point": [width / 2.0, height / 2.0],
        "rotation": np.eye(3).tolist(),
        "translation": [0.0, 0.0, 0.0],
    }

    inlier_edges, truths = [], []
    attempts = 0
    while len(inlier_edges) < n_inliers and attempts < 100 * n_inliers:
        attempts += 1
        ax = rng.uniform(10.0, width - 10.0)
        ay = rng.uniform(10.0, height - 10.0)
        ref = np.array([ax, ay])
        l_a = float(np.linalg.norm(ref - [vx, vy]))
        if l_a < 120.0:
            continue
        u = (ref - [vx, vy]) / l_a
        l_near = max(l_a - rng.uniform(*reach), rng.uniform(30.0, 50.0))
        dists = np.arange(l_near, l_a + 0.5, 1.0)
        clean = np.array([vx, vy]) + dists[:, None] * u
        inside = (
            (clean[:, 0] >= 0) & (clean[:, 0] <= width)
            & (clean[:, 1] >= 0) & (clean[:, 1] <= height)
        )
        clean = clean[inside]
        dists = dists[inside]
        if clean.shape[0] < 45:
            continue
        lambdas = l_a / dists - 1.0
        normal = np.array([-u[1], u[0]])
        noisy = clean + rng.normal(0.0, noise_sigma, size=clean.shape[0])[:, None] * normal
        inlier_edges.append(Edge.from_points(noisy))
        truths.append(InlierTruth(clean_points=clean, lambdas=lambdas, ref_point=ref, ref_dist=l_a))
    if len(inlier_edges) < n_inliers:
        raise RuntimeError("could not place the requested number of inlier edges")

    outlier_edges = []
    attempts = 0
    while len(outlier_edges) < n_outliers and attempts < 200 * max(n_outliers, 1):
        attempts += 1
        p0 = rng.uniform([0, 0], [width, height])
        ang = rng.uniform(0.0, np.pi)
        length = rng.uniform(45.0, 140.0)
        p1 = p0 + length * np.array([np.cos(ang), np.sin(ang)])
        p1 = np.clip(p1, [0, 0], [width, height])
        if np.linalg.norm(p1 - p0) < 45.0:
            continue
        clean = rasterize_segment(p0, p1, 1.0)
        u = (p1 - p0) / np.linalg.norm(p1 - p0)
        normal = np.array([-u[1], u[0]])
        noisy = clean + rng.normal(0.0, noise_sigma, size=clean.shape[0])[:, None] * normal
        edge = Edge.from_points(noisy)
        # Reject chains that accidentally converge to the true VP.
        if d_rms(Edge.from_points(clean), gt_vp) < 10.0:
            continue
        outlier_edges.append(edge)

    return SyntheticScene(
        camera=camera,
        gt_direction=direction,
        gt_vp=gt_vp,
        inlier_edges=inlier_edges,
        outlier_edges=outlier_edges,
        inlier_truth=truths,
        noise_sigma=float(noise_sigma),
        width=width,
        height=height,
        seed=seed,
    )


def scene_to_json(scene: SyntheticScene) -> dict:
    return {
        "format": "vpscape-scene",
        "version": 1,
        "seed": scene.seed,
        "noise_sigma": scene.noise_sigma,
        "width": scene.width,
        "height": scene.height,
        "camera": scene.camera,
        "gt_direction": [float(v) for v in scene.gt_direction],
        "gt_vp": [float(v) for v in scene.gt_vp.xy],
        "inliers": [
            {
                "points": [[float(x), float(y)] for x, y in e.points],
                "clean_points": [[float(x), float(y)] for x, y in t.clean_points],
                "lambdas": [float(v) for v in t.lambdas],
                "ref_point": [float(v) for v in t.ref_point],
                "ref_dist": float(t.ref_dist),
            }
            for e, t in zip(scene.inlier_edges, scene.inlier_truth)
        ],
        "outliers": [
            [[float(x), float(y)] for x, y in e.points] for e in scene.outlier_edges
        ],
    }


def scene_from_json(obj) -> SyntheticScene:
    if obj.get("format") != "vpscape-scene":
        raise FormatError("not a vpscape scene file")
    inlier_edges, truths = [], []
    for rec in obj["inliers"]:
        inlier_edges.append(Edge.from_points(rec["points"]))
        truths.append(
            InlierTruth(
                clean_points=np.array(rec["clean_points"]),
                lambdas=np.array(rec["lambdas"]),
                ref_point=np.array(rec["ref_point"]),
                ref_dist=float(rec["ref_dist"]),
            )
        )
    return SyntheticScene(
        camera=obj["camera"],
        gt_direction=np.array(obj["gt_direction"]),
        gt_vp=HPoint.from_xy(*obj["gt_vp"]),
        inlier_edges=inlier_edges,
        outlier_edges=[Edge.from_points(p) for p in obj["outliers"]],
        inlier_truth=truths,
        noise_sigma=float(obj["noise_sigma"]),
        width=int(obj["width"]),
        height=int(obj["height"]),
        seed=obj.get("seed"),
    )


def save_scene(scene: SyntheticScene, path) -> None:
    atomic_write_json(scene_to_json(scene), path)


def load_scene(path) -> SyntheticScene:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read scene {path}: {exc}") from exc
    return scene_from_json(obj)


def render_contour_map(scene: SyntheticScene) -> np.ndarray:
    """Rasterize the scene's edges into an 8-bit contour-strength image."""
    img = np.zeros((scene.height, scene.width), dtype=np.uint8)
    for e in scene.edges:
        pts = np.round(e.points).astype(int)
        for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
            for x, y in _bresenham(x0, y0, x1, y1):
                if 0 <= y < scene.height and 0 <= x < scene.width:
                    img[y, x] = 255
    return img


def _bresenham(x0, y0, x1, y1):
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
