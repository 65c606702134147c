"""End-to-end orchestration: edges -> clusters -> scored VP candidates."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .config import PipelineConfig
from .contours import ContourMap, fallback_edges, filter_edges, subdivide, trace_contours
from .jlinkage import build_preference_matrix, cluster, estimate_cluster_vp, sample_hypotheses
from .selection import FrameLimit, SelectionConfig, VPDetection, make_detection, select_dominant


def detect_candidates(edges, config: PipelineConfig, seed: int | None = None) -> list[VPDetection]:
    """Run J-Linkage over the edges and score every multi-edge cluster.

    Singleton clusters are outliers and produce no candidate. The rank of
    each detection is its cluster's position in the deterministic cluster
    ordering, so equal-strength ties resolve stably downstream.
    """
    if len(edges) < 2:
        return []
    if seed is None:
        seed = config.seed
    hypotheses = sample_hypotheses(edges, config.n_hypotheses, seed)
    pref = build_preference_matrix(edges, hypotheses, config.phi)
    detections = []
    rank = 0
    for clus in cluster(pref):
        if len(clus.members) < 2:
            continue
        vp = estimate_cluster_vp(clus, edges, hypotheses)
        member_edges = [edges[i] for i in clus.members]
        detections.append(make_detection(vp, member_edges, config.tau, rank=rank))
        rank += 1
    return detections


def selection_config(config: PipelineConfig, width: int, height: int) -> SelectionConfig:
    return SelectionConfig(
        tau=config.tau,
        threshold_T=config.threshold_t,
        frame_limit=FrameLimit.centered_on_image(width, height),
    )


def detect_dominant(edges, config: PipelineConfig, width: int, height: int, seed=None):
    """Convenience wrapper returning (candidates, dominant-or-None)."""
    candidates = detect_candidates(edges, config, seed=seed)
    dominant = select_dominant(candidates, selection_config(config, width, height))
    return candidates, dominant


def edges_from_contour_map(cmap: ContourMap, config: PipelineConfig):
    edges = []
    for contour in trace_contours(cmap, config.w_min):
        edges.extend(subdivide(contour, config.alpha))
    return filter_edges(edges, config.l_min)


def load_image_resized(path, target_len: int):
    """Load an image and resize so its longer side equals target_len."""
    img = Image.open(path)
    scale = target_len / max(img.size)
    new_size = (max(round(img.width * scale), 1), max(round(img.height * scale), 1))
    img = img.resize(new_size, Image.BILINEAR)
    return np.asarray(img, dtype=float)


def edges_from_image(image, config: PipelineConfig):
    return fallback_edges(
        image, alpha=config.alpha, l_min=config.l_min, w_min=config.w_min
    )
