"""Composition-sensitive retrieval: semantic + perspective similarity.

The total similarity of two images is the cosine similarity of their
(ingested) semantic feature vectors plus a perspective term built from
the dominant VP locations and a spatial-pyramid match over the pixels of
the VP-consistent edges.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatchFeature,
    EmptyIndex,
    FormatError,
    LevelMismatch,
    PointOutOfFrame,
    VersionMismatch,
)
from .geometry import Edge, HPoint
from .selection import VPDetection

INDEX_FORMAT = "vpscape-index"
INDEX_VERSION = 1


@dataclass
class SemanticFeature:
    """Unit-norm semantic descriptor vector, ingested from file."""

    vector: np.ndarray

    @staticmethod
    def from_array(v) -> "SemanticFeature":
        v = np.asarray(v, dtype=float).ravel()
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.all(np.isfinite(v)):
            raise FormatError("semantic feature must be finite and nonzero")
        return SemanticFeature(vector=v / norm)


@dataclass
class PyramidHistogram:
    """Nested grid counts of edge pixels at resolutions 0..L."""

    levels: list  # level l: (2^l, 2^l) int array, [row, col]
    total_points: int
    width: int
    height: int

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def build_pyramid(edge_pixels, width: int, height: int, L: int) -> PyramidHistogram:
    """Bin edge pixels into 2^l x 2^l grids for l = 0..L.

    Cell indices are floor(x * 2^l / width) (same for y); points exactly
    on the right or bottom frame boundary clamp into the last cell.

    Raises:
        PointOutOfFrame: a pixel lies outside [0, width] x [0, height].
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    pts = np.asarray(edge_pixels, dtype=float).reshape(-1, 2)
    if pts.size and (
        pts[:, 0].min() < 0 or pts[:, 0].max() > width or pts[:, 1].min() < 0 or pts[:, 1].max() > height
    ):
        raise PointOutOfFrame("edge pixel outside the image frame")
    levels = []
    for l in range(L + 1):
        cells = 1 << l
        counts = np.zeros((cells, cells), dtype=np.int64)
        if pts.size:
            cx = np.minimum((pts[:, 0] * cells / width).astype(np.int64), cells - 1)
            cy = np.minimum((pts[:, 1] * cells / height).astype(np.int64), cells - 1)
            np.add.at(counts, (cy, cx), 1)
        levels.append(counts)
    return PyramidHistogram(levels=levels, total_points=pts.shape[0], width=width, height=height)


def _check_compatible(hi: PyramidHistogram, hj: PyramidHistogram):
    if hi.depth != hj.depth or (hi.width, hi.height) != (hj.width, hj.height):
        raise LevelMismatch("pyramids have different depth or grid geometry")


def histogram_intersection(hi: PyramidHistogram, hj: PyramidHistogram, l: int) -> int:
    """Number of matches at level l: sum of per-cell minima."""
    _check_compatible(hi, hj)
    if not 0 <= l <= hi.depth:
        raise LevelMismatch(f"level {l} out of range 0..{hi.depth}")
    return int(np.minimum(hi.levels[l], hj.levels[l]).sum())


def pyramid_match(hi: PyramidHistogram, hj: PyramidHistogram) -> float:
    """Spatial-pyramid matching score.

    Telescoped closed form: I^0 / 2^L + sum_{l=1..L} I^l / 2^(L-l+1),
    which equals weighting the new matches at level l by 2^-(L-l).
    """
    _check_compatible(hi, hj)
    L = hi.depth
    score = histogram_intersection(hi, hj, 0) / (1 << L)
    for l in range(1, L + 1):
        score += histogram_intersection(hi, hj, l) / (1 << (L - l + 1))
    return score


@dataclass
class RetrievalParams:
    gamma1: float = 0.5
    gamma2: float = 0.5
    L: int = 6
    len: int = 500
    raw_kernel: bool = False


@dataclass
class ImageRecord:
    """Per-image retrieval state: semantics, dominant VP, pyramid."""

    id: str
    width: int
    height: int
    semantic: SemanticFeature
    dominant: VPDetection | None = None
    pyramid: PyramidHistogram | None = None

    @staticmethod
    def build(id, width, height, semantic, dominant=None, L: int = 6) -> "ImageRecord":
        feat = semantic if isinstance(semantic, SemanticFeature) else SemanticFeature.from_array(semantic)
        pyramid = None
        if dominant is not None:
            pixels = np.vstack([e.points for e in dominant.edges])
            pyramid = build_pyramid(pixels, width, height, L)
        return ImageRecord(
            id=str(id), width=int(width), height=int(height),
            semantic=feat, dominant=dominant, pyramid=pyramid,
        )


def perspective_similarity(a: ImageRecord, b: ImageRecord, params: RetrievalParams) -> float:
    """Perspective term: VP proximity plus pyramid match of edge pixels.

    Returns 0 when either record lacks a dominant VP. The pyramid kernel
    is normalized by the geometric mean of the self-match scores so the
    term is bounded by 1 (disable via ``params.raw_kernel``).
    """
    if a.dominant is None or b.dominant is None:
        return 0.0
    va, vb = a.dominant.vp, b.dominant.vp
    if va.is_ideal or vb.is_ideal:
        return 0.0
    d = float(np.linalg.norm(va.xy - vb.xy))
    term1 = max(1.0 - d / params.len, 0.0)
    k = pyramid_match(a.pyramid, b.pyramid)
    if not params.raw_kernel:
        denom = np.sqrt(pyramid_match(a.pyramid, a.pyramid) * pyramid_match(b.pyramid, b.pyramid))
        k = k / denom if denom > 0 else 0.0
    return params.gamma1 * term1 + params.gamma2 * k


def total_similarity(a: ImageRecord, b: ImageRecord, params: RetrievalParams) -> float:
    """Semantic cosine similarity plus perspective similarity."""
    if a.semantic.vector.shape != b.semantic.vector.shape:
        raise DimensionMismatchFeature("semantic feature dimensions differ")
    ds = float(a.semantic.vector @ b.semantic.vector)
    return ds + perspective_similarity(a, b, params)


@dataclass
class RetrievalIndex:
    """Immutable corpus of image records with fixed matching parameters."""

    params: RetrievalParams
    records: list = field(default_factory=list)

    def add(self, record: ImageRecord):
        self.records.append(record)

    def get(self, record_id: str) -> ImageRecord | None:
        for r in self.records:
            if r.id == record_id:
                return r
        return None


def query(index: RetrievalIndex, query_record: ImageRecord, k: int, exclude_self: bool = False):
    """Rank index records by total similarity to the query, descending.

    Ties break on record id. With ``exclude_self`` a record whose id
    equals the query's is skipped.

    Raises:
        EmptyIndex: the index has no records.
    """
    if not index.records:
        raise EmptyIndex("cannot query an empty index")
    scored = [
        (r.id, total_similarity(query_record, r, index.params))
        for r in index.records
        if not (exclude_self and r.id == query_record.id)
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[:k]


# ---------------------------------------------------------------------------
# Persistence


def _vp_to_json(vp: HPoint):
    if vp.is_ideal:
        return {"ideal": [float(vp.coords[0]), float(vp.coords[1])]}
    return {"xy": [float(vp.xy[0]), float(vp.xy[1])]}


def _vp_from_json(obj) -> HPoint:
    if "ideal" in obj:
        return HPoint.from_array([obj["ideal"][0], obj["ideal"][1], 0.0])
    return HPoint.from_xy(*obj["xy"])


def detection_to_json(det: VPDetection):
    return {
        "vp": _vp_to_json(det.vp),
        "strength": float(det.strength),
        "rank": int(det.rank),
        "edges": [[[float(x), float(y)] for x, y in e.points] for e in det.edges],
    }


def detection_from_json(obj) -> VPDetection:
    return VPDetection(
        vp=_vp_from_json(obj["vp"]),
        edges=[Edge.from_points(pts) for pts in obj["edges"]],
        strength=float(obj["strength"]),
        rank=int(obj.get("rank", 0)),
    )


def save_index(index: RetrievalIndex, path) -> None:
    """Write the index atomically as a versioned JSON container."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "params": {
            "gamma1": index.params.gamma1,
            "gamma2": index.params.gamma2,
            "L": index.params.L,
            "len": index.params.len,
            "raw_kernel": index.params.raw_kernel,
        },
        "records": [
            {
                "id": r.id,
                "width": r.width,
                "height": r.height,
                "semantic": [float(v) for v in r.semantic.vector],
                "dominant": None if r.dominant is None else detection_to_json(r.dominant),
            }
            for r in index.records
        ],
    }
    atomic_write_json(payload, path)


def load_index(path) -> RetrievalIndex:
    """Load an index file; pyramids are rebuilt from the stored pixels.

    Raises:
        FormatError: the file is not parseable JSON.
        VersionMismatch: unknown format tag or version.
    """
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read index {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != INDEX_FORMAT:
        raise VersionMismatch("not a vpscape index file")
    if payload.get("version") != INDEX_VERSION:
        raise VersionMismatch(f"unsupported index version {payload.get('version')!r}")
    p = payload["params"]
    params = RetrievalParams(
        gamma1=p["gamma1"], gamma2=p["gamma2"], L=p["L"], len=p["len"],
        raw_kernel=p.get("raw_kernel", False),
    )
    index = RetrievalIndex(params=params)
    for r in payload["records"]:
        dominant = None if r["dominant"] is None else detection_from_json(r["dominant"])
        index.add(
            ImageRecord.build(
                r["id"], r["width"], r["height"], r["semantic"], dominant=dominant, L=params.L
            )
        )
    return index


def atomic_write_json(payload, path) -> None:
    """Serialize deterministically and replace the target atomically."""
    path = Path(path)
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
