"""File schemas crossing module boundaries.

Detection record (JSON)::

    {"format": "vpscape-detections", "version": 1,
     "image_id": ..., "width": ..., "height": ..., "seed": ...,
     "dominant": <detection or null>,
     "candidates": [{"vp": {"xy": [x, y]} | {"ideal": [dx, dy]},
                     "strength": s, "rank": r,
                     "edges": [[[x, y], ...], ...]}, ...]}

Feature-vector file (CSV): one row per image, ``id,d,v1,...,vd``.

Annotation file (JSON): ``{"image_id": ..., "segments": [[[x1,y1],[x2,y2]],
...], "has_dominant": bool}``; a file may also hold a list of these.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, VersionMismatch
from .evaluation import Annotation
from .retrieval import atomic_write_json, detection_from_json, detection_to_json

DETECTIONS_FORMAT = "vpscape-detections"
DETECTIONS_VERSION = 1


def save_detections(path, image_id, width, height, candidates, dominant, seed=None) -> None:
    payload = {
        "format": DETECTIONS_FORMAT,
        "version": DETECTIONS_VERSION,
        "image_id": str(image_id),
        "width": int(width),
        "height": int(height),
        "seed": seed,
        "dominant": None if dominant is None else detection_to_json(dominant),
        "candidates": [detection_to_json(d) for d in candidates],
    }
    atomic_write_json(payload, path)


def load_detections(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read detections {path}: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("format") != DETECTIONS_FORMAT:
        raise VersionMismatch("not a vpscape detections file")
    if obj.get("version") != DETECTIONS_VERSION:
        raise VersionMismatch(f"unsupported detections version {obj.get('version')!r}")
    obj["dominant"] = None if obj["dominant"] is None else detection_from_json(obj["dominant"])
    obj["candidates"] = [detection_from_json(c) for c in obj["candidates"]]
    return obj


def load_features(path) -> dict[str, np.ndarray]:
    """Read a feature CSV into an id -> vector mapping."""
    features = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 3:
            raise FormatError(f"{path}:{lineno}: expected id,d,values...")
        image_id = parts[0]
        try:
            d = int(parts[1])
            vec = np.array([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if vec.size != d:
            raise FormatError(f"{path}:{lineno}: declared {d} values, found {vec.size}")
        features[image_id] = vec
    return features


def save_features(path, features: dict) -> None:
    lines = []
    for image_id in sorted(features):
        vec = np.asarray(features[image_id], dtype=float).ravel()
        lines.append(",".join([str(image_id), str(vec.size)] + [repr(float(v)) for v in vec]))
    Path(path).write_text("\n".join(lines) + "\n")


def annotation_to_json(ann: Annotation) -> dict:
    return {
        "image_id": ann.image_id,
        "segments": [[[float(a[0]), float(a[1])], [float(b[0]), float(b[1])]] for a, b in ann.gt_lines],
        "has_dominant": bool(ann.has_dominant),
    }


def annotation_from_json(obj) -> Annotation:
    return Annotation(
        image_id=obj["image_id"],
        gt_lines=[(tuple(seg[0]), tuple(seg[1])) for seg in obj["segments"]],
        has_dominant=bool(obj.get("has_dominant", True)),
    )


def save_annotation(ann: Annotation, path) -> None:
    atomic_write_json(annotation_to_json(ann), path)


def load_annotations(path) -> list[Annotation]:
    """Load annotations from a JSON file or a directory of JSON files."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.ann.json")) or sorted(path.glob("*.json"))
        anns = []
        for p in files:
            try:
                anns.extend(load_annotations(p))
            except (FormatError, KeyError):
                continue  # unrelated JSON (sidecars, scenes) in the same dir
        return anns
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read annotations {path}: {exc}") from exc
    if isinstance(obj, list):
        return [annotation_from_json(o) for o in obj]
    return [annotation_from_json(obj)]
