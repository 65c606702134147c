"""Batch extraction: images in, core-format contour maps and features out.

Per-image work runs in a thread pool; results are ordered by image id
before anything is written, so outputs and logs are deterministic
regardless of scheduling.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from .manifest import AdapterManifest
from .models import CONTOUR_MODELS, FEATURE_MODELS, WORKING_LEN

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def list_corpus(corpus_dir) -> list[Path]:
    corpus_dir = Path(corpus_dir)
    return sorted(
        p for p in corpus_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def load_image_resized(path, target_len: int = WORKING_LEN) -> np.ndarray:
    img = Image.open(path)
    scale = target_len / max(img.size)
    new_size = (max(round(img.width * scale), 1), max(round(img.height * scale), 1))
    return np.asarray(img.resize(new_size, Image.BILINEAR), dtype=float)


def _run_batch(manifest: AdapterManifest, op: str, per_image, max_workers: int = 4):
    """Run per_image over the corpus, log outcomes, return ok results.

    ``per_image(path)`` returns a result or raises; failures are logged
    and the batch continues.
    """
    paths = list_corpus(manifest.corpus_dir)
    if not paths:
        raise FileNotFoundError(f"no images found in {manifest.corpus_dir}")

    def task(path):
        try:
            return path.stem, per_image(path), None
        except Exception as exc:
            return path.stem, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        outcomes = sorted(pool.map(task, paths), key=lambda t: t[0])

    results = {}
    n_failed = 0
    for image_id, result, error in outcomes:
        if error is None:
            manifest.append(image_id, op, "ok")
            results[image_id] = result
        else:
            manifest.append(image_id, op, "failed", error)
            n_failed += 1
    return results, n_failed


def extract_contour_maps(manifest: AdapterManifest, max_workers: int = 4) -> int:
    """Emit a contour-map PNG + sidecar per corpus image; return #failed."""
    model = CONTOUR_MODELS[manifest.contour_model]
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def per_image(path):
        img = load_image_resized(path)
        weights = model(img)
        return np.clip(np.round(weights * 255.0), 0, 255).astype(np.uint8)

    results, n_failed = _run_batch(manifest, "contour", per_image, max_workers)
    for image_id, raster in results.items():
        Image.fromarray(raster, mode="L").save(out_dir / f"{image_id}.png")
        sidecar = {
            "image_id": image_id,
            "width": int(raster.shape[1]),
            "height": int(raster.shape[0]),
        }
        (out_dir / f"{image_id}.json").write_text(
            json.dumps(sidecar, sort_keys=True, separators=(",", ":"))
        )
    return n_failed


def extract_features(manifest: AdapterManifest, out_name: str = "features.csv",
                     max_workers: int = 4) -> int:
    """Emit one feature CSV covering the corpus; return #failed."""
    model = FEATURE_MODELS[manifest.feature_model]
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def per_image(path):
        return model(load_image_resized(path))

    results, n_failed = _run_batch(manifest, "feature", per_image, max_workers)
    lines = []
    for image_id in sorted(results):
        vec = results[image_id]
        lines.append(",".join([image_id, str(vec.size)] + [repr(float(v)) for v in vec]))
    (out_dir / out_name).write_text("\n".join(lines) + "\n")
    return n_failed
