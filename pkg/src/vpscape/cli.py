"""Command-line surface tying together detection, indexing, querying,
evaluation, and synthetic-scene generation.

Exit codes: 0 success; 1 error (unreadable input, malformed config);
2 analysis succeeded but found no dominant VP.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
from PIL import Image

from . import evaluation, pipeline, records, retrieval
from .config import PipelineConfig
from .contours import load_contour_map
from .errors import VpscapeError
from .retrieval import (
    ImageRecord,
    RetrievalIndex,
    RetrievalParams,
    atomic_write_json,
    load_index,
    save_index,
)
from .selection import top_k as select_top_k

EXIT_NO_DOMINANT = 2


def _load_config(config_path, **flag_overrides) -> PipelineConfig:
    try:
        cfg = PipelineConfig.default(config_path)
        return cfg.replace(**flag_overrides)
    except VpscapeError as exc:
        raise click.ClickException(str(exc)) from exc


_config_option = click.option("--config", "config_path", type=click.Path(), default=None,
                              help="Key-value config file (flags override it).")


@click.group()
def main():
    """Dominant vanishing point detection and viewpoint-aware retrieval."""


@main.command()
@click.argument("input_path", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True)
@_config_option
@click.option("--seed", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--l-min", "l_min", type=float, default=None)
@click.option("--phi", type=float, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--threshold", "threshold_t", type=float, default=None)
@click.option("--top-k", "top_k", type=int, default=None)
@click.option("--fallback-edges", "force_fallback", is_flag=True,
              help="Extract edges from the image itself, skipping contour-map ingestion.")
@click.option("--image-id", default=None, help="Override the image id (defaults to sidecar or stem).")
def detect(input_path, output, config_path, seed, alpha, l_min, phi, tau,
           threshold_t, top_k, force_fallback, image_id):
    """Detect VP candidates in an image or contour map, write JSON records."""
    cfg = _load_config(config_path, seed=seed, alpha=alpha, l_min=l_min, phi=phi,
                       tau=tau, threshold_t=threshold_t, top_k=top_k)
    input_path = Path(input_path)
    sidecar = input_path.with_suffix(".json")
    try:
        if not force_fallback and input_path.suffix.lower() in (".png", ".pgm") and sidecar.exists():
            cmap = load_contour_map(input_path)
            width, height = cmap.width, cmap.height
            edges = pipeline.edges_from_contour_map(cmap, cfg)
            default_id = cmap.image_id or input_path.stem
        else:
            img = pipeline.load_image_resized(input_path, cfg.image_len)
            height, width = img.shape[:2]
            edges = pipeline.edges_from_image(img, cfg)
            default_id = input_path.stem
    except (VpscapeError, OSError) as exc:
        raise click.ClickException(f"cannot analyze {input_path}: {exc}") from exc

    candidates, dominant = pipeline.detect_dominant(edges, cfg, width, height)
    kept = select_top_k(candidates, cfg.top_k) if candidates else []
    records.save_detections(
        output, image_id or default_id, width, height, kept, dominant, seed=cfg.seed
    )
    if dominant is None:
        click.echo(f"{default_id}: no dominant VP ({len(kept)} candidates)")
        sys.exit(EXIT_NO_DOMINANT)
    vx, vy = dominant.vp.xy
    click.echo(f"{default_id}: dominant VP at ({vx:.1f}, {vy:.1f}), strength {dominant.strength:.1f}")


@main.command()
@click.argument("detections_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("features_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(), required=True)
@_config_option
@click.option("--gamma1", type=float, default=None)
@click.option("--gamma2", type=float, default=None)
@click.option("--pyramid-levels", "pyramid_levels", type=int, default=None)
@click.option("--raw-kernel", "raw_kernel", is_flag=True, default=None,
              help="Use the unnormalized pyramid matching score.")
def index(detections_dir, features_file, output, config_path, gamma1, gamma2,
          pyramid_levels, raw_kernel):
    """Build a retrieval index from detection records and a feature CSV."""
    cfg = _load_config(config_path, gamma1=gamma1, gamma2=gamma2,
                       pyramid_levels=pyramid_levels, raw_kernel=raw_kernel)
    try:
        features = records.load_features(features_file)
    except VpscapeError as exc:
        raise click.ClickException(str(exc)) from exc
    params = RetrievalParams(gamma1=cfg.gamma1, gamma2=cfg.gamma2,
                             L=cfg.pyramid_levels, len=cfg.image_len,
                             raw_kernel=cfg.raw_kernel)
    idx = RetrievalIndex(params=params)
    skipped = 0
    for path in sorted(Path(detections_dir).glob("*.json")):
        try:
            det = records.load_detections(path)
        except VpscapeError:
            continue  # unrelated JSON in the directory
        image_id = det["image_id"]
        if image_id not in features:
            click.echo(f"warning: no semantic feature for {image_id}, record rejected", err=True)
            skipped += 1
            continue
        idx.add(ImageRecord.build(image_id, det["width"], det["height"],
                                  features[image_id], dominant=det["dominant"],
                                  L=params.L))
    save_index(idx, output)
    click.echo(f"indexed {len(idx.records)} records ({skipped} rejected) -> {output}")


@main.command()
@click.argument("index_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("query_id")
@click.option("-k", "top_n", type=int, default=10)
@click.option("--exclude-self", is_flag=True)
def query(index_path, query_id, top_n, exclude_self):
    """Rank the corpus against a query record already in the index."""
    try:
        idx = load_index(index_path)
    except VpscapeError as exc:
        raise click.ClickException(str(exc)) from exc
    record = idx.get(query_id)
    if record is None:
        raise click.ClickException(f"id {query_id!r} not found in index")
    ranked = retrieval.query(idx, record, top_n, exclude_self=exclude_self)
    click.echo(json.dumps(
        {"query": query_id, "results": [{"id": i, "score": s} for i, s in ranked]},
        sort_keys=True,
    ))


@main.command()
@click.argument("detections_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("annotations", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True,
              help="Per-image metrics CSV; curve/ROC CSVs use derived names.")
def evaluate(detections_dir, annotations, output):
    """Score detection records against ground-truth annotations."""
    try:
        anns = {a.image_id: a for a in records.load_annotations(annotations)}
    except VpscapeError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = []
    scores = []
    for path in sorted(Path(detections_dir).glob("*.json")):
        try:
            det = records.load_detections(path)
        except VpscapeError:
            continue
        image_id = det["image_id"]
        ann = anns.get(image_id)
        if ann is None:
            continue
        strength = 0.0 if det["dominant"] is None else det["dominant"].strength
        scores.append((max((c.strength for c in det["candidates"]), default=0.0),
                       ann.has_dominant))
        if ann.has_dominant and det["dominant"] is not None:
            err = evaluation.consistency_error(ann.gt_edges(), det["dominant"].vp)
            vx, vy = det["dominant"].vp.xy
            rows.append((image_id, err, strength, vx, vy))
        else:
            rows.append((image_id, "", strength, "", ""))
    if not rows:
        raise click.ClickException("no detection records matched the annotations")

    with open(output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "consistency_error", "strength", "vp_x", "vp_y"])
        writer.writerows(rows)

    errors = [r[1] for r in rows if r[1] != ""]
    if errors:
        edges_t, frac = evaluation.cumulative_histogram(errors)
        curve_path = Path(output).with_suffix(".curve.csv")
        with open(curve_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["threshold_px", "fraction"])
            writer.writerows(zip(edges_t, frac))
        click.echo(f"consistency curve -> {curve_path}")
    labels = {lab for _, lab in scores}
    if len(labels) == 2:
        fpr, tpr, auc = evaluation.roc_auc(scores)
        roc_path = Path(output).with_suffix(".roc.csv")
        with open(roc_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            writer.writerows(zip(fpr, tpr))
        click.echo(f"verification ROC (AUC {auc:.3f}) -> {roc_path}")
    click.echo(f"metrics for {len(rows)} images -> {output}")


@main.command()
@click.option("-o", "--outdir", type=click.Path(), required=True)
@click.option("--n-scenes", type=int, default=1)
@click.option("--n-inliers", type=int, default=6)
@click.option("--n-outliers", type=int, default=10)
@click.option("--sigma", type=float, default=1.0)
@click.option("--seed", type=int, default=0)
@click.option("--vp", nargs=2, type=float, default=None, help="Fixed VP location (x y).")
def synth(outdir, n_scenes, n_inliers, n_outliers, sigma, seed, vp):
    """Generate synthetic scenes: scene JSON, contour map + sidecar, annotation."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i in range(n_scenes):
        scene = evaluation.generate_scene(
            noise_sigma=sigma, n_inliers=n_inliers, n_outliers=n_outliers,
            vp=vp or None, seed=seed + i,
        )
        stem = f"scene_{i:04d}"
        evaluation.save_scene(scene, outdir / f"{stem}.scene.json")
        img = evaluation.render_contour_map(scene)
        Image.fromarray(img, mode="L").save(outdir / f"{stem}.png")
        atomic_write_json(
            {"image_id": stem, "width": scene.width, "height": scene.height},
            outdir / f"{stem}.json",
        )
        records.save_annotation(scene.annotation(stem), outdir / f"{stem}.ann.json")
    click.echo(f"wrote {n_scenes} scene(s) to {outdir}")


if __name__ == "__main__":
    main()
