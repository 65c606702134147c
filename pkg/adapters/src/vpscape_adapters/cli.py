"""Command-line surface for batch extraction.

Exit codes: 0 all images processed; 1 setup error (no corpus, unknown
model); 3 batch finished but some images failed (see the manifest log).
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .extract import extract_contour_maps, extract_features
from .manifest import AdapterManifest
from .models import CONTOUR_MODELS, FEATURE_MODELS

EXIT_PARTIAL = 3


@click.group()
def main():
    """Extraction adapters: emit vpscape contour-map and feature files."""


def _load_or_new(corpus, output, manifest_path, **models) -> tuple[AdapterManifest, Path]:
    manifest_path = Path(manifest_path) if manifest_path else Path(output) / "manifest.json"
    if manifest_path.exists():
        manifest = AdapterManifest.load(manifest_path)
    else:
        manifest = AdapterManifest(corpus_dir=str(corpus), output_dir=str(output))
    for key, value in models.items():
        if value is not None:
            setattr(manifest, key, value)
    manifest.corpus_dir = str(corpus)
    manifest.output_dir = str(output)
    return manifest, manifest_path


@main.command("extract-contours")
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.argument("output", type=click.Path())
@click.option("--model", default=None, help="Contour model identifier.")
@click.option("--manifest", "manifest_path", type=click.Path(), default=None)
@click.option("--workers", type=int, default=4)
def extract_contours_cmd(corpus, output, model, manifest_path, workers):
    """Write a contour-map PNG + JSON sidecar for every corpus image."""
    if model is not None and model not in CONTOUR_MODELS:
        raise click.ClickException(
            f"unknown contour model {model!r}; available: {sorted(CONTOUR_MODELS)}"
        )
    manifest, path = _load_or_new(corpus, output, manifest_path, contour_model=model)
    try:
        n_failed = extract_contour_maps(manifest, max_workers=workers)
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc)) from exc
    manifest.save(path)
    n_ok = sum(1 for e in manifest.log if e["op"] == "contour" and e["status"] == "ok")
    click.echo(f"contour maps: {n_ok} ok, {n_failed} failed -> {output}")
    if n_failed:
        sys.exit(EXIT_PARTIAL)


@main.command("extract-features")
@click.argument("corpus", type=click.Path(exists=True, file_okay=False))
@click.argument("output", type=click.Path())
@click.option("--model", default=None, help="Feature model identifier.")
@click.option("--manifest", "manifest_path", type=click.Path(), default=None)
@click.option("--out-name", default="features.csv")
@click.option("--workers", type=int, default=4)
def extract_features_cmd(corpus, output, model, manifest_path, out_name, workers):
    """Write one feature CSV covering every corpus image."""
    if model is not None and model not in FEATURE_MODELS:
        raise click.ClickException(
            f"unknown feature model {model!r}; available: {sorted(FEATURE_MODELS)}"
        )
    manifest, path = _load_or_new(corpus, output, manifest_path, feature_model=model)
    try:
        n_failed = extract_features(manifest, out_name=out_name, max_workers=workers)
    except FileNotFoundError as exc:
        raise click.ClickException(str(exc)) from exc
    manifest.save(path)
    click.echo(f"features -> {Path(output) / out_name} ({n_failed} failed)")
    if n_failed:
        sys.exit(EXIT_PARTIAL)


if __name__ == "__main__":
    main()
