"""Offline extraction adapters for the vpscape toolkit.

These scripts stand between a raw image corpus and the core pipeline:
they run a (pluggable) contour-detection model and an image-embedding
model over every image and emit exactly the file formats the core
ingests, which are a contour-map PNG with a JSON sidecar and a feature
CSV. The core is never imported; the only contract is the files.
"""

from .extract import extract_contour_maps, extract_features
from .manifest import AdapterManifest

__all__ = ["AdapterManifest", "extract_contour_maps", "extract_features"]
__version__ = "0.1.0"
