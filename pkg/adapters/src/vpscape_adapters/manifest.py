"""Batch manifest: corpus location, model choices, and per-image log."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class AdapterManifest:
    """Describes one extraction batch.

    The log is append-only: each completed batch appends one entry per
    image with the outcome, so reruns accumulate history rather than
    rewriting it.
    """

    corpus_dir: str
    output_dir: str
    contour_model: str = "gradient-v1"
    feature_model: str = "hist-embed-v1"
    log: list = field(default_factory=list)

    def append(self, image_id: str, op: str, status: str, detail: str = "") -> None:
        self.log.append(
            {"image_id": image_id, "op": op, "status": status, "detail": detail}
        )

    def to_json(self) -> dict:
        return {
            "corpus_dir": str(self.corpus_dir),
            "output_dir": str(self.output_dir),
            "contour_model": self.contour_model,
            "feature_model": self.feature_model,
            "log": list(self.log),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n")

    @staticmethod
    def load(path) -> "AdapterManifest":
        obj = json.loads(Path(path).read_text())
        return AdapterManifest(
            corpus_dir=obj["corpus_dir"],
            output_dir=obj["output_dir"],
            contour_model=obj.get("contour_model", "gradient-v1"),
            feature_model=obj.get("feature_model", "hist-embed-v1"),
            log=list(obj.get("log", [])),
        )
